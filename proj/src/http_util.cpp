#include "http_util.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include "mvprag/error.hpp"

namespace mvprag::http {

SplitUrl split_url(const std::string& url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    raise(ErrorCode::Config, "endpoint url missing scheme: " + url);
  }
  const std::size_t path = url.find('/', scheme + 3);
  if (path == std::string::npos) {
    return SplitUrl{url, "/"};
  }
  return SplitUrl{url.substr(0, path), url.substr(path)};
}

std::string bearer_token(const std::string& auth_env) {
  if (auth_env.empty()) return {};
  const char* token = std::getenv(auth_env.c_str());
  if (token == nullptr) {
    raise(ErrorCode::Config,
          "credential environment variable '" + auth_env + "' is not set");
  }
  return token;
}

PostResult post_json_with_retry(const std::string& url, const std::string& token,
                                const std::string& correlation_id,
                                const std::string& body, int timeout_ms,
                                int max_attempts, int retry_base_ms,
                                const std::string& what) {
  const SplitUrl split = split_url(url);
  std::string last_failure;
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    if (attempt > 0) {
      const auto delay = std::chrono::milliseconds(retry_base_ms << (attempt - 1));
      std::this_thread::sleep_for(delay);
    }
    httplib::Client client(split.base);
    client.set_connection_timeout(0, timeout_ms * 1000);
    client.set_read_timeout(timeout_ms / 1000, (timeout_ms % 1000) * 1000);
    httplib::Headers headers;
    if (!token.empty()) headers.emplace("Authorization", "Bearer " + token);
    if (!correlation_id.empty()) headers.emplace("X-Correlation-Id", correlation_id);

    auto result = client.Post(split.path, headers, body, "application/json");
    if (!result) {
      last_failure = what + ": connection to " + split.base + " failed (" +
                     httplib::to_string(result.error()) + ")";
      continue;
    }
    if (result->status >= 500) {
      last_failure = what + ": server error " + std::to_string(result->status) +
                     " from " + url;
      continue;
    }
    if (result->status < 200 || result->status >= 300) {
      raise(ErrorCode::Transport, what + ": HTTP " + std::to_string(result->status) +
                                      " from " + url);
    }
    return PostResult{result->status, result->body};
  }
  raise(ErrorCode::Transport, last_failure + " after " +
                                  std::to_string(max_attempts) + " attempts");
}

}  // namespace mvprag::http
