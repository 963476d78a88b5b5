#pragma once

#include <string>

namespace mvprag::http {

struct SplitUrl {
  std::string base;  // scheme://host:port
  std::string path;  // leading slash
};

SplitUrl split_url(const std::string& url);

// Bearer token from the environment variable named in config; raises a config
// error when the variable is unset.
std::string bearer_token(const std::string& auth_env);

struct PostResult {
  int status = 0;
  std::string body;
};

// POST with bounded exponential-backoff retry on transport failures
// (connection errors and 5xx). 4xx responses raise immediately.
PostResult post_json_with_retry(const std::string& url, const std::string& token,
                                const std::string& correlation_id,
                                const std::string& body, int timeout_ms,
                                int max_attempts, int retry_base_ms,
                                const std::string& what);

}  // namespace mvprag::http
