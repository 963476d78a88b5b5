#include "mvprag/remote_generation.hpp"

#include <iostream>

#include "http_util.hpp"
#include "mvprag/error.hpp"
#include "mvprag/io.hpp"
#include "mvprag/text.hpp"

namespace mvprag {

RemoteGenerator::RemoteGenerator(GeneratorEndpoint endpoint, LogSink sink)
    : endpoint_(std::move(endpoint)), sink_(std::move(sink)) {
  if (endpoint_.url.empty() || endpoint_.model.empty()) {
    raise(ErrorCode::Config, "remote generator requires url and model");
  }
  if (!sink_) {
    sink_ = [](const std::string& line) { std::clog << line << '\n'; };
  }
}

std::string RemoteGenerator::identity() const { return "remote:" + endpoint_.model; }

std::string RemoteGenerator::generate(const PromptBundle& bundle) {
  const std::size_t prompt_chars = text::code_point_count(bundle.rendered);
  if (prompt_chars > endpoint_.max_prompt_chars) {
    raise(ErrorCode::OverLengthPrompt,
          "prompt for product '" + bundle.product_id + "' has " +
              std::to_string(prompt_chars) + " chars, limit " +
              std::to_string(endpoint_.max_prompt_chars));
  }

  const std::uint64_t seq = sequence_.fetch_add(1);
  const std::string correlation_id =
      "gen-" + std::to_string(seq) + "-" + text::fnv1a64_hex(bundle.rendered);

  io::Json request;
  request["model"] = endpoint_.model;
  request["messages"] = io::Json::array(
      {io::Json{{"role", "user"}, {"content", bundle.rendered}}});
  request["temperature"] = endpoint_.temperature;
  request["max_tokens"] = endpoint_.max_tokens;

  sink_("correlation_id=" + correlation_id + " product=" + bundle.product_id +
        " request_chars=" + std::to_string(prompt_chars));

  http::PostResult result = http::post_json_with_retry(
      endpoint_.url, http::bearer_token(endpoint_.auth_env), correlation_id,
      request.dump(), endpoint_.timeout_ms, endpoint_.max_attempts,
      endpoint_.retry_base_ms, "remote generate");

  io::Json response = io::Json::parse(result.body, nullptr, false);
  if (response.is_discarded() || !response.is_object() ||
      !response.contains("choices") || !response["choices"].is_array()) {
    raise(ErrorCode::MalformedResponse,
          "remote generate: response is not {choices: [...]} (correlation_id=" +
              correlation_id + ")");
  }
  const auto& choices = response["choices"];
  if (choices.empty()) {
    raise(ErrorCode::EmptyChoices,
          "remote generate: empty choices (correlation_id=" + correlation_id + ")");
  }
  const auto& first = choices[0];
  if (!first.is_object() || !first.contains("message") ||
      !first["message"].is_object() || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    raise(ErrorCode::MalformedResponse,
          "remote generate: first choice has no message content (correlation_id=" +
              correlation_id + ")");
  }
  const std::string content = first["message"]["content"].get<std::string>();
  sink_("correlation_id=" + correlation_id +
        " response_chars=" + std::to_string(text::code_point_count(content)));
  return content;
}

}  // namespace mvprag
