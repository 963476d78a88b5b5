#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <string>

#include "mvprag/generation.hpp"

namespace mvprag {

struct GeneratorEndpoint {
  std::string url;       // e.g. "http://host:port/v1/chat/completions"
  std::string model;
  std::string auth_env;
  double temperature = 0.0;
  int max_tokens = 512;
  // Prompts longer than this (in code points) fail fast before any network
  // call; silent truncation would corrupt the candidate section.
  std::size_t max_prompt_chars = 32768;
  int timeout_ms = 30000;
  int max_attempts = 3;
  int retry_base_ms = 200;
};

// Generator backed by an HTTP chat-completion service. Each request carries a
// correlation id (also sent as X-Correlation-Id) and is logged through the
// sink together with the response size.
class RemoteGenerator final : public Generator {
 public:
  using LogSink = std::function<void(const std::string&)>;

  explicit RemoteGenerator(GeneratorEndpoint endpoint, LogSink sink = nullptr);

  std::string generate(const PromptBundle& bundle) override;
  std::string identity() const override;

 private:
  GeneratorEndpoint endpoint_;
  LogSink sink_;
  std::atomic<std::uint64_t> sequence_{0};
};

}  // namespace mvprag
