#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mvprag/embedding.hpp"

namespace mvprag {

struct EmbeddingEndpoint {
  std::string url;       // e.g. "http://host:port/v1/embeddings"
  std::string model;
  std::string auth_env;  // name of the env var holding the bearer token
  int timeout_ms = 10000;
  int max_batch = 16;
  int max_attempts = 3;
  int retry_base_ms = 200;
  int max_in_flight = 4;
  std::optional<std::size_t> dim;  // asserted against the service when set
};

// Encoder backed by an HTTP embedding service. Request {model, input:[...]},
// response {data:[{embedding:[...], index:n}]}. Vectors are re-normalized
// locally. Batches larger than max_batch are split and sent in order; partial
// results are never interleaved.
class RemoteEncoder final : public Encoder {
 public:
  explicit RemoteEncoder(EmbeddingEndpoint endpoint);
  ~RemoteEncoder() override;

  std::size_t dim() const override;
  std::string identity() const override;
  std::vector<Vec> encode_batch(const std::vector<std::string>& texts) const override;

 private:
  std::vector<Vec> encode_chunk(const std::vector<std::string>& texts) const;

  EmbeddingEndpoint endpoint_;
  mutable std::mutex mutex_;
  mutable std::size_t dim_ = 0;  // learned from the first response unless preset
  struct Limiter;
  std::unique_ptr<Limiter> limiter_;
};

}  // namespace mvprag
