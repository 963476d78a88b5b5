#include "mvprag/remote_embedding.hpp"

#include <semaphore>

#include "http_util.hpp"
#include "mvprag/error.hpp"
#include "mvprag/io.hpp"

namespace mvprag {

struct RemoteEncoder::Limiter {
  explicit Limiter(int slots) : semaphore(slots) {}
  std::counting_semaphore<> semaphore;
};

RemoteEncoder::RemoteEncoder(EmbeddingEndpoint endpoint)
    : endpoint_(std::move(endpoint)),
      limiter_(std::make_unique<Limiter>(std::max(1, endpoint_.max_in_flight))) {
  if (endpoint_.url.empty() || endpoint_.model.empty()) {
    raise(ErrorCode::Config, "remote encoder requires url and model");
  }
  if (endpoint_.dim) dim_ = *endpoint_.dim;
}

RemoteEncoder::~RemoteEncoder() = default;

std::size_t RemoteEncoder::dim() const {
  std::lock_guard lock(mutex_);
  if (dim_ == 0) {
    raise(ErrorCode::Config,
          "remote encoder dimension unknown before the first request; set "
          "encoder.dim in the config");
  }
  return dim_;
}

std::string RemoteEncoder::identity() const { return "remote:" + endpoint_.model; }

std::vector<Vec> RemoteEncoder::encode_batch(
    const std::vector<std::string>& texts) const {
  std::vector<Vec> out;
  out.reserve(texts.size());
  const std::size_t chunk_size =
      static_cast<std::size_t>(std::max(1, endpoint_.max_batch));
  for (std::size_t begin = 0; begin < texts.size(); begin += chunk_size) {
    const std::size_t end = std::min(begin + chunk_size, texts.size());
    std::vector<std::string> chunk(texts.begin() + static_cast<std::ptrdiff_t>(begin),
                                   texts.begin() + static_cast<std::ptrdiff_t>(end));
    std::vector<Vec> vectors = encode_chunk(chunk);
    for (Vec& v : vectors) out.push_back(std::move(v));
  }
  return out;
}

std::vector<Vec> RemoteEncoder::encode_chunk(
    const std::vector<std::string>& texts) const {
  if (texts.empty()) return {};
  io::Json request;
  request["model"] = endpoint_.model;
  request["input"] = texts;

  limiter_->semaphore.acquire();
  http::PostResult result;
  try {
    result = http::post_json_with_retry(
        endpoint_.url, http::bearer_token(endpoint_.auth_env), "", request.dump(),
        endpoint_.timeout_ms, endpoint_.max_attempts, endpoint_.retry_base_ms,
        "remote encode");
  } catch (...) {
    limiter_->semaphore.release();
    throw;
  }
  limiter_->semaphore.release();

  io::Json response = io::Json::parse(result.body, nullptr, false);
  if (response.is_discarded() || !response.is_object() ||
      !response.contains("data") || !response["data"].is_array()) {
    raise(ErrorCode::MalformedResponse,
          "remote encode: response is not {data: [...]}");
  }
  const auto& data = response["data"];
  if (data.size() != texts.size()) {
    raise(ErrorCode::MalformedResponse,
          "remote encode: got " + std::to_string(data.size()) + " vectors for " +
              std::to_string(texts.size()) + " inputs");
  }

  std::vector<Vec> vectors(texts.size());
  for (const auto& item : data) {
    if (!item.is_object() || !item.contains("embedding") ||
        !item["embedding"].is_array() || !item.contains("index")) {
      raise(ErrorCode::MalformedResponse,
            "remote encode: data item missing embedding/index");
    }
    const auto index = item["index"].get<std::size_t>();
    if (index >= vectors.size()) {
      raise(ErrorCode::MalformedResponse, "remote encode: index out of range");
    }
    Vec v;
    v.reserve(item["embedding"].size());
    for (const auto& x : item["embedding"]) {
      if (!x.is_number()) {
        raise(ErrorCode::MalformedResponse,
              "remote encode: non-numeric embedding component");
      }
      v.push_back(x.get<double>());
    }
    ensure_finite(v, "remote encode");
    l2_normalize(v);
    vectors[index] = std::move(v);
  }

  std::lock_guard lock(mutex_);
  for (const Vec& v : vectors) {
    if (dim_ == 0) dim_ = v.size();
    if (v.size() != dim_) {
      raise(ErrorCode::DimensionMismatch,
            "remote encode: service returned dimension " + std::to_string(v.size()) +
                ", expected " + std::to_string(dim_));
    }
  }
  return vectors;
}

}  // namespace mvprag
