#include "mvprag/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvprag/error.hpp"
#include "mvprag/text.hpp"

namespace mvprag {

void l2_normalize(Vec& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  if (sq == 0.0) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

bool is_zero_vec(const Vec& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

void ensure_finite(const Vec& v, const std::string& what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      raise(ErrorCode::Validation, what + ": non-finite vector component");
    }
  }
}

double cosine(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) {
    raise(ErrorCode::DimensionMismatch,
          "cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
              std::to_string(b.size()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

std::string HashedNgramEncoder::identity() const {
  return "hashed-ngram/dim=" + std::to_string(dim_);
}

std::vector<Vec> HashedNgramEncoder::encode_batch(
    const std::vector<std::string>& texts) const {
  std::vector<Vec> out;
  out.reserve(texts.size());
  for (const std::string& t : texts) out.push_back(encode_one(t));
  return out;
}

Vec HashedNgramEncoder::encode_one(const std::string& t) const {
  const std::string norm = text::to_lower(text::nfc(t));
  const std::vector<char32_t> cps = text::code_points(norm);
  Vec v(dim_, 0.0);
  if (cps.size() < 3) return v;  // degenerate input: zero vector
  for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
    const std::string gram = text::encode_utf8(cps.data() + i, 3);
    const std::uint64_t h = text::fnv1a64(gram);
    const std::size_t bucket = static_cast<std::size_t>(h % dim_);
    v[bucket] += (h >> 63) ? -1.0 : 1.0;
  }
  l2_normalize(v);
  return v;
}

}  // namespace mvprag
