#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace mvprag {

using Vec = std::vector<double>;

// All components finite; L2-normalized unless zero.
void l2_normalize(Vec& v);
bool is_zero_vec(const Vec& v);
void ensure_finite(const Vec& v, const std::string& what);

// dot(a,b)/(|a||b|) clamped to [-1,1]. If either vector is zero, returns the
// -infinity sentinel so degenerate inputs rank last instead of erroring.
// Dimension mismatch raises.
double cosine(const Vec& a, const Vec& b);

// Encoder contract shared by both retrieval levels. Implementations must be
// safe for concurrent encode_batch calls.
class Encoder {
 public:
  virtual ~Encoder() = default;

  virtual std::size_t dim() const = 0;

  // Stable identity string persisted into index snapshots; loading a snapshot
  // built with a different identity is an error.
  virtual std::string identity() const = 0;

  // One output vector per input, each of dimension dim().
  virtual std::vector<Vec> encode_batch(const std::vector<std::string>& texts) const = 0;

  Vec encode(const std::string& t) const { return encode_batch({t}).front(); }
};

// Deterministic hashed character-3-gram encoder: NFC-normalize and lowercase
// the text, hash each 3-gram of code points with 64-bit FNV-1a, bucket by
// hash mod dim with the sign taken from bit 63, then L2-normalize. Texts
// shorter than 3 code points map to the zero vector.
class HashedNgramEncoder final : public Encoder {
 public:
  static constexpr std::size_t kDefaultDim = 256;

  explicit HashedNgramEncoder(std::size_t dim = kDefaultDim) : dim_(dim) {}

  std::size_t dim() const override { return dim_; }
  std::string identity() const override;
  std::vector<Vec> encode_batch(const std::vector<std::string>& texts) const override;

 private:
  Vec encode_one(const std::string& t) const;

  std::size_t dim_;
};

}  // namespace mvprag
