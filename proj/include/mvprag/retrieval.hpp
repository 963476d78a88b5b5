#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mvprag/corpus.hpp"
#include "mvprag/embedding.hpp"
#include "mvprag/taxonomy.hpp"

namespace mvprag {

// Corpus prompt for one standardized value: "a {category} with {attribute}
// being {value}", fields lowercased and whitespace-collapsed.
std::string value_prompt(const std::string& category, const std::string& attribute,
                         const std::string& value);

struct ValueEntry {
  std::string value;
  std::string prompt;
  Vec vector;
};

struct Candidate {
  std::string value;   // a taxonomy value or the null marker
  double score = 0.0;  // cosine; -inf for the appended null marker
};

// Descending-score candidate list for one attribute. Ties break by ascending
// value id; the null marker appears exactly once, appended last when the
// ranking did not produce it.
struct CandidateSet {
  std::string attribute;
  std::vector<Candidate> candidates;

  bool contains(const std::string& value) const;
};

struct FewShotExample {
  Product product;
  double score = 0.0;
  // Covers exactly the query category's attribute set, in schema order;
  // unlabeled or empty ground truth renders as the null marker.
  std::vector<std::pair<std::string, std::string>> rendered_labels;
};

class ValueIndex {
 public:
  static ValueIndex build(const Taxonomy& taxonomy, const Encoder& encoder);
  static ValueIndex load(const std::filesystem::path& path, const Encoder& encoder);

  void save(const std::filesystem::path& path) const;

  const std::vector<ValueEntry>& partition(const std::string& category,
                                           const std::string& attribute) const;
  bool has_partition(const std::string& category, const std::string& attribute) const;
  std::size_t size() const { return size_; }
  const std::string& encoder_identity() const { return encoder_identity_; }
  std::size_t dim() const { return dim_; }

 private:
  std::unordered_map<std::string, std::vector<ValueEntry>> partitions_;
  std::vector<std::string> partition_order_;
  std::string encoder_identity_;
  std::size_t dim_ = 0;
  std::size_t size_ = 0;
};

struct PoolEntry {
  Product product;
  std::string query;
  Vec vector;
};

class ProductIndex {
 public:
  static ProductIndex build(const std::vector<Product>& pool, const Encoder& encoder);
  static ProductIndex load(const std::filesystem::path& path, const Encoder& encoder,
                           const Taxonomy& taxonomy);

  void save(const std::filesystem::path& path) const;

  const std::vector<PoolEntry>& partition(const std::string& category) const;
  bool has_partition(const std::string& category) const;
  std::size_t size() const { return size_; }
  const std::string& encoder_identity() const { return encoder_identity_; }
  std::size_t dim() const { return dim_; }

 private:
  std::unordered_map<std::string, std::vector<PoolEntry>> partitions_;
  std::vector<std::string> partition_order_;
  std::string encoder_identity_;
  std::size_t dim_ = 0;
  std::size_t size_ = 0;
};

// Top-k values of partition (category, attribute) by cosine against the
// encoded query, plus the trailing null marker. Exact search over the
// partition; k >= partition size returns the whole partition ranked.
CandidateSet retrieve_values(const std::string& query, const std::string& category,
                             const std::string& attribute, std::size_t k,
                             const ValueIndex& index, const Encoder& encoder);

// Top-m same-category products by cosine, excluding `exclude_id`; ties break
// by ascending product id. Fewer than m are returned when the partition is
// small.
std::vector<FewShotExample> retrieve_products(const std::string& query,
                                              const std::string& category,
                                              std::size_t m, const ProductIndex& index,
                                              const Encoder& encoder,
                                              const std::string& exclude_id,
                                              const Taxonomy& taxonomy);

// The single value rendered for an attribute in few-shot label lines and SFT
// targets: the lexicographically smallest ground-truth value, or the null
// marker when the set is empty or the attribute is unannotated.
std::string rendered_label_value(const Product& p, const std::string& attribute);

}  // namespace mvprag
