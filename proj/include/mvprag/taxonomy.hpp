#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace mvprag {

// Reserved protocol token meaning "attribute value does not exist". It is
// never a legal taxonomy value; comparison is case-sensitive on the
// NFC-canonical form.
inline constexpr std::string_view kNullMarker = "None";

struct TaxonomyRecord {
  std::string category;
  std::string attribute;
  std::vector<std::string> values;
};

// The category -> attribute -> enumerated-standard-values tree. Immutable
// after construction; safe for unrestricted concurrent reads.
class Taxonomy {
 public:
  static Taxonomy load(const std::filesystem::path& path);
  static Taxonomy from_records(const std::vector<TaxonomyRecord>& records,
                               const std::string& source = "<records>");

  void save(const std::filesystem::path& path) const;
  std::string serialize() const;

  const std::vector<std::string>& categories() const { return categories_; }

  // Attribute list of a category, in input-file (schema) order.
  const std::vector<std::string>& attribute_set(const std::string& category) const;

  // Ordered standardized values of (category, attribute). Never contains the
  // null marker.
  const std::vector<std::string>& values_of(const std::string& category,
                                            const std::string& attribute) const;

  bool has_category(const std::string& category) const;
  bool has_attribute(const std::string& category, const std::string& attribute) const;
  bool has_value(const std::string& category, const std::string& attribute,
                 const std::string& value) const;

  // Total number of (category, attribute, value) triples.
  std::size_t triple_count() const;

  // Size of the largest (category, attribute) value list; the "k=all" bound.
  std::size_t max_partition_size() const;

  bool operator==(const Taxonomy& other) const;

 private:
  static std::string partition_key(const std::string& category,
                                   const std::string& attribute);

  std::vector<std::string> categories_;
  std::unordered_map<std::string, std::vector<std::string>> schema_;
  std::unordered_map<std::string, std::vector<std::string>> values_;
  std::unordered_map<std::string, std::unordered_set<std::string>> value_sets_;
};

}  // namespace mvprag
