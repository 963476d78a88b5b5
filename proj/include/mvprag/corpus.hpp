#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mvprag/taxonomy.hpp"

namespace mvprag {

struct LabelValue {
  std::string value;
  // True iff the value appears in values_of(category, attribute); false marks
  // an out-of-distribution ground-truth value.
  bool in_taxonomy = false;

  bool operator==(const LabelValue&) const = default;
};

// A labeled attribute. An empty `values` set is the null ground truth
// ("attribute value does not exist"); an attribute absent from a product's
// label list is unannotated and excluded from evaluation.
struct LabeledAttribute {
  std::string attribute;
  std::vector<LabelValue> values;

  bool operator==(const LabeledAttribute&) const = default;
};

struct Product {
  std::string id;
  std::string title;
  std::string description;
  std::string category;
  std::vector<LabeledAttribute> labels;  // input order

  const LabeledAttribute* find_label(const std::string& attribute) const;

  bool operator==(const Product&) const = default;
};

struct CorpusStats {
  std::size_t product_count = 0;
  std::size_t pa_pair_count = 0;
  std::size_t null_pair_count = 0;

  bool operator==(const CorpusStats&) const = default;
};

std::vector<Product> ingest_products(const std::filesystem::path& path,
                                     const Taxonomy& taxonomy);
void save_products(const std::filesystem::path& path,
                   const std::vector<Product>& products);
std::string serialize_products(const std::vector<Product>& products);

// title + single space + description, with empty fields dropped.
std::string render_query(const Product& p);

CorpusStats corpus_stats(const std::vector<Product>& products);

}  // namespace mvprag
