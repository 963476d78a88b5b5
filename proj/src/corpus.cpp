#include "mvprag/corpus.hpp"

#include <algorithm>
#include <unordered_set>

#include "mvprag/error.hpp"
#include "mvprag/io.hpp"
#include "mvprag/text.hpp"

namespace mvprag {

const LabeledAttribute* Product::find_label(const std::string& attribute) const {
  for (const LabeledAttribute& label : labels) {
    if (label.attribute == attribute) return &label;
  }
  return nullptr;
}

namespace {

Product product_from_json(const io::Json& obj, const Taxonomy& taxonomy,
                          const std::string& where) {
  for (const char* field : {"id", "title", "description", "category"}) {
    if (!obj.contains(field) || !obj[field].is_string()) {
      raise(ErrorCode::Parse, where + ": missing or non-string field '" +
                                  std::string(field) + "'");
    }
  }
  Product p;
  p.id = text::canonical(obj["id"].get<std::string>());
  if (p.id.empty()) {
    raise(ErrorCode::Validation, where + ": empty product id");
  }
  const std::string who = where + ": product '" + p.id + "'";
  p.title = text::canonical(obj["title"].get<std::string>());
  p.description = text::canonical(obj["description"].get<std::string>());
  p.category = text::canonical(obj["category"].get<std::string>());
  if (!taxonomy.has_category(p.category)) {
    raise(ErrorCode::UnknownCategory,
          who + ": unknown category '" + p.category + "'");
  }
  if (obj.contains("labels")) {
    if (!obj["labels"].is_object()) {
      raise(ErrorCode::Parse, who + ": labels must be an object");
    }
    for (const auto& [raw_attr, raw_values] : obj["labels"].items()) {
      LabeledAttribute label;
      label.attribute = text::canonical(raw_attr);
      if (!taxonomy.has_attribute(p.category, label.attribute)) {
        raise(ErrorCode::Validation, who + ": labeled attribute '" + label.attribute +
                                         "' not in schema of '" + p.category + "'");
      }
      if (p.find_label(label.attribute) != nullptr) {
        raise(ErrorCode::Validation,
              who + ": duplicate label attribute '" + label.attribute + "'");
      }
      if (!raw_values.is_array()) {
        raise(ErrorCode::Parse, who + ": label values must be an array");
      }
      std::unordered_set<std::string> seen;
      for (const auto& rv : raw_values) {
        if (!rv.is_string()) {
          raise(ErrorCode::Parse, who + ": label values must be strings");
        }
        LabelValue lv;
        lv.value = text::canonical(rv.get<std::string>());
        if (lv.value.empty()) {
          raise(ErrorCode::Validation,
                who + ": empty label value for '" + label.attribute + "'");
        }
        if (lv.value == kNullMarker) {
          raise(ErrorCode::Validation,
                who + ": reserved null marker used as label value for '" +
                    label.attribute + "' (use an empty list instead)");
        }
        if (!seen.insert(lv.value).second) {
          raise(ErrorCode::Validation, who + ": duplicate label value '" + lv.value +
                                           "' for '" + label.attribute + "'");
        }
        lv.in_taxonomy = taxonomy.has_value(p.category, label.attribute, lv.value);
        label.values.push_back(std::move(lv));
      }
      p.labels.push_back(std::move(label));
    }
  }
  return p;
}

}  // namespace

std::vector<Product> ingest_products(const std::filesystem::path& path,
                                     const Taxonomy& taxonomy) {
  std::vector<Product> products;
  std::unordered_set<std::string> ids;
  std::size_t lineno = 0;
  for (const std::string& line : io::read_lines(path)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    io::Json obj = io::parse_json_line(line, path, lineno);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    Product p = product_from_json(obj, taxonomy, where);
    if (!ids.insert(p.id).second) {
      raise(ErrorCode::Validation, where + ": duplicate product id '" + p.id + "'");
    }
    products.push_back(std::move(p));
  }
  return products;
}

std::string serialize_products(const std::vector<Product>& products) {
  std::string out;
  for (const Product& p : products) {
    io::Json obj;
    obj["id"] = p.id;
    obj["title"] = p.title;
    obj["description"] = p.description;
    obj["category"] = p.category;
    io::Json labels = io::Json::object();
    for (const LabeledAttribute& label : p.labels) {
      io::Json values = io::Json::array();
      for (const LabelValue& lv : label.values) values.push_back(lv.value);
      labels[label.attribute] = std::move(values);
    }
    obj["labels"] = std::move(labels);
    out += obj.dump();
    out += '\n';
  }
  return out;
}

void save_products(const std::filesystem::path& path,
                   const std::vector<Product>& products) {
  io::atomic_write(path, serialize_products(products));
}

std::string render_query(const Product& p) {
  if (p.title.empty()) return p.description;
  if (p.description.empty()) return p.title;
  return p.title + " " + p.description;
}

CorpusStats corpus_stats(const std::vector<Product>& products) {
  CorpusStats stats;
  stats.product_count = products.size();
  for (const Product& p : products) {
    for (const LabeledAttribute& label : p.labels) {
      ++stats.pa_pair_count;
      if (label.values.empty()) ++stats.null_pair_count;
    }
  }
  return stats;
}

}  // namespace mvprag
