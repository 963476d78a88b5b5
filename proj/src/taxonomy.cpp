#include "mvprag/taxonomy.hpp"

#include <algorithm>

#include "mvprag/error.hpp"
#include "mvprag/io.hpp"
#include "mvprag/text.hpp"

namespace mvprag {

namespace {

std::string require_id(std::string_view raw, const std::string& what,
                       const std::string& where) {
  std::string id = text::canonical(raw);
  if (id.empty()) {
    raise(ErrorCode::Validation, where + ": empty " + what + " identifier");
  }
  return id;
}

}  // namespace

std::string Taxonomy::partition_key(const std::string& category,
                                    const std::string& attribute) {
  std::string key;
  key.reserve(category.size() + attribute.size() + 1);
  key.append(category);
  key.push_back('\x1f');
  key.append(attribute);
  return key;
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) {
  std::vector<TaxonomyRecord> records;
  std::size_t lineno = 0;
  for (const std::string& line : io::read_lines(path)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    io::Json obj = io::parse_json_line(line, path, lineno);
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (!obj.is_object() || !obj.contains("category") || !obj.contains("attribute") ||
        !obj.contains("values") || !obj["values"].is_array()) {
      raise(ErrorCode::Parse,
            where + ": expected object with category, attribute, values[]");
    }
    TaxonomyRecord rec;
    rec.category = obj["category"].get<std::string>();
    rec.attribute = obj["attribute"].get<std::string>();
    for (const auto& v : obj["values"]) {
      if (!v.is_string()) {
        raise(ErrorCode::Parse, where + ": values must be strings");
      }
      rec.values.push_back(v.get<std::string>());
    }
    records.push_back(std::move(rec));
  }
  return from_records(records, path.string());
}

Taxonomy Taxonomy::from_records(const std::vector<TaxonomyRecord>& records,
                                const std::string& source) {
  Taxonomy t;
  for (const TaxonomyRecord& rec : records) {
    const std::string where = source;
    std::string category = require_id(rec.category, "category", where);
    std::string attribute = require_id(rec.attribute, "attribute", where);

    auto schema_it = t.schema_.find(category);
    if (schema_it == t.schema_.end()) {
      t.categories_.push_back(category);
      schema_it = t.schema_.emplace(category, std::vector<std::string>{}).first;
    }
    auto& attrs = schema_it->second;
    if (std::find(attrs.begin(), attrs.end(), attribute) != attrs.end()) {
      raise(ErrorCode::Validation, where + ": duplicate attribute '" + attribute +
                                       "' in category '" + category + "'");
    }
    attrs.push_back(attribute);

    if (rec.values.empty()) {
      raise(ErrorCode::Validation, where + ": empty value list for (" + category +
                                       ", " + attribute + ")");
    }
    std::string key = partition_key(category, attribute);
    auto& values = t.values_[key];
    auto& value_set = t.value_sets_[key];
    for (const std::string& raw : rec.values) {
      std::string value = require_id(raw, "value", where);
      if (value == kNullMarker) {
        raise(ErrorCode::Validation,
              where + ": reserved null marker used as value in (" + category + ", " +
                  attribute + ")");
      }
      if (!value_set.insert(value).second) {
        raise(ErrorCode::Validation, where + ": duplicate value '" + value +
                                         "' in (" + category + ", " + attribute + ")");
      }
      values.push_back(value);
    }
  }
  if (t.categories_.empty()) {
    raise(ErrorCode::Validation, source + ": no categories");
  }
  return t;
}

void Taxonomy::save(const std::filesystem::path& path) const {
  io::atomic_write(path, serialize());
}

std::string Taxonomy::serialize() const {
  std::string out;
  for (const std::string& category : categories_) {
    for (const std::string& attribute : schema_.at(category)) {
      io::Json obj;
      obj["category"] = category;
      obj["attribute"] = attribute;
      obj["values"] = values_.at(partition_key(category, attribute));
      out += obj.dump();
      out += '\n';
    }
  }
  return out;
}

const std::vector<std::string>& Taxonomy::attribute_set(
    const std::string& category) const {
  auto it = schema_.find(category);
  if (it == schema_.end()) {
    raise(ErrorCode::UnknownCategory, "unknown category '" + category + "'");
  }
  return it->second;
}

const std::vector<std::string>& Taxonomy::values_of(
    const std::string& category, const std::string& attribute) const {
  const auto& attrs = attribute_set(category);  // raises on unknown category
  if (std::find(attrs.begin(), attrs.end(), attribute) == attrs.end()) {
    raise(ErrorCode::UnknownAttribute, "unknown attribute '" + attribute +
                                           "' in category '" + category + "'");
  }
  return values_.at(partition_key(category, attribute));
}

bool Taxonomy::has_category(const std::string& category) const {
  return schema_.contains(category);
}

bool Taxonomy::has_attribute(const std::string& category,
                             const std::string& attribute) const {
  auto it = schema_.find(category);
  if (it == schema_.end()) return false;
  return std::find(it->second.begin(), it->second.end(), attribute) != it->second.end();
}

bool Taxonomy::has_value(const std::string& category, const std::string& attribute,
                         const std::string& value) const {
  auto it = value_sets_.find(partition_key(category, attribute));
  return it != value_sets_.end() && it->second.contains(value);
}

std::size_t Taxonomy::triple_count() const {
  std::size_t n = 0;
  for (const auto& [key, values] : values_) n += values.size();
  return n;
}

std::size_t Taxonomy::max_partition_size() const {
  std::size_t n = 0;
  for (const auto& [key, values] : values_) n = std::max(n, values.size());
  return n;
}

bool Taxonomy::operator==(const Taxonomy& other) const {
  if (categories_ != other.categories_) return false;
  for (const std::string& category : categories_) {
    if (schema_.at(category) != other.schema_.at(category)) return false;
    for (const std::string& attribute : schema_.at(category)) {
      const std::string key = partition_key(category, attribute);
      if (values_.at(key) != other.values_.at(key)) return false;
    }
  }
  return true;
}

}  // namespace mvprag
