#include "mvprag/retrieval.hpp"

#include <algorithm>
#include <limits>

#include "mvprag/error.hpp"
#include "mvprag/io.hpp"
#include "mvprag/text.hpp"

namespace mvprag {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string pkey(const std::string& category, const std::string& attribute) {
  return category + '\x1f' + attribute;
}

io::Json vec_to_json(const Vec& v) {
  io::Json arr = io::Json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

Vec vec_from_json(const io::Json& arr, const std::string& where) {
  if (!arr.is_array()) {
    raise(ErrorCode::Parse, where + ": vector must be an array");
  }
  Vec v;
  v.reserve(arr.size());
  for (const auto& x : arr) {
    if (!x.is_number()) {
      raise(ErrorCode::Parse, where + ": vector components must be numbers");
    }
    v.push_back(x.get<double>());
  }
  ensure_finite(v, where);
  return v;
}

void check_snapshot_header(const io::Json& header, const std::string& kind,
                           const Encoder& encoder, const std::string& where) {
  if (!header.is_object() || header.value("kind", "") != kind) {
    raise(ErrorCode::Parse, where + ": not a " + kind + " snapshot");
  }
  const std::string identity = header.value("encoder", "");
  if (identity != encoder.identity()) {
    raise(ErrorCode::Validation, where + ": snapshot encoder '" + identity +
                                     "' does not match configured encoder '" +
                                     encoder.identity() + "'");
  }
  const auto dim = header.value("dim", std::size_t{0});
  if (dim != encoder.dim()) {
    raise(ErrorCode::DimensionMismatch,
          where + ": snapshot dim " + std::to_string(dim) +
              " does not match encoder dim " + std::to_string(encoder.dim()));
  }
}

}  // namespace

std::string value_prompt(const std::string& category, const std::string& attribute,
                         const std::string& value) {
  auto field = [](const std::string& s) {
    return text::collapse_ws(text::to_lower(s));
  };
  return "a " + field(category) + " with " + field(attribute) + " being " +
         field(value);
}

bool CandidateSet::contains(const std::string& value) const {
  return std::any_of(candidates.begin(), candidates.end(),
                     [&](const Candidate& c) { return c.value == value; });
}

ValueIndex ValueIndex::build(const Taxonomy& taxonomy, const Encoder& encoder) {
  ValueIndex index;
  index.encoder_identity_ = encoder.identity();
  index.dim_ = encoder.dim();
  for (const std::string& category : taxonomy.categories()) {
    for (const std::string& attribute : taxonomy.attribute_set(category)) {
      const auto& values = taxonomy.values_of(category, attribute);
      std::vector<std::string> prompts;
      prompts.reserve(values.size());
      for (const std::string& value : values) {
        prompts.push_back(value_prompt(category, attribute, value));
      }
      std::vector<Vec> vectors;
      try {
        vectors = encoder.encode_batch(prompts);
      } catch (const Error& e) {
        raise(e.code(), "encoding values of (" + category + ", " + attribute +
                            "): " + e.what());
      }
      std::vector<ValueEntry> entries;
      entries.reserve(values.size());
      for (std::size_t i = 0; i < values.size(); ++i) {
        // Encoder outputs are already L2-normalized; renormalizing here would
        // shift the stored bits away from what a fresh encode produces.
        entries.push_back(ValueEntry{values[i], prompts[i], std::move(vectors[i])});
      }
      const std::string key = pkey(category, attribute);
      index.partition_order_.push_back(key);
      index.size_ += entries.size();
      index.partitions_.emplace(key, std::move(entries));
    }
  }
  return index;
}

const std::vector<ValueEntry>& ValueIndex::partition(
    const std::string& category, const std::string& attribute) const {
  auto it = partitions_.find(pkey(category, attribute));
  if (it == partitions_.end()) {
    raise(ErrorCode::UnknownPartition,
          "no value partition for (" + category + ", " + attribute + ")");
  }
  return it->second;
}

bool ValueIndex::has_partition(const std::string& category,
                               const std::string& attribute) const {
  return partitions_.contains(pkey(category, attribute));
}

void ValueIndex::save(const std::filesystem::path& path) const {
  std::string out;
  io::Json header;
  header["kind"] = "value_index";
  header["encoder"] = encoder_identity_;
  header["dim"] = dim_;
  header["count"] = size_;
  out += header.dump();
  out += '\n';
  for (const std::string& key : partition_order_) {
    const auto sep = key.find('\x1f');
    const std::string category = key.substr(0, sep);
    const std::string attribute = key.substr(sep + 1);
    for (const ValueEntry& entry : partitions_.at(key)) {
      io::Json row;
      row["category"] = category;
      row["attribute"] = attribute;
      row["value"] = entry.value;
      row["prompt"] = entry.prompt;
      row["vector"] = vec_to_json(entry.vector);
      out += row.dump();
      out += '\n';
    }
  }
  io::atomic_write(path, out);
}

ValueIndex ValueIndex::load(const std::filesystem::path& path,
                            const Encoder& encoder) {
  const std::vector<std::string> lines = io::read_lines(path);
  if (lines.empty() || text::trim(lines[0]).empty()) {
    raise(ErrorCode::Parse, path.string() + ": missing snapshot header");
  }
  io::Json header = io::parse_json_line(lines[0], path, 1);
  check_snapshot_header(header, "value_index", encoder, path.string());

  ValueIndex index;
  index.encoder_identity_ = header["encoder"].get<std::string>();
  index.dim_ = header["dim"].get<std::size_t>();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    io::Json row = io::parse_json_line(lines[i], path, i + 1);
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    ValueEntry entry;
    entry.value = row.value("value", "");
    entry.prompt = row.value("prompt", "");
    entry.vector = vec_from_json(row["vector"], where);
    if (entry.vector.size() != index.dim_) {
      raise(ErrorCode::DimensionMismatch, where + ": row dim mismatch");
    }
    const std::string key = pkey(row.value("category", ""), row.value("attribute", ""));
    auto it = index.partitions_.find(key);
    if (it == index.partitions_.end()) {
      index.partition_order_.push_back(key);
      it = index.partitions_.emplace(key, std::vector<ValueEntry>{}).first;
    }
    it->second.push_back(std::move(entry));
    ++index.size_;
  }
  return index;
}

ProductIndex ProductIndex::build(const std::vector<Product>& pool,
                                 const Encoder& encoder) {
  ProductIndex index;
  index.encoder_identity_ = encoder.identity();
  index.dim_ = encoder.dim();
  std::vector<std::string> queries;
  queries.reserve(pool.size());
  for (const Product& p : pool) queries.push_back(render_query(p));
  std::vector<Vec> vectors = encoder.encode_batch(queries);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    auto it = index.partitions_.find(pool[i].category);
    if (it == index.partitions_.end()) {
      index.partition_order_.push_back(pool[i].category);
      it = index.partitions_.emplace(pool[i].category, std::vector<PoolEntry>{}).first;
    }
    it->second.push_back(PoolEntry{pool[i], queries[i], std::move(vectors[i])});
    ++index.size_;
  }
  return index;
}

const std::vector<PoolEntry>& ProductIndex::partition(
    const std::string& category) const {
  auto it = partitions_.find(category);
  if (it == partitions_.end()) {
    raise(ErrorCode::UnknownPartition, "no product partition for '" + category + "'");
  }
  return it->second;
}

bool ProductIndex::has_partition(const std::string& category) const {
  return partitions_.contains(category);
}

void ProductIndex::save(const std::filesystem::path& path) const {
  std::string out;
  io::Json header;
  header["kind"] = "product_index";
  header["encoder"] = encoder_identity_;
  header["dim"] = dim_;
  header["count"] = size_;
  out += header.dump();
  out += '\n';
  for (const std::string& category : partition_order_) {
    for (const PoolEntry& entry : partitions_.at(category)) {
      io::Json row;
      row["id"] = entry.product.id;
      row["title"] = entry.product.title;
      row["description"] = entry.product.description;
      row["category"] = entry.product.category;
      io::Json labels = io::Json::object();
      for (const LabeledAttribute& label : entry.product.labels) {
        io::Json values = io::Json::array();
        for (const LabelValue& lv : label.values) values.push_back(lv.value);
        labels[label.attribute] = std::move(values);
      }
      row["labels"] = std::move(labels);
      row["vector"] = vec_to_json(entry.vector);
      out += row.dump();
      out += '\n';
    }
  }
  io::atomic_write(path, out);
}

ProductIndex ProductIndex::load(const std::filesystem::path& path,
                                const Encoder& encoder, const Taxonomy& taxonomy) {
  const std::vector<std::string> lines = io::read_lines(path);
  if (lines.empty() || text::trim(lines[0]).empty()) {
    raise(ErrorCode::Parse, path.string() + ": missing snapshot header");
  }
  io::Json header = io::parse_json_line(lines[0], path, 1);
  check_snapshot_header(header, "product_index", encoder, path.string());

  ProductIndex index;
  index.encoder_identity_ = header["encoder"].get<std::string>();
  index.dim_ = header["dim"].get<std::size_t>();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    io::Json row = io::parse_json_line(lines[i], path, i + 1);
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    PoolEntry entry;
    entry.product.id = row.value("id", "");
    entry.product.title = row.value("title", "");
    entry.product.description = row.value("description", "");
    entry.product.category = row.value("category", "");
    if (row.contains("labels")) {
      for (const auto& [attr, values] : row["labels"].items()) {
        LabeledAttribute label;
        label.attribute = attr;
        for (const auto& v : values) {
          LabelValue lv;
          lv.value = v.get<std::string>();
          lv.in_taxonomy =
              taxonomy.has_value(entry.product.category, attr, lv.value);
          label.values.push_back(std::move(lv));
        }
        entry.product.labels.push_back(std::move(label));
      }
    }
    entry.query = render_query(entry.product);
    entry.vector = vec_from_json(row["vector"], where);
    if (entry.vector.size() != index.dim_) {
      raise(ErrorCode::DimensionMismatch, where + ": row dim mismatch");
    }
    auto it = index.partitions_.find(entry.product.category);
    if (it == index.partitions_.end()) {
      index.partition_order_.push_back(entry.product.category);
      it = index.partitions_
               .emplace(entry.product.category, std::vector<PoolEntry>{})
               .first;
    }
    it->second.push_back(std::move(entry));
    ++index.size_;
  }
  return index;
}

CandidateSet retrieve_values(const std::string& query, const std::string& category,
                             const std::string& attribute, std::size_t k,
                             const ValueIndex& index, const Encoder& encoder) {
  if (k < 1) {
    raise(ErrorCode::Validation, "retrieve_values: k must be >= 1");
  }
  const auto& entries = index.partition(category, attribute);
  const Vec qv = encoder.encode(query);

  std::vector<Candidate> scored;
  scored.reserve(entries.size());
  for (const ValueEntry& entry : entries) {
    scored.push_back(Candidate{entry.value, cosine(qv, entry.vector)});
  }
  std::sort(scored.begin(), scored.end(), [](const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.value < b.value;
  });
  if (scored.size() > k) scored.resize(k);
  scored.push_back(Candidate{std::string(kNullMarker), kNegInf});

  CandidateSet result;
  result.attribute = attribute;
  result.candidates = std::move(scored);
  return result;
}

std::string rendered_label_value(const Product& p, const std::string& attribute) {
  const LabeledAttribute* label = p.find_label(attribute);
  if (label == nullptr || label->values.empty()) return std::string(kNullMarker);
  const LabelValue* smallest = &label->values.front();
  for (const LabelValue& lv : label->values) {
    if (lv.value < smallest->value) smallest = &lv;
  }
  return smallest->value;
}

std::vector<FewShotExample> retrieve_products(const std::string& query,
                                              const std::string& category,
                                              std::size_t m, const ProductIndex& index,
                                              const Encoder& encoder,
                                              const std::string& exclude_id,
                                              const Taxonomy& taxonomy) {
  if (m == 0) return {};
  const auto& entries = index.partition(category);
  const Vec qv = encoder.encode(query);

  struct Scored {
    const PoolEntry* entry;
    double score;
  };
  std::vector<Scored> scored;
  scored.reserve(entries.size());
  for (const PoolEntry& entry : entries) {
    if (entry.product.id == exclude_id) continue;
    scored.push_back(Scored{&entry, cosine(qv, entry.vector)});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.entry->product.id < b.entry->product.id;
  });
  if (scored.size() > m) scored.resize(m);

  const auto& schema = taxonomy.attribute_set(category);
  std::vector<FewShotExample> shots;
  shots.reserve(scored.size());
  for (const Scored& s : scored) {
    FewShotExample shot;
    shot.product = s.entry->product;
    shot.score = s.score;
    for (const std::string& attribute : schema) {
      shot.rendered_labels.emplace_back(attribute,
                                        rendered_label_value(shot.product, attribute));
    }
    shots.push_back(std::move(shot));
  }
  return shots;
}

}  // namespace mvprag
