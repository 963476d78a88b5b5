#include "mvprag/promptgen.hpp"

#include <algorithm>

#include "mvprag/error.hpp"
#include "mvprag/io.hpp"
#include "mvprag/text.hpp"

namespace mvprag {

namespace {

// Default template. Kept as a JSON resource string so the CLI's
// --template override and this builtin go through the same parser.
constexpr const char* kBuiltinTemplateJson = R"json({
  "version": "pavi-en/1",
  "task_description": "Given the product description, category, similar same category product, attribute set, and candidate attribute values for each attribute, generate the attribute values of the product. Unrecognizable attributes can be returned as unknown.",
  "notes": [
    "1. The attribute value of the product does not necessarily appear in the reference product attribute value and candidate attribute value",
    "2. If the attribute value of the product exists but does not appear in the reference product attribute value and candidate attribute value, it can be generated, but it is best not to do so",
    "3. If the attribute value of the product does not exist, return None",
    "4. The probability of the given candidate attribute value decreases from the front to the back"
  ],
  "headers": {
    "task": "Task Description",
    "note": "Note",
    "reference": "Reference product information",
    "product": "Product information",
    "candidates": "Attribute candidate value"
  },
  "labels": {
    "description": "Product description: ",
    "category": "Category: ",
    "attribute_value": "Attribute value:",
    "attribute_collection": "Attribute collection: "
  },
  "empty_reference": "(no reference products)"
})json";

PromptTemplate template_from_json(const io::Json& obj, const std::string& where) {
  auto need = [&](const io::Json& o, const char* field) -> const io::Json& {
    if (!o.contains(field)) {
      raise(ErrorCode::Parse, where + ": template missing field '" +
                                  std::string(field) + "'");
    }
    return o[field];
  };
  PromptTemplate tpl;
  tpl.version = need(obj, "version").get<std::string>();
  tpl.task_description = need(obj, "task_description").get<std::string>();
  for (const auto& n : need(obj, "notes")) tpl.notes.push_back(n.get<std::string>());
  const io::Json& headers = need(obj, "headers");
  tpl.headers.task = need(headers, "task").get<std::string>();
  tpl.headers.note = need(headers, "note").get<std::string>();
  tpl.headers.reference = need(headers, "reference").get<std::string>();
  tpl.headers.product = need(headers, "product").get<std::string>();
  tpl.headers.candidates = need(headers, "candidates").get<std::string>();
  const io::Json& labels = need(obj, "labels");
  tpl.labels.description = need(labels, "description").get<std::string>();
  tpl.labels.category = need(labels, "category").get<std::string>();
  tpl.labels.attribute_value = need(labels, "attribute_value").get<std::string>();
  tpl.labels.attribute_collection =
      need(labels, "attribute_collection").get<std::string>();
  tpl.empty_reference = need(obj, "empty_reference").get<std::string>();
  return tpl;
}

// User text placed on a single template line; newlines would break section
// parsing.
std::string line_text(const std::string& s) { return text::collapse_ws(s); }

std::string render_shot_block(const FewShotExample& shot, const PromptTemplate& tpl) {
  std::vector<std::string> lines;
  lines.push_back(tpl.labels.description + line_text(render_query(shot.product)));
  lines.push_back(tpl.labels.category + line_text(shot.product.category));
  lines.push_back(tpl.labels.attribute_value);
  for (const auto& [attribute, value] : shot.rendered_labels) {
    lines.push_back(attribute + ": " + value);
  }
  return text::join(lines, "\n");
}

std::string render_product_block(const std::string& query, const std::string& category,
                                 const std::vector<std::string>& schema,
                                 const PromptTemplate& tpl) {
  std::vector<std::string> collection;
  collection.reserve(schema.size());
  for (const std::string& attribute : schema) {
    collection.push_back(text::to_lower(attribute));
  }
  std::vector<std::string> lines;
  lines.push_back(tpl.labels.description + line_text(query));
  lines.push_back(tpl.labels.category + line_text(category));
  lines.push_back(tpl.labels.attribute_collection + text::join(collection, ", "));
  return text::join(lines, "\n");
}

std::string render_candidate_block(const std::vector<std::string>& schema,
                                   const std::vector<CandidateSet>& candidates) {
  std::vector<std::string> lines;
  for (const std::string& attribute : schema) {
    const CandidateSet* set = nullptr;
    for (const CandidateSet& cs : candidates) {
      if (cs.attribute == attribute) {
        set = &cs;
        break;
      }
    }
    std::vector<std::string> values;
    if (set != nullptr) {
      for (const Candidate& c : set->candidates) values.push_back(c.value);
    }
    if (std::find(values.begin(), values.end(), std::string(kNullMarker)) ==
        values.end()) {
      values.emplace_back(kNullMarker);
    }
    lines.push_back(attribute + ": " + text::join(values, ", "));
  }
  return text::join(lines, "\n");
}

std::string render_prompt(const PromptBundle& b, const PromptTemplate& tpl) {
  std::string shots_body = b.few_shots.empty() ? tpl.empty_reference
                                               : text::join(b.few_shots, "\n");
  std::string out;
  auto section = [&](const std::string& header, const std::string& body) {
    out += header;
    out += '\n';
    out += body;
    out += '\n';
  };
  section(tpl.headers.task, b.task_description);
  section(tpl.headers.note, b.note);
  section(tpl.headers.reference, shots_body);
  section(tpl.headers.product, b.product_block);
  section(tpl.headers.candidates, b.candidate_block);
  return out;
}

PromptBundle assemble_from_parts(const Product& p, const std::string& query,
                                 const std::vector<FewShotExample>& shots,
                                 const std::vector<CandidateSet>& candidates,
                                 const std::vector<std::string>& schema,
                                 const PromptTemplate& tpl) {
  PromptBundle b;
  b.product_id = p.id;
  b.category = p.category;
  b.query = query;
  b.schema = schema;
  b.candidate_sets = candidates;
  b.shots = shots;

  b.task_description = tpl.task_description;
  b.note = text::join(tpl.notes, "\n");
  for (const FewShotExample& shot : shots) {
    b.few_shots.push_back(render_shot_block(shot, tpl));
  }
  b.product_block = render_product_block(query, p.category, schema, tpl);
  b.candidate_block = render_candidate_block(schema, candidates);
  b.rendered = render_prompt(b, tpl);
  return b;
}

}  // namespace

const PromptTemplate& PromptTemplate::builtin() {
  static const PromptTemplate tpl = template_from_json(
      io::Json::parse(kBuiltinTemplateJson), "<builtin template>");
  return tpl;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  io::Json obj = io::Json::parse(io::read_file(path), nullptr, false);
  if (obj.is_discarded()) {
    raise(ErrorCode::Parse, path.string() + ": invalid template JSON");
  }
  return template_from_json(obj, path.string());
}

std::string PromptTemplate::serialize() const {
  io::Json obj;
  obj["version"] = version;
  obj["task_description"] = task_description;
  obj["notes"] = notes;
  obj["headers"] = {{"task", headers.task},
                    {"note", headers.note},
                    {"reference", headers.reference},
                    {"product", headers.product},
                    {"candidates", headers.candidates}};
  obj["labels"] = {{"description", labels.description},
                   {"category", labels.category},
                   {"attribute_value", labels.attribute_value},
                   {"attribute_collection", labels.attribute_collection}};
  obj["empty_reference"] = empty_reference;
  return obj.dump(2) + "\n";
}

PromptBundle assemble_prompt(const Product& p, const std::vector<FewShotExample>& shots,
                             const std::vector<CandidateSet>& candidates,
                             const Taxonomy& taxonomy, const PromptTemplate& tpl) {
  const std::vector<std::string>& schema = taxonomy.attribute_set(p.category);
  for (const CandidateSet& cs : candidates) {
    if (std::find(schema.begin(), schema.end(), cs.attribute) == schema.end()) {
      raise(ErrorCode::SchemaMismatch,
            "candidate set for '" + cs.attribute + "' does not belong to category '" +
                p.category + "'");
    }
  }
  return assemble_from_parts(p, render_query(p), shots, candidates, schema, tpl);
}

PromptBundle parse_prompt_sections(const std::string& rendered,
                                   const PromptTemplate& tpl) {
  const std::vector<std::string> lines = text::split_lines(rendered);
  const std::vector<std::string> headers = {tpl.headers.task, tpl.headers.note,
                                            tpl.headers.reference, tpl.headers.product,
                                            tpl.headers.candidates};
  std::vector<std::size_t> header_pos;
  std::size_t cursor = 0;
  for (const std::string& header : headers) {
    bool found = false;
    for (std::size_t i = cursor; i < lines.size(); ++i) {
      if (lines[i] == header) {
        header_pos.push_back(i);
        cursor = i + 1;
        found = true;
        break;
      }
    }
    if (!found) {
      raise(ErrorCode::MalformedSection, "missing section header '" + header + "'");
    }
  }

  auto body = [&](std::size_t section) {
    const std::size_t begin = header_pos[section] + 1;
    // The final section body ends before the trailing empty line produced by
    // the terminating newline.
    std::size_t end = (section + 1 < header_pos.size()) ? header_pos[section + 1]
                                                        : lines.size();
    if (section + 1 == header_pos.size() && end > begin && lines[end - 1].empty()) {
      --end;
    }
    std::vector<std::string> slice(lines.begin() + static_cast<std::ptrdiff_t>(begin),
                                   lines.begin() + static_cast<std::ptrdiff_t>(end));
    return text::join(slice, "\n");
  };

  PromptBundle b;
  b.task_description = body(0);
  b.note = body(1);
  const std::string shots_body = body(2);
  if (shots_body != tpl.empty_reference && !shots_body.empty()) {
    // Few-shot blocks begin at each description label line.
    std::vector<std::string> block;
    for (const std::string& line : text::split_lines(shots_body)) {
      if (line.rfind(tpl.labels.description, 0) == 0 && !block.empty()) {
        b.few_shots.push_back(text::join(block, "\n"));
        block.clear();
      }
      block.push_back(line);
    }
    if (!block.empty()) b.few_shots.push_back(text::join(block, "\n"));
  }
  b.product_block = body(3);
  b.candidate_block = body(4);
  b.rendered = render_prompt(b, tpl);
  if (b.rendered != rendered) {
    raise(ErrorCode::MalformedSection,
          "prompt does not round-trip through the section grammar");
  }
  return b;
}

std::string render_target(const Product& p, const Taxonomy& taxonomy) {
  std::vector<std::string> lines;
  for (const std::string& attribute : taxonomy.attribute_set(p.category)) {
    lines.push_back(attribute + ": " + rendered_label_value(p, attribute));
  }
  return text::join(lines, "\n");
}

SftRecord build_sft_record(const Product& p, const PromptBundle& bundle,
                           const Taxonomy& taxonomy) {
  const bool any_annotated = !p.labels.empty();
  if (!any_annotated) {
    raise(ErrorCode::NoLabels, "product '" + p.id + "' has no ground-truth labels");
  }
  SftRecord record;
  record.prompt = bundle.rendered;
  record.target = render_target(p, taxonomy);
  record.loss_mask_boundary = text::code_point_count(record.prompt);
  record.is_ood_sample = false;
  record.product_id = p.id;
  return record;
}

SftRecord build_ood_sample(const Product& p, const PromptBundle& bundle,
                           const Taxonomy& taxonomy, const PromptTemplate& tpl) {
  // First schema-order attribute whose target value is among its candidates.
  std::string selected_attribute;
  std::string selected_value;
  for (const std::string& attribute : bundle.schema) {
    const LabeledAttribute* label = p.find_label(attribute);
    if (label == nullptr || label->values.empty()) continue;
    const std::string value = rendered_label_value(p, attribute);
    for (const CandidateSet& cs : bundle.candidate_sets) {
      if (cs.attribute == attribute && cs.contains(value)) {
        selected_attribute = attribute;
        selected_value = value;
        break;
      }
    }
    if (!selected_attribute.empty()) break;
  }
  if (selected_attribute.empty()) {
    raise(ErrorCode::NoEligibleAttribute,
          "product '" + p.id +
              "': no attribute has its ground-truth value among the candidates");
  }

  std::vector<CandidateSet> pruned = bundle.candidate_sets;
  for (CandidateSet& cs : pruned) {
    if (cs.attribute != selected_attribute) continue;
    std::erase_if(cs.candidates, [&](const Candidate& c) {
      return c.value == selected_value;
    });
  }
  std::vector<FewShotExample> blinded = bundle.shots;
  for (FewShotExample& shot : blinded) {
    for (auto& [attribute, value] : shot.rendered_labels) {
      if (attribute == selected_attribute && value == selected_value) {
        value = std::string(kNullMarker);
      }
    }
  }

  PromptBundle masked =
      assemble_from_parts(p, bundle.query, blinded, pruned, bundle.schema, tpl);
  SftRecord record = build_sft_record(p, masked, taxonomy);
  record.is_ood_sample = true;
  return record;
}

}  // namespace mvprag
