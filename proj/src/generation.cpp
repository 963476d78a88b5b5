#include "mvprag/generation.hpp"

#include <algorithm>

#include "mvprag/error.hpp"
#include "mvprag/text.hpp"

namespace mvprag {

const AttrOutcome* Prediction::find(const std::string& attribute) const {
  for (const auto& [attr, outcome] : outcomes) {
    if (attr == attribute) return &outcome;
  }
  return nullptr;
}

MockGenerator::MockGenerator(Mode mode, const std::vector<Product>& corpus)
    : mode_(mode) {
  for (const Product& p : corpus) products_.emplace(p.id, p);
}

std::string MockGenerator::identity() const {
  return mode_ == Mode::Oracle ? "mock-oracle" : "mock-heuristic";
}

std::string MockGenerator::generate(const PromptBundle& bundle) {
  const Product* product = nullptr;
  if (mode_ == Mode::Oracle) {
    auto it = products_.find(bundle.product_id);
    if (it == products_.end()) {
      raise(ErrorCode::Stage,
            "oracle mock has no ground truth for product '" + bundle.product_id + "'");
    }
    product = &it->second;
  }

  std::vector<std::string> lines;
  for (const std::string& attribute : bundle.schema) {
    const CandidateSet* set = nullptr;
    for (const CandidateSet& cs : bundle.candidate_sets) {
      if (cs.attribute == attribute) {
        set = &cs;
        break;
      }
    }
    std::string answer{kNullMarker};
    if (mode_ == Mode::Oracle) {
      // Ground-truth value when retrieval surfaced it, in ascending value
      // order for determinism; the null marker otherwise.
      const LabeledAttribute* label = product->find_label(attribute);
      if (label != nullptr && !label->values.empty() && set != nullptr) {
        std::vector<std::string> values;
        for (const LabelValue& lv : label->values) values.push_back(lv.value);
        std::sort(values.begin(), values.end());
        for (const std::string& value : values) {
          if (set->contains(value)) {
            answer = value;
            break;
          }
        }
      }
    } else if (set != nullptr && !set->candidates.empty()) {
      answer = set->candidates.front().value;
      for (const Candidate& c : set->candidates) {
        if (bundle.query.find(c.value) != std::string::npos) {
          answer = c.value;
          break;
        }
      }
    }
    lines.push_back(attribute + ": " + answer);
  }
  return text::join(lines, "\n");
}

Prediction parse_completion(const std::string& raw,
                            const std::vector<std::string>& schema,
                            const Taxonomy& taxonomy, const std::string& category) {
  if (schema.empty()) {
    raise(ErrorCode::Validation, "parse_completion: empty attribute schema");
  }
  Prediction prediction;
  std::unordered_map<std::string, AttrOutcome> parsed;

  for (const std::string& raw_line : text::split_lines(raw)) {
    const std::string line = text::trim(raw_line);
    if (line.empty()) continue;
    const std::size_t colon = line.find(':');
    if (colon == std::string::npos) {
      ++prediction.diagnostics.unparsed_lines;
      continue;
    }
    const std::string name = text::canonical(line.substr(0, colon));
    const std::string value = text::canonical(line.substr(colon + 1));

    // Attribute names match case-insensitively against the schema.
    const std::string* attribute = nullptr;
    for (const std::string& a : schema) {
      if (text::iequals(a, name)) {
        attribute = &a;
        break;
      }
    }
    if (attribute == nullptr) {
      ++prediction.diagnostics.unmatched_attributes;
      continue;
    }
    if (parsed.contains(*attribute)) {
      // Top-1 semantics: the first line for an attribute wins.
      ++prediction.diagnostics.duplicate_lines;
      continue;
    }

    AttrOutcome outcome;
    if (value.empty()) {
      ++prediction.diagnostics.empty_values;
      outcome.kind = OutcomeKind::Unknown;
    } else if (value == kNullMarker) {
      outcome.kind = OutcomeKind::Null;
    } else if (text::iequals(value, "unknown")) {
      outcome.kind = OutcomeKind::Unknown;
    } else {
      outcome.kind = OutcomeKind::Value;
      outcome.value = value;
      outcome.ood = !taxonomy.has_value(category, *attribute, value);
    }
    parsed.emplace(*attribute, std::move(outcome));
  }

  for (const std::string& attribute : schema) {
    auto it = parsed.find(attribute);
    prediction.outcomes.emplace_back(
        attribute, it != parsed.end() ? it->second : AttrOutcome{});
  }
  return prediction;
}

}  // namespace mvprag
