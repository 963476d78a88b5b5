#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "mvprag/corpus.hpp"
#include "mvprag/promptgen.hpp"
#include "mvprag/taxonomy.hpp"

namespace mvprag {

enum class OutcomeKind { Value, Null, Unknown };

struct AttrOutcome {
  OutcomeKind kind = OutcomeKind::Unknown;
  std::string value;  // set iff kind == Value
  // Computed against the taxonomy, never asserted by the generator: true iff
  // value is absent from values_of(category, attribute).
  bool ood = false;

  bool operator==(const AttrOutcome&) const = default;
};

struct ParseDiagnostics {
  std::size_t unparsed_lines = 0;
  std::size_t unmatched_attributes = 0;
  std::size_t duplicate_lines = 0;
  std::size_t empty_values = 0;

  std::size_t total() const {
    return unparsed_lines + unmatched_attributes + duplicate_lines + empty_values;
  }
};

struct Prediction {
  std::string product_id;
  std::vector<std::pair<std::string, AttrOutcome>> outcomes;  // schema order
  ParseDiagnostics diagnostics;
  std::string trace_ref;

  const AttrOutcome* find(const std::string& attribute) const;
};

// Pluggable answer source. Implementations must be safe for concurrent
// generate() calls; transport failures surface as errors, never as empty
// strings.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual std::string generate(const PromptBundle& bundle) = 0;
  virtual std::string identity() const = 0;
};

// Hermetic test double. Oracle mode answers from ground truth when the value
// survived retrieval and abstains otherwise; heuristic mode picks the first
// candidate found verbatim in the query text, falling back to the top-ranked
// candidate.
class MockGenerator final : public Generator {
 public:
  enum class Mode { Oracle, Heuristic };

  MockGenerator(Mode mode, const std::vector<Product>& corpus);

  std::string generate(const PromptBundle& bundle) override;
  std::string identity() const override;

 private:
  Mode mode_;
  std::unordered_map<std::string, Product> products_;
};

// Total parser: every schema attribute receives exactly one outcome; lines
// that cannot be interpreted are skipped and counted in the diagnostics.
Prediction parse_completion(const std::string& raw,
                            const std::vector<std::string>& schema,
                            const Taxonomy& taxonomy, const std::string& category);

}  // namespace mvprag
