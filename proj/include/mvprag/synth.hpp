#pragma once

#include <cstdint>
#include <vector>

#include "mvprag/corpus.hpp"
#include "mvprag/taxonomy.hpp"

namespace mvprag {

// Seeded synthetic taxonomy + corpus generator. Product descriptions embed
// their ground-truth values (plus noise words) so the deterministic encoder
// and the heuristic mock have signal to work with; OOD labels are drawn from
// outside the taxonomy with the configured fraction.
struct SynthParams {
  std::uint64_t seed = 7;
  std::size_t categories = 5;
  std::size_t attributes_per_category = 3;
  std::size_t values_per_attribute = 8;
  std::size_t products = 200;         // query corpus size
  std::size_t pool_products = 200;    // retrieval pool size
  double ood_fraction = 0.0;          // labeled values outside the taxonomy
  double null_fraction = 0.2;         // labeled-empty (null ground truth)
  double unannotated_fraction = 0.1;  // attribute absent from labels
  double multi_value_fraction = 0.1;  // second ground-truth value
  std::size_t noise_words = 6;
};

struct SynthOutput {
  Taxonomy taxonomy;
  std::vector<Product> corpus;
  std::vector<Product> pool;
};

SynthOutput synthesize(const SynthParams& params);

}  // namespace mvprag
