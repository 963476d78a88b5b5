#include "mvprag/synth.hpp"

#include <algorithm>
#include <random>
#include <unordered_set>

#include "mvprag/error.hpp"

namespace mvprag {

namespace {

// Deterministic helpers on top of mt19937_64; the std distributions are
// implementation-defined and would break cross-compiler reproducibility.
std::size_t rand_below(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

bool rand_chance(std::mt19937_64& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return (rng() >> 11) * 0x1.0p-53 < p;
}

// None of these starts with "oo", so taxonomy tokens never collide with the
// "ood" prefix used for out-of-distribution labels.
constexpr const char* kSyllables[] = {
    "ka", "ro", "mi", "zu", "ten", "bar", "sol", "ne", "vi", "дa", "lu", "pa",
    "sho", "ri", "ta", "gen", "mo", "fu", "sa", "ki", "yo", "han", "del", "qu"};

std::string syllable_word(std::mt19937_64& rng, std::size_t syllables) {
  std::string word;
  for (std::size_t i = 0; i < syllables; ++i) {
    word += kSyllables[rand_below(rng, std::size(kSyllables))];
  }
  return word;
}

std::string unique_word(std::mt19937_64& rng, std::size_t syllables,
                        std::unordered_set<std::string>& used) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::string word = syllable_word(rng, syllables);
    if (used.insert(word).second) return word;
  }
  // Salt with a counter when the syllable space is exhausted.
  std::string word = syllable_word(rng, syllables) + std::to_string(used.size());
  used.insert(word);
  return word;
}

Product make_product(std::mt19937_64& rng, const SynthParams& params,
                     const Taxonomy& taxonomy, const std::string& id,
                     std::unordered_set<std::string>& word_pool) {
  Product p;
  p.id = id;
  const auto& categories = taxonomy.categories();
  p.category = categories[rand_below(rng, categories.size())];
  p.title = p.category + " listing " + id;

  std::vector<std::string> description_words;
  for (const std::string& attribute : taxonomy.attribute_set(p.category)) {
    if (rand_chance(rng, params.unannotated_fraction)) continue;
    LabeledAttribute label;
    label.attribute = attribute;
    if (!rand_chance(rng, params.null_fraction)) {
      const auto& values = taxonomy.values_of(p.category, attribute);
      std::unordered_set<std::string> chosen;
      auto add_value = [&]() {
        LabelValue lv;
        if (rand_chance(rng, params.ood_fraction)) {
          lv.value = "ood" + unique_word(rng, 2, word_pool);
          lv.in_taxonomy = false;
        } else {
          for (int attempt = 0; attempt < 16; ++attempt) {
            lv.value = values[rand_below(rng, values.size())];
            if (!chosen.contains(lv.value)) break;
          }
          if (chosen.contains(lv.value)) return;
          lv.in_taxonomy = true;
        }
        chosen.insert(lv.value);
        description_words.push_back(lv.value);
        label.values.push_back(std::move(lv));
      };
      add_value();
      if (rand_chance(rng, params.multi_value_fraction)) add_value();
    }
    p.labels.push_back(std::move(label));
  }

  for (std::size_t i = 0; i < params.noise_words; ++i) {
    description_words.push_back(syllable_word(rng, 2));
  }
  // Deterministic Fisher-Yates; std::shuffle is implementation-defined.
  for (std::size_t i = description_words.size(); i > 1; --i) {
    std::swap(description_words[i - 1], description_words[rand_below(rng, i)]);
  }
  for (std::size_t i = 0; i < description_words.size(); ++i) {
    if (i > 0) p.description += ' ';
    p.description += description_words[i];
  }
  return p;
}

}  // namespace

SynthOutput synthesize(const SynthParams& params) {
  if (params.categories == 0 || params.attributes_per_category == 0 ||
      params.values_per_attribute == 0) {
    raise(ErrorCode::Config, "synth: counts must be positive");
  }
  std::mt19937_64 rng(params.seed);

  std::unordered_set<std::string> word_pool;
  std::vector<TaxonomyRecord> records;
  for (std::size_t c = 0; c < params.categories; ++c) {
    const std::string category =
        "cat-" + unique_word(rng, 2, word_pool) + "-" + std::to_string(c);
    for (std::size_t a = 0; a < params.attributes_per_category; ++a) {
      TaxonomyRecord rec;
      rec.category = category;
      rec.attribute = "attr-" + unique_word(rng, 2, word_pool);
      for (std::size_t v = 0; v < params.values_per_attribute; ++v) {
        rec.values.push_back(unique_word(rng, 3, word_pool));
      }
      records.push_back(std::move(rec));
    }
  }

  SynthOutput out;
  out.taxonomy = Taxonomy::from_records(records, "<synth>");

  auto pad = [](std::size_t n) {
    std::string s = std::to_string(n);
    while (s.size() < 4) s.insert(s.begin(), '0');
    return s;
  };
  for (std::size_t i = 0; i < params.products; ++i) {
    out.corpus.push_back(
        make_product(rng, params, out.taxonomy, "q-" + pad(i), word_pool));
  }
  for (std::size_t i = 0; i < params.pool_products; ++i) {
    out.pool.push_back(
        make_product(rng, params, out.taxonomy, "pool-" + pad(i), word_pool));
  }
  return out;
}

}  // namespace mvprag
