#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "mvprag/corpus.hpp"
#include "mvprag/retrieval.hpp"
#include "mvprag/taxonomy.hpp"

namespace mvprag {

// Prompt template text. The default reproduces the English five-part template
// (task definition, note, reference products, product information, candidate
// values); alternates load from a JSON resource so deployments can swap the
// wording without a rebuild.
struct PromptTemplate {
  std::string version;
  std::string task_description;
  std::vector<std::string> notes;

  struct Headers {
    std::string task;
    std::string note;
    std::string reference;
    std::string product;
    std::string candidates;
  } headers;

  struct Labels {
    std::string description;           // "Product description: "
    std::string category;              // "Category: "
    std::string attribute_value;       // "Attribute value:"
    std::string attribute_collection;  // "Attribute collection: "
  } labels;

  std::string empty_reference;  // rendered when no shots were retrieved

  static const PromptTemplate& builtin();
  static PromptTemplate load(const std::filesystem::path& path);
  std::string serialize() const;
};

// The assembled five-part prompt. Section fields hold the bodies (headers
// excluded); `rendered` is the exact concatenation fed to the generator.
// Provenance fields record what went into each section so the prompt can be
// re-rendered with modified context (OOD sample construction).
struct PromptBundle {
  std::string task_description;
  std::string note;
  std::vector<std::string> few_shots;  // one rendered block per example
  std::string product_block;
  std::string candidate_block;
  std::string rendered;

  // provenance
  std::string product_id;
  std::string category;
  std::string query;
  std::vector<std::string> schema;
  std::vector<CandidateSet> candidate_sets;  // schema order
  std::vector<FewShotExample> shots;
};

PromptBundle assemble_prompt(const Product& p, const std::vector<FewShotExample>& shots,
                             const std::vector<CandidateSet>& candidates,
                             const Taxonomy& taxonomy,
                             const PromptTemplate& tpl = PromptTemplate::builtin());

// Recovers the five sections from a rendered prompt. Re-rendering the result
// reproduces the input byte for byte.
PromptBundle parse_prompt_sections(const std::string& rendered,
                                   const PromptTemplate& tpl = PromptTemplate::builtin());

struct SftRecord {
  std::string prompt;
  std::string target;
  // Code-point offset into prompt+target where the target begins; the
  // tokenizer-level mask is the downstream trainer's job.
  std::size_t loss_mask_boundary = 0;
  bool is_ood_sample = false;
  std::string product_id;
};

// Supervision target: one "Attribute: value" line per schema attribute, values
// taken from ground truth (lexicographically smallest when multi-valued, the
// null marker for empty or unannotated attributes).
std::string render_target(const Product& p, const Taxonomy& taxonomy);

SftRecord build_sft_record(const Product& p, const PromptBundle& bundle,
                           const Taxonomy& taxonomy);

// OOD training sample: picks the first schema attribute whose target value
// appears among its candidates, removes that value from the candidate list and
// from few-shot label lines, re-renders the prompt, and keeps the original
// target.
SftRecord build_ood_sample(const Product& p, const PromptBundle& bundle,
                           const Taxonomy& taxonomy,
                           const PromptTemplate& tpl = PromptTemplate::builtin());

}  // namespace mvprag
