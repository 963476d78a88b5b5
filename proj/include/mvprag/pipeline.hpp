#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "mvprag/corpus.hpp"
#include "mvprag/embedding.hpp"
#include "mvprag/evaluation.hpp"
#include "mvprag/generation.hpp"
#include "mvprag/io.hpp"
#include "mvprag/promptgen.hpp"
#include "mvprag/remote_embedding.hpp"
#include "mvprag/remote_generation.hpp"
#include "mvprag/retrieval.hpp"
#include "mvprag/synth.hpp"
#include "mvprag/taxonomy.hpp"

namespace mvprag {

struct EncoderConfig {
  std::string kind = "builtin";  // "builtin" | "remote"
  std::size_t dim = HashedNgramEncoder::kDefaultDim;
  EmbeddingEndpoint endpoint;  // used when kind == "remote"
};

struct GeneratorConfig {
  std::string kind = "mock-oracle";  // "mock-oracle" | "mock-heuristic" | "remote"
  GeneratorEndpoint endpoint;  // used when kind == "remote"
};

struct SweepConfig {
  std::string param = "k";  // "k" | "m"
  // Integer tokens, strictly ascending; "all" (k only) resolves to the
  // largest value-partition size at run time.
  std::vector<std::string> values = {"1", "2", "4", "8", "all"};
};

// One structured config file; CLI flags override individual fields, secrets
// stay in environment variables named by the endpoint configs.
struct PipelineConfig {
  std::filesystem::path out = "out";
  // Empty paths resolve to the conventional artifact names under `out`.
  std::filesystem::path taxonomy_path;
  std::filesystem::path corpus_path;
  std::filesystem::path pool_path;
  std::filesystem::path template_path;

  EncoderConfig encoder;
  GeneratorConfig generator;
  std::size_t k = 8;
  std::size_t m = 2;
  std::size_t concurrency = 4;
  std::uint64_t seed = 7;
  double ood_ratio = 0.0;  // extra OOD records per exported product
  SynthParams synth;       // seed is taken from `seed` at run time
  SweepConfig sweep;

  static PipelineConfig load(const std::filesystem::path& path);
  static PipelineConfig from_json(const io::Json& obj, const std::string& where);

  io::Json to_json() const;
  std::string config_hash() const;
  void validate() const;

  std::filesystem::path taxonomy_file() const;
  std::filesystem::path corpus_file() const;
  std::filesystem::path pool_file() const;
  std::filesystem::path value_index_file() const;
  std::filesystem::path product_index_file() const;
  std::filesystem::path retrievals_file() const;
  std::filesystem::path predictions_file() const;
  std::filesystem::path traces_file() const;
  std::filesystem::path report_file() const;
  std::filesystem::path sweep_csv_file() const;
  std::filesystem::path sweep_json_file() const;
  std::filesystem::path sft_file() const;
  std::filesystem::path manifest_file(const std::string& command) const;

  PromptTemplate prompt_template() const;
};

std::unique_ptr<Encoder> make_encoder(const EncoderConfig& config);
std::unique_ptr<Generator> make_generator(const GeneratorConfig& config,
                                          const std::vector<Product>& corpus);

// Per-product execution record: what retrieval produced, what the generator
// answered, and what the parser had to skip. Predictions reference their
// trace through trace_ref.
struct TraceRecord {
  std::string product_id;
  std::string category;
  std::string query;
  std::vector<std::pair<std::string, std::vector<Candidate>>> candidates;
  std::vector<std::pair<std::string, double>> shots;  // (product id, score)
  std::string raw_completion;
  ParseDiagnostics diagnostics;

  const std::vector<Candidate>* find_candidates(const std::string& attribute) const;
};

struct PredictResult {
  std::vector<Prediction> predictions;
  std::vector<TraceRecord> traces;
};

// Full per-product composition: value retrieval, product retrieval, prompt
// assembly, generation, parsing. Products run concurrently up to
// `concurrency` workers (the in-flight cap shared with remote services);
// outputs keep corpus order.
PredictResult run_predict(const Taxonomy& taxonomy, const std::vector<Product>& corpus,
                          const ValueIndex& values, const ProductIndex& products,
                          const Encoder& encoder, Generator& generator,
                          const PromptTemplate& tpl, std::size_t k, std::size_t m,
                          std::size_t concurrency);

// Retrieval stages only, for inspection runs; traces carry empty completions.
std::vector<TraceRecord> run_retrieve(const Taxonomy& taxonomy,
                                      const std::vector<Product>& corpus,
                                      const ValueIndex& values,
                                      const ProductIndex& products,
                                      const Encoder& encoder, std::size_t k,
                                      std::size_t m, std::size_t concurrency);

void write_predictions(const std::filesystem::path& path,
                       const std::vector<Prediction>& predictions,
                       const std::string& trace_file_name);
std::vector<Prediction> read_predictions(const std::filesystem::path& path);

void write_traces(const std::filesystem::path& path,
                  const std::vector<TraceRecord>& traces, bool include_completion);
std::vector<TraceRecord> read_traces(const std::filesystem::path& path);

// Joins corpus ground truth with predictions and trace candidates into one
// evaluation instance per annotated (product, attribute) pair. Unannotated
// attributes are skipped; a labeled product without a prediction or trace is
// an error.
std::vector<EvalInstance> make_instances(const std::vector<Product>& corpus,
                                         const std::vector<Prediction>& predictions,
                                         const std::vector<TraceRecord>& traces);

io::Json report_to_json(const EvalReport& report, const std::string& manifest_name);
EvalReport report_from_json(const io::Json& obj, const std::string& where);

// Resolved sweep plan: strictly ascending values, "all" expanded.
std::vector<std::size_t> resolve_sweep_values(const SweepConfig& sweep,
                                              const Taxonomy& taxonomy);

// Runs predict + evaluate once per swept value over shared indexes.
std::vector<SweepPoint> run_sweep(const Taxonomy& taxonomy,
                                  const std::vector<Product>& corpus,
                                  const ValueIndex& values,
                                  const ProductIndex& products, const Encoder& encoder,
                                  Generator& generator, const PromptTemplate& tpl,
                                  const PipelineConfig& config,
                                  const std::vector<std::size_t>& swept);

struct SftExport {
  std::vector<SftRecord> records;
  std::size_t ood_emitted = 0;
  std::size_t ood_ineligible = 0;    // OOD slot skipped: no eligible attribute
  std::size_t skipped_no_labels = 0; // products without ground truth
};

SftExport run_export_sft(const Taxonomy& taxonomy, const std::vector<Product>& corpus,
                         const ValueIndex& values, const ProductIndex& products,
                         const Encoder& encoder, const PromptTemplate& tpl,
                         std::size_t k, std::size_t m, double ood_ratio);

void write_sft_records(const std::filesystem::path& path,
                       const std::vector<SftRecord>& records);
std::vector<SftRecord> read_sft_records(const std::filesystem::path& path);

// Run manifest: config hash + dump, component identities, and content hashes
// of every input and output of the command. The only place timestamps appear,
// so repeated runs stay byte-comparable everywhere else.
struct ManifestInputs {
  std::string command;
  std::vector<std::pair<std::string, std::string>> components;
  std::vector<std::filesystem::path> inputs;
  std::vector<std::filesystem::path> outputs;
  io::Json extra;  // command-specific details (stats, swept values, ...)
};

std::filesystem::path write_manifest(const PipelineConfig& config,
                                     const ManifestInputs& inputs);

}  // namespace mvprag
