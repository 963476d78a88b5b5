// Command-line front end: synth | ingest | index | retrieve | predict |
// evaluate | sweep | export-sft. One config file drives every command; the
// flags below override individual fields. Exit codes: 0 success, 2 config
// error, 3 input error, 4 stage failure.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvprag/corpus.hpp"
#include "mvprag/error.hpp"
#include "mvprag/evaluation.hpp"
#include "mvprag/io.hpp"
#include "mvprag/pipeline.hpp"
#include "mvprag/retrieval.hpp"
#include "mvprag/synth.hpp"
#include "mvprag/taxonomy.hpp"

namespace fs = std::filesystem;
using namespace mvprag;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::Config:
      return 2;
    case ErrorCode::Io:
    case ErrorCode::Parse:
    case ErrorCode::Validation:
    case ErrorCode::UnknownCategory:
    case ErrorCode::UnknownAttribute:
      return 3;
    default:
      return 4;
  }
}

struct LoadedInputs {
  Taxonomy taxonomy;
  std::vector<Product> corpus;
};

LoadedInputs load_inputs(const PipelineConfig& config) {
  LoadedInputs in{Taxonomy::load(config.taxonomy_file()), {}};
  in.corpus = ingest_products(config.corpus_file(), in.taxonomy);
  return in;
}

io::Json stats_json(const CorpusStats& stats) {
  io::Json obj;
  obj["products"] = stats.product_count;
  obj["pa_pairs"] = stats.pa_pair_count;
  obj["null_pairs"] = stats.null_pair_count;
  return obj;
}

int cmd_synth(const PipelineConfig& config) {
  SynthParams params = config.synth;
  params.seed = config.seed;
  const SynthOutput data = synthesize(params);

  data.taxonomy.save(config.taxonomy_file());
  save_products(config.corpus_file(), data.corpus);
  save_products(config.pool_file(), data.pool);

  const CorpusStats corpus = corpus_stats(data.corpus);
  const CorpusStats pool = corpus_stats(data.pool);

  ManifestInputs manifest;
  manifest.command = "synth";
  manifest.components = {{"synthesizer", "seeded-mt19937_64"}};
  manifest.outputs = {config.taxonomy_file(), config.corpus_file(),
                      config.pool_file()};
  manifest.extra["taxonomy_triples"] = data.taxonomy.triple_count();
  manifest.extra["corpus"] = stats_json(corpus);
  manifest.extra["pool"] = stats_json(pool);
  write_manifest(config, manifest);

  std::cout << "synth: " << data.taxonomy.categories().size() << " categories, "
            << data.taxonomy.triple_count() << " taxonomy values, "
            << corpus.product_count << " products (" << corpus.pa_pair_count
            << " PA pairs, " << corpus.null_pair_count << " null), pool "
            << pool.product_count << " -> " << config.out.generic_string() << "\n";
  return 0;
}

int cmd_ingest(const PipelineConfig& config, const std::string& input,
               const std::string& pool_input) {
  const Taxonomy taxonomy = Taxonomy::load(config.taxonomy_file());
  const std::vector<Product> products = ingest_products(input, taxonomy);
  save_products(config.corpus_file(), products);
  const CorpusStats stats = corpus_stats(products);

  ManifestInputs manifest;
  manifest.command = "ingest";
  manifest.inputs = {config.taxonomy_file(), input};
  manifest.outputs = {config.corpus_file()};
  manifest.extra["corpus"] = stats_json(stats);

  if (!pool_input.empty()) {
    const std::vector<Product> pool = ingest_products(pool_input, taxonomy);
    save_products(config.pool_file(), pool);
    manifest.inputs.push_back(pool_input);
    manifest.outputs.push_back(config.pool_file());
    manifest.extra["pool"] = stats_json(corpus_stats(pool));
  }
  write_manifest(config, manifest);

  std::cout << "ingest: " << stats.product_count << " products, "
            << stats.pa_pair_count << " PA pairs (" << stats.null_pair_count
            << " null) -> " << config.corpus_file().generic_string() << "\n";
  return 0;
}

int cmd_index(const PipelineConfig& config) {
  const Taxonomy taxonomy = Taxonomy::load(config.taxonomy_file());
  const std::vector<Product> pool = ingest_products(config.pool_file(), taxonomy);
  const auto encoder = make_encoder(config.encoder);

  const ValueIndex values = ValueIndex::build(taxonomy, *encoder);
  values.save(config.value_index_file());
  const ProductIndex products = ProductIndex::build(pool, *encoder);
  products.save(config.product_index_file());

  ManifestInputs manifest;
  manifest.command = "index";
  manifest.components = {{"encoder", encoder->identity()}};
  manifest.inputs = {config.taxonomy_file(), config.pool_file()};
  manifest.outputs = {config.value_index_file(), config.product_index_file()};
  manifest.extra["value_entries"] = values.size();
  manifest.extra["pool_entries"] = products.size();
  write_manifest(config, manifest);

  std::cout << "index: " << values.size() << " value entries, " << products.size()
            << " pool products -> " << config.out.generic_string() << "\n";
  return 0;
}

int cmd_retrieve(const PipelineConfig& config) {
  const LoadedInputs in = load_inputs(config);
  const auto encoder = make_encoder(config.encoder);
  const ValueIndex values = ValueIndex::load(config.value_index_file(), *encoder);
  const ProductIndex products =
      ProductIndex::load(config.product_index_file(), *encoder, in.taxonomy);

  const std::vector<TraceRecord> traces =
      run_retrieve(in.taxonomy, in.corpus, values, products, *encoder, config.k,
                   config.m, config.concurrency);
  write_traces(config.retrievals_file(), traces, /*include_completion=*/false);

  ManifestInputs manifest;
  manifest.command = "retrieve";
  manifest.components = {{"encoder", encoder->identity()}};
  manifest.inputs = {config.taxonomy_file(), config.corpus_file(),
                     config.value_index_file(), config.product_index_file()};
  manifest.outputs = {config.retrievals_file()};
  manifest.extra["k"] = config.k;
  manifest.extra["m"] = config.m;
  write_manifest(config, manifest);

  std::cout << "retrieve: " << traces.size() << " products (k=" << config.k
            << ", m=" << config.m << ") -> "
            << config.retrievals_file().generic_string() << "\n";
  return 0;
}

int cmd_predict(const PipelineConfig& config) {
  const LoadedInputs in = load_inputs(config);
  const auto encoder = make_encoder(config.encoder);
  const ValueIndex values = ValueIndex::load(config.value_index_file(), *encoder);
  const ProductIndex products =
      ProductIndex::load(config.product_index_file(), *encoder, in.taxonomy);
  const PromptTemplate tpl = config.prompt_template();
  const auto generator = make_generator(config.generator, in.corpus);

  const PredictResult result =
      run_predict(in.taxonomy, in.corpus, values, products, *encoder, *generator, tpl,
                  config.k, config.m, config.concurrency);
  write_predictions(config.predictions_file(), result.predictions,
                    config.traces_file().filename().generic_string());
  write_traces(config.traces_file(), result.traces, /*include_completion=*/true);

  ManifestInputs manifest;
  manifest.command = "predict";
  manifest.components = {{"encoder", encoder->identity()},
                         {"generator", generator->identity()},
                         {"template", tpl.version}};
  manifest.inputs = {config.taxonomy_file(), config.corpus_file(),
                     config.value_index_file(), config.product_index_file()};
  manifest.outputs = {config.predictions_file(), config.traces_file()};
  manifest.extra["k"] = config.k;
  manifest.extra["m"] = config.m;
  write_manifest(config, manifest);

  std::cout << "predict: " << result.predictions.size() << " products (k=" << config.k
            << ", m=" << config.m << ", generator=" << generator->identity()
            << ") -> " << config.predictions_file().generic_string() << "\n";
  return 0;
}

int cmd_evaluate(const PipelineConfig& config) {
  const LoadedInputs in = load_inputs(config);
  const std::vector<Prediction> predictions =
      read_predictions(config.predictions_file());
  const std::vector<TraceRecord> traces = read_traces(config.traces_file());

  const std::vector<EvalInstance> instances =
      make_instances(in.corpus, predictions, traces);
  const EvalReport report = build_report(instances);

  const std::string manifest_name =
      config.manifest_file("evaluate").filename().generic_string();
  io::atomic_write(config.report_file(),
                   report_to_json(report, manifest_name).dump(2) + "\n");

  ManifestInputs manifest;
  manifest.command = "evaluate";
  manifest.inputs = {config.taxonomy_file(), config.corpus_file(),
                     config.predictions_file(), config.traces_file()};
  manifest.outputs = {config.report_file()};
  manifest.extra["instances"] = report.instance_count;
  write_manifest(config, manifest);

  std::cout << "evaluate: " << report.instance_count << " instances"
            << " precision=" << report.precision << " recall=" << report.recall
            << " f1=" << report.f1 << " coverage=" << report.coverage << " -> "
            << config.report_file().generic_string() << "\n";
  return 0;
}

int cmd_sweep(const PipelineConfig& config) {
  const LoadedInputs in = load_inputs(config);
  const auto encoder = make_encoder(config.encoder);
  const ValueIndex values = ValueIndex::load(config.value_index_file(), *encoder);
  const ProductIndex products =
      ProductIndex::load(config.product_index_file(), *encoder, in.taxonomy);
  const PromptTemplate tpl = config.prompt_template();
  const auto generator = make_generator(config.generator, in.corpus);

  const std::vector<std::size_t> swept =
      resolve_sweep_values(config.sweep, in.taxonomy);
  const std::vector<SweepPoint> points =
      run_sweep(in.taxonomy, in.corpus, values, products, *encoder, *generator, tpl,
                config, swept);

  io::atomic_write(config.sweep_csv_file(), sweep_csv(points));
  const std::string manifest_name =
      config.manifest_file("sweep").filename().generic_string();
  io::Json sweep_obj;
  sweep_obj["manifest"] = manifest_name;
  sweep_obj["param"] = config.sweep.param;
  io::Json rows = io::Json::array();
  for (const SweepPoint& p : points) {
    io::Json row;
    row["param"] = p.param;
    row["coverage"] = p.coverage;
    row["precision"] = p.precision;
    row["recall"] = p.recall;
    row["f1"] = p.f1;
    rows.push_back(std::move(row));
  }
  sweep_obj["points"] = std::move(rows);
  io::atomic_write(config.sweep_json_file(), sweep_obj.dump(2) + "\n");

  ManifestInputs manifest;
  manifest.command = "sweep";
  manifest.components = {{"encoder", encoder->identity()},
                         {"generator", generator->identity()},
                         {"template", tpl.version}};
  manifest.inputs = {config.taxonomy_file(), config.corpus_file(),
                     config.value_index_file(), config.product_index_file()};
  manifest.outputs = {config.sweep_csv_file(), config.sweep_json_file()};
  manifest.extra["param"] = config.sweep.param;
  manifest.extra["values"] = swept;
  write_manifest(config, manifest);

  std::cout << "sweep: " << config.sweep.param << " over " << points.size()
            << " values -> " << config.sweep_csv_file().generic_string() << "\n";
  return 0;
}

int cmd_export_sft(const PipelineConfig& config) {
  const LoadedInputs in = load_inputs(config);
  const auto encoder = make_encoder(config.encoder);
  const ValueIndex values = ValueIndex::load(config.value_index_file(), *encoder);
  const ProductIndex products =
      ProductIndex::load(config.product_index_file(), *encoder, in.taxonomy);
  const PromptTemplate tpl = config.prompt_template();

  const SftExport result =
      run_export_sft(in.taxonomy, in.corpus, values, products, *encoder, tpl,
                     config.k, config.m, config.ood_ratio);
  write_sft_records(config.sft_file(), result.records);

  ManifestInputs manifest;
  manifest.command = "export-sft";
  manifest.components = {{"encoder", encoder->identity()},
                         {"template", tpl.version}};
  manifest.inputs = {config.taxonomy_file(), config.corpus_file(),
                     config.value_index_file(), config.product_index_file()};
  manifest.outputs = {config.sft_file()};
  manifest.extra["records"] = result.records.size();
  manifest.extra["ood_emitted"] = result.ood_emitted;
  manifest.extra["ood_ineligible"] = result.ood_ineligible;
  manifest.extra["skipped_no_labels"] = result.skipped_no_labels;
  write_manifest(config, manifest);

  std::cout << "export-sft: " << result.records.size() << " records ("
            << result.ood_emitted << " OOD) -> "
            << config.sft_file().generic_string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Retrieval-augmented product attribute value identification"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::size_t k_override = 0;
  std::size_t m_override = 0;
  std::string generator_override;
  std::string encoder_override;
  std::string out_override;
  std::uint64_t seed_override = 0;

  app.add_option("--config", config_path, "Pipeline config file (JSON)");
  app.add_option("--k", k_override, "Candidate values per attribute");
  app.add_option("--m", m_override, "Few-shot reference products");
  app.add_option("--generator", generator_override,
                 "Generator kind: mock-oracle | mock-heuristic | remote");
  app.add_option("--encoder", encoder_override, "Encoder kind: builtin | remote");
  app.add_option("--out", out_override, "Output directory");
  app.add_option("--seed", seed_override, "Synthetic-data seed");

  CLI::App* synth = app.add_subcommand("synth", "Generate a seeded synthetic taxonomy and corpus");
  CLI::App* ingest = app.add_subcommand("ingest", "Validate and canonicalize a product file");
  std::string ingest_input;
  std::string ingest_pool_input;
  ingest->add_option("--input", ingest_input, "Raw product file (JSON lines)")
      ->required();
  ingest->add_option("--pool-input", ingest_pool_input,
                     "Raw retrieval-pool product file (JSON lines)");
  CLI::App* index = app.add_subcommand("index", "Build value and product indexes");
  CLI::App* retrieve =
      app.add_subcommand("retrieve", "Write candidate values and reference products per query");
  CLI::App* predict = app.add_subcommand("predict", "Run retrieval, prompting, and generation");
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  CLI::App* sweep = app.add_subcommand("sweep", "Re-run the pipeline across k or m values");
  std::string sweep_param;
  std::vector<std::string> sweep_values;
  sweep->add_option("--param", sweep_param, "Swept parameter: k | m");
  sweep->add_option("--values", sweep_values,
                    "Ascending swept values; \"all\" covers the largest partition (k only)")
      ->delimiter(',');
  CLI::App* export_sft =
      app.add_subcommand("export-sft", "Export fine-tuning records with loss-mask boundaries");
  double ood_ratio_override = -1.0;
  export_sft->add_option("--ood-ratio", ood_ratio_override,
                         "Extra out-of-distribution records per exported product [0,1]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    PipelineConfig config;
    if (!config_path.empty()) config = PipelineConfig::load(config_path);
    if (app.count("--k") > 0) config.k = k_override;
    if (app.count("--m") > 0) config.m = m_override;
    if (app.count("--generator") > 0) config.generator.kind = generator_override;
    if (app.count("--encoder") > 0) config.encoder.kind = encoder_override;
    if (app.count("--out") > 0) config.out = out_override;
    if (app.count("--seed") > 0) config.seed = seed_override;
    if (!sweep_param.empty()) config.sweep.param = sweep_param;
    if (!sweep_values.empty()) config.sweep.values = sweep_values;
    if (ood_ratio_override >= 0.0) config.ood_ratio = ood_ratio_override;
    config.validate();

    std::filesystem::create_directories(config.out);

    if (app.got_subcommand(synth)) return cmd_synth(config);
    if (app.got_subcommand(ingest)) return cmd_ingest(config, ingest_input, ingest_pool_input);
    if (app.got_subcommand(index)) return cmd_index(config);
    if (app.got_subcommand(retrieve)) return cmd_retrieve(config);
    if (app.got_subcommand(predict)) return cmd_predict(config);
    if (app.got_subcommand(evaluate)) return cmd_evaluate(config);
    if (app.got_subcommand(sweep)) return cmd_sweep(config);
    if (app.got_subcommand(export_sft)) return cmd_export_sft(config);
    std::cerr << "error[config]: no command selected\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error[" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
