#include "mvprag/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <unordered_map>

#include "mvprag/error.hpp"
#include "mvprag/text.hpp"

namespace mvprag {

namespace {

constexpr const char* kToolName = "mvprag";
constexpr const char* kToolVersion = "0.1.0";
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_keys(const io::Json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) {
      raise(ErrorCode::Config, where + ": unknown config key '" + key + "'");
    }
  }
}

std::uint64_t get_u64(const io::Json& obj, const char* key, std::uint64_t fallback,
                      const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const io::Json& v = obj[key];
  // Accept any non-negative integer: nlohmann parses small literals as
  // unsigned but our own to_json emits int fields as signed.
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(v.get<std::int64_t>());
  }
  raise(ErrorCode::Config,
        where + ": '" + std::string(key) + "' must be a non-negative integer");
}

double get_double(const io::Json& obj, const char* key, double fallback,
                  const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const io::Json& v = obj[key];
  if (!v.is_number()) {
    raise(ErrorCode::Config, where + ": '" + std::string(key) + "' must be a number");
  }
  return v.get<double>();
}

std::string get_string(const io::Json& obj, const char* key, std::string fallback,
                       const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const io::Json& v = obj[key];
  if (!v.is_string()) {
    raise(ErrorCode::Config, where + ": '" + std::string(key) + "' must be a string");
  }
  return v.get<std::string>();
}

EmbeddingEndpoint embedding_endpoint_from_json(const io::Json& obj,
                                               const std::string& where) {
  check_keys(obj,
             {"url", "model", "auth_env", "timeout_ms", "max_batch", "max_attempts",
              "retry_base_ms", "max_in_flight", "dim"},
             where);
  EmbeddingEndpoint e;
  e.url = get_string(obj, "url", e.url, where);
  e.model = get_string(obj, "model", e.model, where);
  e.auth_env = get_string(obj, "auth_env", e.auth_env, where);
  e.timeout_ms = static_cast<int>(get_u64(obj, "timeout_ms", e.timeout_ms, where));
  e.max_batch = static_cast<int>(get_u64(obj, "max_batch", e.max_batch, where));
  e.max_attempts = static_cast<int>(get_u64(obj, "max_attempts", e.max_attempts, where));
  e.retry_base_ms =
      static_cast<int>(get_u64(obj, "retry_base_ms", e.retry_base_ms, where));
  e.max_in_flight =
      static_cast<int>(get_u64(obj, "max_in_flight", e.max_in_flight, where));
  if (obj.contains("dim")) {
    e.dim = static_cast<std::size_t>(get_u64(obj, "dim", 0, where));
  }
  return e;
}

io::Json embedding_endpoint_to_json(const EmbeddingEndpoint& e) {
  io::Json obj;
  obj["url"] = e.url;
  obj["model"] = e.model;
  obj["auth_env"] = e.auth_env;
  obj["timeout_ms"] = e.timeout_ms;
  obj["max_batch"] = e.max_batch;
  obj["max_attempts"] = e.max_attempts;
  obj["retry_base_ms"] = e.retry_base_ms;
  obj["max_in_flight"] = e.max_in_flight;
  if (e.dim.has_value()) obj["dim"] = *e.dim;
  return obj;
}

GeneratorEndpoint generator_endpoint_from_json(const io::Json& obj,
                                               const std::string& where) {
  check_keys(obj,
             {"url", "model", "auth_env", "temperature", "max_tokens",
              "max_prompt_chars", "timeout_ms", "max_attempts", "retry_base_ms"},
             where);
  GeneratorEndpoint e;
  e.url = get_string(obj, "url", e.url, where);
  e.model = get_string(obj, "model", e.model, where);
  e.auth_env = get_string(obj, "auth_env", e.auth_env, where);
  e.temperature = get_double(obj, "temperature", e.temperature, where);
  e.max_tokens = static_cast<int>(get_u64(obj, "max_tokens", e.max_tokens, where));
  e.max_prompt_chars = static_cast<std::size_t>(
      get_u64(obj, "max_prompt_chars", e.max_prompt_chars, where));
  e.timeout_ms = static_cast<int>(get_u64(obj, "timeout_ms", e.timeout_ms, where));
  e.max_attempts = static_cast<int>(get_u64(obj, "max_attempts", e.max_attempts, where));
  e.retry_base_ms =
      static_cast<int>(get_u64(obj, "retry_base_ms", e.retry_base_ms, where));
  return e;
}

io::Json generator_endpoint_to_json(const GeneratorEndpoint& e) {
  io::Json obj;
  obj["url"] = e.url;
  obj["model"] = e.model;
  obj["auth_env"] = e.auth_env;
  obj["temperature"] = e.temperature;
  obj["max_tokens"] = e.max_tokens;
  obj["max_prompt_chars"] = e.max_prompt_chars;
  obj["timeout_ms"] = e.timeout_ms;
  obj["max_attempts"] = e.max_attempts;
  obj["retry_base_ms"] = e.retry_base_ms;
  return obj;
}

bool digits_only(const std::string& s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

void check_fraction(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    raise(ErrorCode::Config, std::string(name) + " must be within [0, 1]");
  }
}

const char* outcome_token(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::Value: return "value";
    case OutcomeKind::Null: return "null";
    case OutcomeKind::Unknown: return "unknown";
  }
  return "unknown";
}

OutcomeKind outcome_from_token(const std::string& token, const std::string& where) {
  if (token == "value") return OutcomeKind::Value;
  if (token == "null") return OutcomeKind::Null;
  if (token == "unknown") return OutcomeKind::Unknown;
  raise(ErrorCode::Parse, where + ": unknown outcome token '" + token + "'");
}

io::Json score_to_json(double score) {
  // JSON has no infinity; the null-marker sentinel round-trips as null.
  if (std::isinf(score)) return nullptr;
  return score;
}

double score_from_json(const io::Json& v, const std::string& where) {
  if (v.is_null()) return kNegInf;
  if (!v.is_number()) raise(ErrorCode::Parse, where + ": score must be a number");
  return v.get<double>();
}

io::Json diagnostics_to_json(const ParseDiagnostics& d) {
  io::Json obj;
  obj["unparsed_lines"] = d.unparsed_lines;
  obj["unmatched_attributes"] = d.unmatched_attributes;
  obj["duplicate_lines"] = d.duplicate_lines;
  obj["empty_values"] = d.empty_values;
  return obj;
}

ParseDiagnostics diagnostics_from_json(const io::Json& obj, const std::string& where) {
  ParseDiagnostics d;
  d.unparsed_lines = get_u64(obj, "unparsed_lines", 0, where);
  d.unmatched_attributes = get_u64(obj, "unmatched_attributes", 0, where);
  d.duplicate_lines = get_u64(obj, "duplicate_lines", 0, where);
  d.empty_values = get_u64(obj, "empty_values", 0, where);
  return d;
}

// Work-stealing-free parallel loop: workers pull indices from a shared
// counter; the first exception cancels the remaining work and is rethrown on
// the calling thread.
void parallel_for(std::size_t n, std::size_t workers,
                  const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::exception_ptr first_error;

  auto work = [&]() {
    while (!failed.load(std::memory_order_relaxed)) {
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

[[noreturn]] void stage_error(const Error& e, const std::string& product_id,
                              const char* stage) {
  raise(e.code(), "product '" + product_id + "' stage " + stage + ": " + e.what());
}

struct ProductContext {
  std::string query;
  std::vector<CandidateSet> candidates;  // schema order
  std::vector<FewShotExample> shots;
};

ProductContext retrieve_context(const Product& p, const Taxonomy& taxonomy,
                                const ValueIndex& values, const ProductIndex& products,
                                const Encoder& encoder, std::size_t k, std::size_t m) {
  ProductContext ctx;
  ctx.query = render_query(p);
  try {
    for (const std::string& attribute : taxonomy.attribute_set(p.category)) {
      ctx.candidates.push_back(
          retrieve_values(ctx.query, p.category, attribute, k, values, encoder));
    }
  } catch (const Error& e) {
    stage_error(e, p.id, "retrieve_values");
  }
  try {
    ctx.shots = retrieve_products(ctx.query, p.category, m, products, encoder, p.id,
                                  taxonomy);
  } catch (const Error& e) {
    stage_error(e, p.id, "retrieve_products");
  }
  return ctx;
}

TraceRecord trace_from_context(const Product& p, const ProductContext& ctx) {
  TraceRecord trace;
  trace.product_id = p.id;
  trace.category = p.category;
  trace.query = ctx.query;
  for (const CandidateSet& cs : ctx.candidates) {
    trace.candidates.emplace_back(cs.attribute, cs.candidates);
  }
  for (const FewShotExample& shot : ctx.shots) {
    trace.shots.emplace_back(shot.product.id, shot.score);
  }
  return trace;
}

}  // namespace

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::string content;
  try {
    content = io::read_file(path);
  } catch (const Error& e) {
    raise(ErrorCode::Config, e.what());
  }
  io::Json obj = io::Json::parse(content, nullptr, false);
  if (obj.is_discarded()) {
    raise(ErrorCode::Config, path.string() + ": invalid config JSON");
  }
  return from_json(obj, path.string());
}

PipelineConfig PipelineConfig::from_json(const io::Json& obj, const std::string& where) {
  if (!obj.is_object()) {
    raise(ErrorCode::Config, where + ": config must be a JSON object");
  }
  check_keys(obj,
             {"out", "taxonomy", "corpus", "pool", "template", "k", "m", "concurrency",
              "seed", "ood_ratio", "encoder", "generator", "synth", "sweep"},
             where);
  PipelineConfig config;
  config.out = get_string(obj, "out", config.out.generic_string(), where);
  config.taxonomy_path = get_string(obj, "taxonomy", "", where);
  config.corpus_path = get_string(obj, "corpus", "", where);
  config.pool_path = get_string(obj, "pool", "", where);
  config.template_path = get_string(obj, "template", "", where);
  config.k = static_cast<std::size_t>(get_u64(obj, "k", config.k, where));
  config.m = static_cast<std::size_t>(get_u64(obj, "m", config.m, where));
  config.concurrency =
      static_cast<std::size_t>(get_u64(obj, "concurrency", config.concurrency, where));
  config.seed = get_u64(obj, "seed", config.seed, where);
  config.ood_ratio = get_double(obj, "ood_ratio", config.ood_ratio, where);

  if (obj.contains("encoder")) {
    const io::Json& enc = obj["encoder"];
    const std::string enc_where = where + ": encoder";
    check_keys(enc, {"kind", "dim", "endpoint"}, enc_where);
    config.encoder.kind = get_string(enc, "kind", config.encoder.kind, enc_where);
    config.encoder.dim =
        static_cast<std::size_t>(get_u64(enc, "dim", config.encoder.dim, enc_where));
    if (enc.contains("endpoint")) {
      config.encoder.endpoint =
          embedding_endpoint_from_json(enc["endpoint"], enc_where + " endpoint");
    }
  }
  if (obj.contains("generator")) {
    const io::Json& gen = obj["generator"];
    const std::string gen_where = where + ": generator";
    check_keys(gen, {"kind", "endpoint"}, gen_where);
    config.generator.kind = get_string(gen, "kind", config.generator.kind, gen_where);
    if (gen.contains("endpoint")) {
      config.generator.endpoint =
          generator_endpoint_from_json(gen["endpoint"], gen_where + " endpoint");
    }
  }
  if (obj.contains("synth")) {
    const io::Json& synth = obj["synth"];
    const std::string synth_where = where + ": synth";
    check_keys(synth,
               {"categories", "attributes_per_category", "values_per_attribute",
                "products", "pool_products", "ood_fraction", "null_fraction",
                "unannotated_fraction", "multi_value_fraction", "noise_words"},
               synth_where);
    SynthParams& p = config.synth;
    p.categories =
        static_cast<std::size_t>(get_u64(synth, "categories", p.categories, synth_where));
    p.attributes_per_category = static_cast<std::size_t>(get_u64(
        synth, "attributes_per_category", p.attributes_per_category, synth_where));
    p.values_per_attribute = static_cast<std::size_t>(
        get_u64(synth, "values_per_attribute", p.values_per_attribute, synth_where));
    p.products =
        static_cast<std::size_t>(get_u64(synth, "products", p.products, synth_where));
    p.pool_products = static_cast<std::size_t>(
        get_u64(synth, "pool_products", p.pool_products, synth_where));
    p.ood_fraction = get_double(synth, "ood_fraction", p.ood_fraction, synth_where);
    p.null_fraction = get_double(synth, "null_fraction", p.null_fraction, synth_where);
    p.unannotated_fraction =
        get_double(synth, "unannotated_fraction", p.unannotated_fraction, synth_where);
    p.multi_value_fraction =
        get_double(synth, "multi_value_fraction", p.multi_value_fraction, synth_where);
    p.noise_words =
        static_cast<std::size_t>(get_u64(synth, "noise_words", p.noise_words, synth_where));
  }
  if (obj.contains("sweep")) {
    const io::Json& sweep = obj["sweep"];
    const std::string sweep_where = where + ": sweep";
    check_keys(sweep, {"param", "values"}, sweep_where);
    config.sweep.param = get_string(sweep, "param", config.sweep.param, sweep_where);
    if (sweep.contains("values")) {
      if (!sweep["values"].is_array()) {
        raise(ErrorCode::Config, sweep_where + ": 'values' must be an array");
      }
      config.sweep.values.clear();
      for (const io::Json& v : sweep["values"]) {
        if (v.is_number_unsigned()) {
          config.sweep.values.push_back(std::to_string(v.get<std::uint64_t>()));
        } else if (v.is_string()) {
          config.sweep.values.push_back(v.get<std::string>());
        } else {
          raise(ErrorCode::Config,
                sweep_where + ": values must be non-negative integers or \"all\"");
        }
      }
    }
  }
  config.validate();
  return config;
}

io::Json PipelineConfig::to_json() const {
  io::Json obj;
  obj["out"] = out.generic_string();
  obj["taxonomy"] = taxonomy_path.generic_string();
  obj["corpus"] = corpus_path.generic_string();
  obj["pool"] = pool_path.generic_string();
  obj["template"] = template_path.generic_string();
  obj["k"] = k;
  obj["m"] = m;
  obj["concurrency"] = concurrency;
  obj["seed"] = seed;
  obj["ood_ratio"] = ood_ratio;
  io::Json enc;
  enc["kind"] = encoder.kind;
  enc["dim"] = encoder.dim;
  enc["endpoint"] = embedding_endpoint_to_json(encoder.endpoint);
  obj["encoder"] = std::move(enc);
  io::Json gen;
  gen["kind"] = generator.kind;
  gen["endpoint"] = generator_endpoint_to_json(generator.endpoint);
  obj["generator"] = std::move(gen);
  io::Json synth_obj;
  synth_obj["categories"] = synth.categories;
  synth_obj["attributes_per_category"] = synth.attributes_per_category;
  synth_obj["values_per_attribute"] = synth.values_per_attribute;
  synth_obj["products"] = synth.products;
  synth_obj["pool_products"] = synth.pool_products;
  synth_obj["ood_fraction"] = synth.ood_fraction;
  synth_obj["null_fraction"] = synth.null_fraction;
  synth_obj["unannotated_fraction"] = synth.unannotated_fraction;
  synth_obj["multi_value_fraction"] = synth.multi_value_fraction;
  synth_obj["noise_words"] = synth.noise_words;
  obj["synth"] = std::move(synth_obj);
  io::Json sweep_obj;
  sweep_obj["param"] = sweep.param;
  sweep_obj["values"] = sweep.values;
  obj["sweep"] = std::move(sweep_obj);
  return obj;
}

std::string PipelineConfig::config_hash() const {
  return "fnv1a64:" + text::fnv1a64_hex(to_json().dump());
}

void PipelineConfig::validate() const {
  if (out.empty()) raise(ErrorCode::Config, "output directory must not be empty");
  if (k < 1) raise(ErrorCode::Config, "k must be >= 1");
  if (concurrency < 1) raise(ErrorCode::Config, "concurrency must be >= 1");

  if (encoder.kind == "builtin") {
    if (encoder.dim < 1) raise(ErrorCode::Config, "encoder dim must be >= 1");
  } else if (encoder.kind == "remote") {
    if (encoder.endpoint.url.empty() || encoder.endpoint.model.empty() ||
        encoder.endpoint.auth_env.empty()) {
      raise(ErrorCode::Config,
            "remote encoder requires endpoint url, model, and auth_env");
    }
  } else {
    raise(ErrorCode::Config, "unknown encoder kind '" + encoder.kind +
                                 "' (expected builtin or remote)");
  }

  if (generator.kind == "remote") {
    if (generator.endpoint.url.empty() || generator.endpoint.model.empty() ||
        generator.endpoint.auth_env.empty()) {
      raise(ErrorCode::Config,
            "remote generator requires endpoint url, model, and auth_env");
    }
  } else if (generator.kind != "mock-oracle" && generator.kind != "mock-heuristic") {
    raise(ErrorCode::Config,
          "unknown generator kind '" + generator.kind +
              "' (expected mock-oracle, mock-heuristic, or remote)");
  }

  check_fraction(ood_ratio, "ood_ratio");
  check_fraction(synth.ood_fraction, "synth.ood_fraction");
  check_fraction(synth.null_fraction, "synth.null_fraction");
  check_fraction(synth.unannotated_fraction, "synth.unannotated_fraction");
  check_fraction(synth.multi_value_fraction, "synth.multi_value_fraction");

  if (sweep.param != "k" && sweep.param != "m") {
    raise(ErrorCode::Config, "sweep param must be 'k' or 'm'");
  }
  if (sweep.values.empty()) {
    raise(ErrorCode::Config, "sweep values must not be empty");
  }
  for (const std::string& token : sweep.values) {
    if (token == "all") {
      if (sweep.param != "k") {
        raise(ErrorCode::Config, "sweep value \"all\" is only defined for param k");
      }
    } else if (!digits_only(token)) {
      raise(ErrorCode::Config, "invalid sweep value '" + token + "'");
    }
  }
}

std::filesystem::path PipelineConfig::taxonomy_file() const {
  return taxonomy_path.empty() ? out / "taxonomy.jsonl" : taxonomy_path;
}
std::filesystem::path PipelineConfig::corpus_file() const {
  return corpus_path.empty() ? out / "corpus.jsonl" : corpus_path;
}
std::filesystem::path PipelineConfig::pool_file() const {
  return pool_path.empty() ? out / "pool.jsonl" : pool_path;
}
std::filesystem::path PipelineConfig::value_index_file() const {
  return out / "value_index.jsonl";
}
std::filesystem::path PipelineConfig::product_index_file() const {
  return out / "product_index.jsonl";
}
std::filesystem::path PipelineConfig::retrievals_file() const {
  return out / "retrievals.jsonl";
}
std::filesystem::path PipelineConfig::predictions_file() const {
  return out / "predictions.jsonl";
}
std::filesystem::path PipelineConfig::traces_file() const {
  return out / "traces.jsonl";
}
std::filesystem::path PipelineConfig::report_file() const {
  return out / "report.json";
}
std::filesystem::path PipelineConfig::sweep_csv_file() const {
  return out / "sweep.csv";
}
std::filesystem::path PipelineConfig::sweep_json_file() const {
  return out / "sweep.json";
}
std::filesystem::path PipelineConfig::sft_file() const { return out / "sft.jsonl"; }
std::filesystem::path PipelineConfig::manifest_file(const std::string& command) const {
  return out / ("manifest-" + command + ".json");
}

PromptTemplate PipelineConfig::prompt_template() const {
  if (template_path.empty()) return PromptTemplate::builtin();
  return PromptTemplate::load(template_path);
}

std::unique_ptr<Encoder> make_encoder(const EncoderConfig& config) {
  if (config.kind == "builtin") {
    return std::make_unique<HashedNgramEncoder>(config.dim);
  }
  if (config.kind == "remote") {
    return std::make_unique<RemoteEncoder>(config.endpoint);
  }
  raise(ErrorCode::Config, "unknown encoder kind '" + config.kind + "'");
}

std::unique_ptr<Generator> make_generator(const GeneratorConfig& config,
                                          const std::vector<Product>& corpus) {
  if (config.kind == "mock-oracle") {
    return std::make_unique<MockGenerator>(MockGenerator::Mode::Oracle, corpus);
  }
  if (config.kind == "mock-heuristic") {
    return std::make_unique<MockGenerator>(MockGenerator::Mode::Heuristic, corpus);
  }
  if (config.kind == "remote") {
    return std::make_unique<RemoteGenerator>(config.endpoint);
  }
  raise(ErrorCode::Config, "unknown generator kind '" + config.kind + "'");
}

const std::vector<Candidate>* TraceRecord::find_candidates(
    const std::string& attribute) const {
  for (const auto& [attr, cands] : candidates) {
    if (attr == attribute) return &cands;
  }
  return nullptr;
}

PredictResult run_predict(const Taxonomy& taxonomy, const std::vector<Product>& corpus,
                          const ValueIndex& values, const ProductIndex& products,
                          const Encoder& encoder, Generator& generator,
                          const PromptTemplate& tpl, std::size_t k, std::size_t m,
                          std::size_t concurrency) {
  PredictResult result;
  result.predictions.resize(corpus.size());
  result.traces.resize(corpus.size());

  parallel_for(corpus.size(), concurrency, [&](std::size_t i) {
    const Product& p = corpus[i];
    ProductContext ctx = retrieve_context(p, taxonomy, values, products, encoder, k, m);

    PromptBundle bundle;
    try {
      bundle = assemble_prompt(p, ctx.shots, ctx.candidates, taxonomy, tpl);
    } catch (const Error& e) {
      stage_error(e, p.id, "assemble_prompt");
    }

    std::string completion;
    try {
      completion = generator.generate(bundle);
    } catch (const Error& e) {
      stage_error(e, p.id, "generate");
    }

    Prediction prediction;
    try {
      prediction = parse_completion(completion, bundle.schema, taxonomy, p.category);
    } catch (const Error& e) {
      stage_error(e, p.id, "parse_completion");
    }
    prediction.product_id = p.id;

    TraceRecord trace = trace_from_context(p, ctx);
    trace.raw_completion = completion;
    trace.diagnostics = prediction.diagnostics;

    result.predictions[i] = std::move(prediction);
    result.traces[i] = std::move(trace);
  });
  return result;
}

std::vector<TraceRecord> run_retrieve(const Taxonomy& taxonomy,
                                      const std::vector<Product>& corpus,
                                      const ValueIndex& values,
                                      const ProductIndex& products,
                                      const Encoder& encoder, std::size_t k,
                                      std::size_t m, std::size_t concurrency) {
  std::vector<TraceRecord> traces(corpus.size());
  parallel_for(corpus.size(), concurrency, [&](std::size_t i) {
    const Product& p = corpus[i];
    ProductContext ctx = retrieve_context(p, taxonomy, values, products, encoder, k, m);
    traces[i] = trace_from_context(p, ctx);
  });
  return traces;
}

void write_predictions(const std::filesystem::path& path,
                       const std::vector<Prediction>& predictions,
                       const std::string& trace_file_name) {
  std::string out;
  for (const Prediction& prediction : predictions) {
    io::Json row;
    row["product_id"] = prediction.product_id;
    io::Json outcomes = io::Json::object();
    for (const auto& [attribute, outcome] : prediction.outcomes) {
      io::Json o;
      o["outcome"] = outcome_token(outcome.kind);
      if (outcome.kind == OutcomeKind::Value) {
        o["value"] = outcome.value;
        o["ood"] = outcome.ood;
      }
      outcomes[attribute] = std::move(o);
    }
    row["predictions"] = std::move(outcomes);
    row["trace_ref"] = trace_file_name + "#" + prediction.product_id;
    out += row.dump();
    out += '\n';
  }
  io::atomic_write(path, out);
}

std::vector<Prediction> read_predictions(const std::filesystem::path& path) {
  std::vector<Prediction> predictions;
  const std::vector<std::string> lines = io::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    io::Json row = io::parse_json_line(lines[i], path, i + 1);
    Prediction prediction;
    prediction.product_id = get_string(row, "product_id", "", where);
    prediction.trace_ref = get_string(row, "trace_ref", "", where);
    if (!row.contains("predictions") || !row["predictions"].is_object()) {
      raise(ErrorCode::Parse, where + ": missing predictions object");
    }
    for (const auto& [attribute, o] : row["predictions"].items()) {
      AttrOutcome outcome;
      outcome.kind = outcome_from_token(get_string(o, "outcome", "", where), where);
      if (outcome.kind == OutcomeKind::Value) {
        outcome.value = get_string(o, "value", "", where);
        outcome.ood = o.value("ood", false);
      }
      prediction.outcomes.emplace_back(attribute, std::move(outcome));
    }
    predictions.push_back(std::move(prediction));
  }
  return predictions;
}

void write_traces(const std::filesystem::path& path,
                  const std::vector<TraceRecord>& traces, bool include_completion) {
  std::string out;
  for (const TraceRecord& trace : traces) {
    io::Json row;
    row["product_id"] = trace.product_id;
    row["category"] = trace.category;
    row["query"] = trace.query;
    io::Json cands = io::Json::object();
    for (const auto& [attribute, list] : trace.candidates) {
      io::Json arr = io::Json::array();
      for (const Candidate& c : list) {
        arr.push_back(io::Json::array({c.value, score_to_json(c.score)}));
      }
      cands[attribute] = std::move(arr);
    }
    row["candidates"] = std::move(cands);
    io::Json shots = io::Json::array();
    for (const auto& [id, score] : trace.shots) {
      shots.push_back(io::Json::array({id, score_to_json(score)}));
    }
    row["shots"] = std::move(shots);
    if (include_completion) {
      row["completion"] = trace.raw_completion;
      row["diagnostics"] = diagnostics_to_json(trace.diagnostics);
    }
    out += row.dump();
    out += '\n';
  }
  io::atomic_write(path, out);
}

std::vector<TraceRecord> read_traces(const std::filesystem::path& path) {
  std::vector<TraceRecord> traces;
  const std::vector<std::string> lines = io::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    io::Json row = io::parse_json_line(lines[i], path, i + 1);
    TraceRecord trace;
    trace.product_id = get_string(row, "product_id", "", where);
    trace.category = get_string(row, "category", "", where);
    trace.query = get_string(row, "query", "", where);
    if (row.contains("candidates")) {
      for (const auto& [attribute, arr] : row["candidates"].items()) {
        std::vector<Candidate> list;
        for (const io::Json& pair : arr) {
          if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string()) {
            raise(ErrorCode::Parse, where + ": malformed candidate entry");
          }
          list.push_back(
              Candidate{pair[0].get<std::string>(), score_from_json(pair[1], where)});
        }
        trace.candidates.emplace_back(attribute, std::move(list));
      }
    }
    if (row.contains("shots")) {
      for (const io::Json& pair : row["shots"]) {
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_string()) {
          raise(ErrorCode::Parse, where + ": malformed shot entry");
        }
        trace.shots.emplace_back(pair[0].get<std::string>(),
                                 score_from_json(pair[1], where));
      }
    }
    trace.raw_completion = get_string(row, "completion", "", where);
    if (row.contains("diagnostics")) {
      trace.diagnostics = diagnostics_from_json(row["diagnostics"], where);
    }
    traces.push_back(std::move(trace));
  }
  return traces;
}

std::vector<EvalInstance> make_instances(const std::vector<Product>& corpus,
                                         const std::vector<Prediction>& predictions,
                                         const std::vector<TraceRecord>& traces) {
  std::unordered_map<std::string, const Prediction*> prediction_by_id;
  for (const Prediction& p : predictions) prediction_by_id[p.product_id] = &p;
  std::unordered_map<std::string, const TraceRecord*> trace_by_id;
  for (const TraceRecord& t : traces) trace_by_id[t.product_id] = &t;

  std::vector<EvalInstance> instances;
  for (const Product& p : corpus) {
    if (p.labels.empty()) continue;
    auto pred_it = prediction_by_id.find(p.id);
    if (pred_it == prediction_by_id.end()) {
      raise(ErrorCode::Validation, "no prediction for product '" + p.id + "'");
    }
    auto trace_it = trace_by_id.find(p.id);
    if (trace_it == trace_by_id.end()) {
      raise(ErrorCode::Validation, "no trace for product '" + p.id + "'");
    }
    for (const LabeledAttribute& label : p.labels) {
      EvalInstance inst;
      inst.product_id = p.id;
      inst.attribute = label.attribute;
      for (const LabelValue& lv : label.values) inst.ground_truth.push_back(lv.value);
      const AttrOutcome* outcome = pred_it->second->find(label.attribute);
      if (outcome == nullptr) {
        raise(ErrorCode::Validation, "prediction for product '" + p.id +
                                         "' lacks attribute '" + label.attribute + "'");
      }
      inst.outcome = *outcome;
      const std::vector<Candidate>* cands =
          trace_it->second->find_candidates(label.attribute);
      if (cands == nullptr) {
        raise(ErrorCode::Validation, "trace for product '" + p.id +
                                         "' lacks candidates for '" + label.attribute +
                                         "'");
      }
      for (const Candidate& c : *cands) inst.candidates.push_back(c.value);
      instances.push_back(std::move(inst));
    }
  }
  return instances;
}

io::Json report_to_json(const EvalReport& report, const std::string& manifest_name) {
  io::Json obj;
  obj["manifest"] = manifest_name;
  obj["instances"] = report.instance_count;
  obj["precision"] = report.precision;
  obj["recall"] = report.recall;
  obj["f1"] = report.f1;
  obj["coverage"] = report.coverage;
  io::Json counts;
  counts["tp"] = report.counts.tp;
  counts["fp"] = report.counts.fp;
  counts["fn"] = report.counts.fn;
  counts["tn"] = report.counts.tn;
  obj["counts"] = std::move(counts);
  io::Json cells;
  cells["tp"] = report.cells.tp;
  cells["fp_only"] = report.cells.fp_only;
  cells["fn_only"] = report.cells.fn_only;
  cells["tn"] = report.cells.tn;
  cells["mismatch"] = report.cells.mismatch;
  obj["cells"] = std::move(cells);
  io::Json diag;
  diag["null_predictions"] = report.diagnostics.null_predictions;
  diag["unknown_predictions"] = report.diagnostics.unknown_predictions;
  diag["ood_tp"] = report.diagnostics.ood_tp;
  diag["covered"] = report.diagnostics.covered;
  diag["nonempty_gt"] = report.diagnostics.nonempty_gt;
  obj["diagnostics"] = std::move(diag);
  obj["universe_hash"] = report.universe_hash;
  return obj;
}

EvalReport report_from_json(const io::Json& obj, const std::string& where) {
  EvalReport report;
  report.instance_count = get_u64(obj, "instances", 0, where);
  report.precision = get_double(obj, "precision", 0.0, where);
  report.recall = get_double(obj, "recall", 0.0, where);
  report.f1 = get_double(obj, "f1", 0.0, where);
  report.coverage = get_double(obj, "coverage", 0.0, where);
  if (obj.contains("counts")) {
    const io::Json& counts = obj["counts"];
    report.counts.tp = get_u64(counts, "tp", 0, where);
    report.counts.fp = get_u64(counts, "fp", 0, where);
    report.counts.fn = get_u64(counts, "fn", 0, where);
    report.counts.tn = get_u64(counts, "tn", 0, where);
  }
  if (obj.contains("cells")) {
    const io::Json& cells = obj["cells"];
    report.cells.tp = get_u64(cells, "tp", 0, where);
    report.cells.fp_only = get_u64(cells, "fp_only", 0, where);
    report.cells.fn_only = get_u64(cells, "fn_only", 0, where);
    report.cells.tn = get_u64(cells, "tn", 0, where);
    report.cells.mismatch = get_u64(cells, "mismatch", 0, where);
  }
  if (obj.contains("diagnostics")) {
    const io::Json& diag = obj["diagnostics"];
    report.diagnostics.null_predictions = get_u64(diag, "null_predictions", 0, where);
    report.diagnostics.unknown_predictions =
        get_u64(diag, "unknown_predictions", 0, where);
    report.diagnostics.ood_tp = get_u64(diag, "ood_tp", 0, where);
    report.diagnostics.covered = get_u64(diag, "covered", 0, where);
    report.diagnostics.nonempty_gt = get_u64(diag, "nonempty_gt", 0, where);
  }
  report.universe_hash = get_string(obj, "universe_hash", "", where);
  return report;
}

std::vector<std::size_t> resolve_sweep_values(const SweepConfig& sweep,
                                              const Taxonomy& taxonomy) {
  std::vector<std::size_t> resolved;
  for (const std::string& token : sweep.values) {
    std::size_t value = 0;
    if (token == "all") {
      if (sweep.param != "k") {
        raise(ErrorCode::Config, "sweep value \"all\" is only defined for param k");
      }
      value = taxonomy.max_partition_size();
    } else {
      const auto [ptr, ec] =
          std::from_chars(token.data(), token.data() + token.size(), value);
      if (ec != std::errc{} || ptr != token.data() + token.size()) {
        raise(ErrorCode::Config, "invalid sweep value '" + token + "'");
      }
    }
    if (sweep.param == "k" && value < 1) {
      raise(ErrorCode::Config, "swept k values must be >= 1");
    }
    // "all" may coincide with an explicit value; collapse the duplicate
    // instead of failing the ascending-order requirement.
    if (!resolved.empty() && value == resolved.back()) continue;
    if (!resolved.empty() && value < resolved.back()) {
      raise(ErrorCode::Config, "sweep values must be ascending");
    }
    resolved.push_back(value);
  }
  if (resolved.empty()) raise(ErrorCode::Config, "sweep values must not be empty");
  return resolved;
}

std::vector<SweepPoint> run_sweep(const Taxonomy& taxonomy,
                                  const std::vector<Product>& corpus,
                                  const ValueIndex& values,
                                  const ProductIndex& products, const Encoder& encoder,
                                  Generator& generator, const PromptTemplate& tpl,
                                  const PipelineConfig& config,
                                  const std::vector<std::size_t>& swept) {
  std::vector<SweepPoint> points;
  for (const std::size_t value : swept) {
    const std::size_t k = config.sweep.param == "k" ? value : config.k;
    const std::size_t m = config.sweep.param == "m" ? value : config.m;
    try {
      PredictResult run = run_predict(taxonomy, corpus, values, products, encoder,
                                      generator, tpl, k, m, config.concurrency);
      const EvalReport report =
          build_report(make_instances(corpus, run.predictions, run.traces));
      points.push_back(SweepPoint{value, report.coverage, report.precision,
                                  report.recall, report.f1});
    } catch (const Error& e) {
      raise(e.code(), "sweep " + config.sweep.param + "=" + std::to_string(value) +
                          ": " + e.what());
    }
  }
  return points;
}

SftExport run_export_sft(const Taxonomy& taxonomy, const std::vector<Product>& corpus,
                         const ValueIndex& values, const ProductIndex& products,
                         const Encoder& encoder, const PromptTemplate& tpl,
                         std::size_t k, std::size_t m, double ood_ratio) {
  SftExport result;
  double ood_budget = 0.0;
  for (const Product& p : corpus) {
    if (p.labels.empty()) {
      ++result.skipped_no_labels;
      continue;
    }
    ProductContext ctx = retrieve_context(p, taxonomy, values, products, encoder, k, m);
    PromptBundle bundle;
    try {
      bundle = assemble_prompt(p, ctx.shots, ctx.candidates, taxonomy, tpl);
    } catch (const Error& e) {
      stage_error(e, p.id, "assemble_prompt");
    }
    result.records.push_back(build_sft_record(p, bundle, taxonomy));

    // Deterministic thinning: each product contributes ood_ratio to the
    // budget; whole units are spent on extra OOD records. Ineligible
    // products keep the budget for the next eligible one.
    ood_budget += ood_ratio;
    if (ood_budget >= 1.0) {
      try {
        result.records.push_back(build_ood_sample(p, bundle, taxonomy, tpl));
        ++result.ood_emitted;
        ood_budget -= 1.0;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoEligibleAttribute) throw;
        ++result.ood_ineligible;
      }
    }
  }
  return result;
}

void write_sft_records(const std::filesystem::path& path,
                       const std::vector<SftRecord>& records) {
  std::string out;
  for (const SftRecord& record : records) {
    io::Json row;
    row["prompt"] = record.prompt;
    row["target"] = record.target;
    row["loss_mask_boundary"] = record.loss_mask_boundary;
    row["is_ood_sample"] = record.is_ood_sample;
    row["product_id"] = record.product_id;
    out += row.dump();
    out += '\n';
  }
  io::atomic_write(path, out);
}

std::vector<SftRecord> read_sft_records(const std::filesystem::path& path) {
  std::vector<SftRecord> records;
  const std::vector<std::string> lines = io::read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::trim(lines[i]).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1);
    io::Json row = io::parse_json_line(lines[i], path, i + 1);
    SftRecord record;
    record.prompt = get_string(row, "prompt", "", where);
    record.target = get_string(row, "target", "", where);
    record.loss_mask_boundary =
        static_cast<std::size_t>(get_u64(row, "loss_mask_boundary", 0, where));
    record.is_ood_sample = row.value("is_ood_sample", false);
    record.product_id = get_string(row, "product_id", "", where);
    records.push_back(std::move(record));
  }
  return records;
}

std::filesystem::path write_manifest(const PipelineConfig& config,
                                     const ManifestInputs& inputs) {
  io::Json manifest;
  manifest["tool"] = kToolName;
  manifest["version"] = kToolVersion;
  manifest["command"] = inputs.command;

  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", &utc);
  manifest["created_at"] = stamp;

  manifest["config_hash"] = config.config_hash();
  manifest["config"] = config.to_json();
  io::Json components = io::Json::object();
  for (const auto& [name, identity] : inputs.components) components[name] = identity;
  manifest["components"] = std::move(components);
  io::Json in = io::Json::object();
  for (const std::filesystem::path& path : inputs.inputs) {
    in[path.generic_string()] = io::file_hash(path);
  }
  manifest["inputs"] = std::move(in);
  io::Json outputs = io::Json::object();
  for (const std::filesystem::path& path : inputs.outputs) {
    outputs[path.generic_string()] = io::file_hash(path);
  }
  manifest["outputs"] = std::move(outputs);
  if (!inputs.extra.is_null()) manifest["details"] = inputs.extra;

  const std::filesystem::path path = config.manifest_file(inputs.command);
  io::atomic_write(path, manifest.dump(2) + "\n");
  return path;
}

}  // namespace mvprag
