// Python bindings for the pipeline's main operations: synthetic data,
// taxonomy/corpus handling, the deterministic encoder, both retrieval levels,
// prompt assembly, SFT export, mock generation, parsing, and evaluation.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "mvprag/corpus.hpp"
#include "mvprag/embedding.hpp"
#include "mvprag/error.hpp"
#include "mvprag/evaluation.hpp"
#include "mvprag/generation.hpp"
#include "mvprag/promptgen.hpp"
#include "mvprag/retrieval.hpp"
#include "mvprag/synth.hpp"
#include "mvprag/taxonomy.hpp"

namespace py = pybind11;
using namespace mvprag;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Retrieval-augmented product attribute value identification";

  py::register_exception<Error>(m, "PipelineError");

  m.attr("NULL_MARKER") = std::string(kNullMarker);

  py::class_<Taxonomy>(m, "Taxonomy")
      .def_static("load", &Taxonomy::load, py::arg("path"))
      .def("save", &Taxonomy::save, py::arg("path"))
      .def("serialize", &Taxonomy::serialize)
      .def("categories", &Taxonomy::categories)
      .def("attribute_set", &Taxonomy::attribute_set, py::arg("category"))
      .def("values_of", &Taxonomy::values_of, py::arg("category"), py::arg("attribute"))
      .def("has_value", &Taxonomy::has_value, py::arg("category"), py::arg("attribute"),
           py::arg("value"))
      .def("triple_count", &Taxonomy::triple_count)
      .def("max_partition_size", &Taxonomy::max_partition_size);

  py::class_<LabelValue>(m, "LabelValue")
      .def(py::init<>())
      .def_readwrite("value", &LabelValue::value)
      .def_readwrite("in_taxonomy", &LabelValue::in_taxonomy);

  py::class_<LabeledAttribute>(m, "LabeledAttribute")
      .def(py::init<>())
      .def_readwrite("attribute", &LabeledAttribute::attribute)
      .def_readwrite("values", &LabeledAttribute::values);

  py::class_<Product>(m, "Product")
      .def(py::init<>())
      .def_readwrite("id", &Product::id)
      .def_readwrite("title", &Product::title)
      .def_readwrite("description", &Product::description)
      .def_readwrite("category", &Product::category)
      .def_readwrite("labels", &Product::labels);

  py::class_<CorpusStats>(m, "CorpusStats")
      .def_readonly("product_count", &CorpusStats::product_count)
      .def_readonly("pa_pair_count", &CorpusStats::pa_pair_count)
      .def_readonly("null_pair_count", &CorpusStats::null_pair_count);

  m.def("ingest_products", &ingest_products, py::arg("path"), py::arg("taxonomy"));
  m.def("save_products", &save_products, py::arg("path"), py::arg("products"));
  m.def("render_query", &render_query, py::arg("product"));
  m.def("corpus_stats", &corpus_stats, py::arg("products"));

  py::class_<Encoder>(m, "Encoder")
      .def("dim", &Encoder::dim)
      .def("identity", &Encoder::identity)
      .def("encode", &Encoder::encode, py::arg("text"))
      .def("encode_batch", &Encoder::encode_batch, py::arg("texts"));

  py::class_<HashedNgramEncoder, Encoder>(m, "HashedNgramEncoder")
      .def(py::init<std::size_t>(), py::arg("dim") = HashedNgramEncoder::kDefaultDim);

  m.def("cosine", &cosine, py::arg("a"), py::arg("b"));
  m.def("value_prompt", &value_prompt, py::arg("category"), py::arg("attribute"),
        py::arg("value"));

  py::class_<Candidate>(m, "Candidate")
      .def_readonly("value", &Candidate::value)
      .def_readonly("score", &Candidate::score);

  py::class_<CandidateSet>(m, "CandidateSet")
      .def_readonly("attribute", &CandidateSet::attribute)
      .def_readonly("candidates", &CandidateSet::candidates)
      .def("contains", &CandidateSet::contains, py::arg("value"))
      .def("values", [](const CandidateSet& cs) {
        std::vector<std::string> out;
        for (const Candidate& c : cs.candidates) out.push_back(c.value);
        return out;
      });

  py::class_<FewShotExample>(m, "FewShotExample")
      .def_readonly("product", &FewShotExample::product)
      .def_readonly("score", &FewShotExample::score)
      .def_readonly("rendered_labels", &FewShotExample::rendered_labels);

  py::class_<ValueIndex>(m, "ValueIndex")
      .def_static("build", &ValueIndex::build, py::arg("taxonomy"), py::arg("encoder"))
      .def_static("load", &ValueIndex::load, py::arg("path"), py::arg("encoder"))
      .def("save", &ValueIndex::save, py::arg("path"))
      .def("size", &ValueIndex::size);

  py::class_<ProductIndex>(m, "ProductIndex")
      .def_static("build", &ProductIndex::build, py::arg("pool"), py::arg("encoder"))
      .def_static("load", &ProductIndex::load, py::arg("path"), py::arg("encoder"),
                  py::arg("taxonomy"))
      .def("save", &ProductIndex::save, py::arg("path"))
      .def("size", &ProductIndex::size);

  m.def("retrieve_values", &retrieve_values, py::arg("query"), py::arg("category"),
        py::arg("attribute"), py::arg("k"), py::arg("index"), py::arg("encoder"));
  m.def("retrieve_products", &retrieve_products, py::arg("query"), py::arg("category"),
        py::arg("m"), py::arg("index"), py::arg("encoder"), py::arg("exclude_id"),
        py::arg("taxonomy"));

  py::class_<PromptBundle>(m, "PromptBundle")
      .def_readonly("task_description", &PromptBundle::task_description)
      .def_readonly("note", &PromptBundle::note)
      .def_readonly("few_shots", &PromptBundle::few_shots)
      .def_readonly("product_block", &PromptBundle::product_block)
      .def_readonly("candidate_block", &PromptBundle::candidate_block)
      .def_readonly("rendered", &PromptBundle::rendered)
      .def_readonly("product_id", &PromptBundle::product_id)
      .def_readonly("category", &PromptBundle::category)
      .def_readonly("query", &PromptBundle::query)
      .def_readonly("schema", &PromptBundle::schema);

  m.def(
      "assemble_prompt",
      [](const Product& p, const std::vector<FewShotExample>& shots,
         const std::vector<CandidateSet>& candidates, const Taxonomy& taxonomy) {
        return assemble_prompt(p, shots, candidates, taxonomy);
      },
      py::arg("product"), py::arg("shots"), py::arg("candidates"), py::arg("taxonomy"));
  m.def(
      "parse_prompt_sections",
      [](const std::string& rendered) { return parse_prompt_sections(rendered); },
      py::arg("rendered"));

  py::class_<SftRecord>(m, "SftRecord")
      .def_readonly("prompt", &SftRecord::prompt)
      .def_readonly("target", &SftRecord::target)
      .def_readonly("loss_mask_boundary", &SftRecord::loss_mask_boundary)
      .def_readonly("is_ood_sample", &SftRecord::is_ood_sample)
      .def_readonly("product_id", &SftRecord::product_id);

  m.def("render_target", &render_target, py::arg("product"), py::arg("taxonomy"));
  m.def("build_sft_record", &build_sft_record, py::arg("product"), py::arg("bundle"),
        py::arg("taxonomy"));
  m.def(
      "build_ood_sample",
      [](const Product& p, const PromptBundle& bundle, const Taxonomy& taxonomy) {
        return build_ood_sample(p, bundle, taxonomy);
      },
      py::arg("product"), py::arg("bundle"), py::arg("taxonomy"));

  py::enum_<OutcomeKind>(m, "OutcomeKind")
      .value("VALUE", OutcomeKind::Value)
      .value("NULL_", OutcomeKind::Null)
      .value("UNKNOWN", OutcomeKind::Unknown);

  py::class_<AttrOutcome>(m, "AttrOutcome")
      .def(py::init<>())
      .def_readwrite("kind", &AttrOutcome::kind)
      .def_readwrite("value", &AttrOutcome::value)
      .def_readwrite("ood", &AttrOutcome::ood);

  py::class_<ParseDiagnostics>(m, "ParseDiagnostics")
      .def_readonly("unparsed_lines", &ParseDiagnostics::unparsed_lines)
      .def_readonly("unmatched_attributes", &ParseDiagnostics::unmatched_attributes)
      .def_readonly("duplicate_lines", &ParseDiagnostics::duplicate_lines)
      .def_readonly("empty_values", &ParseDiagnostics::empty_values);

  py::class_<Prediction>(m, "Prediction")
      .def_readonly("product_id", &Prediction::product_id)
      .def_readonly("outcomes", &Prediction::outcomes)
      .def_readonly("diagnostics", &Prediction::diagnostics);

  py::class_<Generator>(m, "Generator")
      .def("generate", &Generator::generate, py::arg("bundle"))
      .def("identity", &Generator::identity);

  py::class_<MockGenerator, Generator> mock(m, "MockGenerator");
  py::enum_<MockGenerator::Mode>(mock, "Mode")
      .value("ORACLE", MockGenerator::Mode::Oracle)
      .value("HEURISTIC", MockGenerator::Mode::Heuristic);
  mock.def(py::init<MockGenerator::Mode, const std::vector<Product>&>(),
           py::arg("mode"), py::arg("corpus"));

  m.def("parse_completion", &parse_completion, py::arg("raw"), py::arg("schema"),
        py::arg("taxonomy"), py::arg("category"));

  py::enum_<Cell>(m, "Cell")
      .value("TRUE_POSITIVE", Cell::TruePositive)
      .value("FALSE_POSITIVE", Cell::FalsePositive)
      .value("FALSE_NEGATIVE", Cell::FalseNegative)
      .value("TRUE_NEGATIVE", Cell::TrueNegative)
      .value("MISMATCH", Cell::Mismatch);

  py::class_<ConfusionCounts>(m, "ConfusionCounts")
      .def_readonly("tp", &ConfusionCounts::tp)
      .def_readonly("fp", &ConfusionCounts::fp)
      .def_readonly("fn", &ConfusionCounts::fn)
      .def_readonly("tn", &ConfusionCounts::tn);

  py::class_<EvalInstance>(m, "EvalInstance")
      .def(py::init<>())
      .def_readwrite("product_id", &EvalInstance::product_id)
      .def_readwrite("attribute", &EvalInstance::attribute)
      .def_readwrite("ground_truth", &EvalInstance::ground_truth)
      .def_readwrite("outcome", &EvalInstance::outcome)
      .def_readwrite("candidates", &EvalInstance::candidates);

  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("precision", &EvalReport::precision)
      .def_readonly("recall", &EvalReport::recall)
      .def_readonly("f1", &EvalReport::f1)
      .def_readonly("coverage", &EvalReport::coverage)
      .def_readonly("counts", &EvalReport::counts)
      .def_readonly("instance_count", &EvalReport::instance_count)
      .def_readonly("universe_hash", &EvalReport::universe_hash);

  m.def("classify_instance", &classify_instance, py::arg("ground_truth"),
        py::arg("outcome"));
  m.def("micro_scores", &micro_scores, py::arg("instances"));
  m.def("coverage", &coverage, py::arg("instances"));
  m.def("build_report", &build_report, py::arg("instances"));

  py::class_<SynthParams>(m, "SynthParams")
      .def(py::init<>())
      .def_readwrite("seed", &SynthParams::seed)
      .def_readwrite("categories", &SynthParams::categories)
      .def_readwrite("attributes_per_category", &SynthParams::attributes_per_category)
      .def_readwrite("values_per_attribute", &SynthParams::values_per_attribute)
      .def_readwrite("products", &SynthParams::products)
      .def_readwrite("pool_products", &SynthParams::pool_products)
      .def_readwrite("ood_fraction", &SynthParams::ood_fraction)
      .def_readwrite("null_fraction", &SynthParams::null_fraction)
      .def_readwrite("unannotated_fraction", &SynthParams::unannotated_fraction)
      .def_readwrite("multi_value_fraction", &SynthParams::multi_value_fraction)
      .def_readwrite("noise_words", &SynthParams::noise_words);

  py::class_<SynthOutput>(m, "SynthOutput")
      .def_readonly("taxonomy", &SynthOutput::taxonomy)
      .def_readonly("corpus", &SynthOutput::corpus)
      .def_readonly("pool", &SynthOutput::pool);

  m.def("synthesize", &synthesize, py::arg("params"));
}
