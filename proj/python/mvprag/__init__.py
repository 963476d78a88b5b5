"""Retrieval-augmented product attribute value identification.

Thin wrapper over the compiled ``_core`` extension: taxonomy and corpus
handling, the deterministic hashed-n-gram encoder, candidate-value and
reference-product retrieval, five-part prompt assembly, SFT export, mock
generation, completion parsing, and micro-averaged evaluation.
"""

from ._core import (  # noqa: F401
    NULL_MARKER,
    AttrOutcome,
    Candidate,
    CandidateSet,
    Cell,
    ConfusionCounts,
    CorpusStats,
    Encoder,
    EvalInstance,
    EvalReport,
    FewShotExample,
    Generator,
    HashedNgramEncoder,
    LabelValue,
    LabeledAttribute,
    MockGenerator,
    OutcomeKind,
    ParseDiagnostics,
    PipelineError,
    Prediction,
    Product,
    ProductIndex,
    PromptBundle,
    SftRecord,
    SynthOutput,
    SynthParams,
    Taxonomy,
    ValueIndex,
    assemble_prompt,
    build_ood_sample,
    build_report,
    build_sft_record,
    classify_instance,
    corpus_stats,
    cosine,
    coverage,
    ingest_products,
    micro_scores,
    parse_completion,
    parse_prompt_sections,
    render_query,
    render_target,
    retrieve_products,
    retrieve_values,
    save_products,
    synthesize,
    value_prompt,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
