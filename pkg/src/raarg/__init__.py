"""Retrieval-augmented argumentation workbench.

Builds BM25 indexes over debate-style corpora, reranks candidates with a
listwise LLM pass, generates stance-conditioned arguments grounded in the
retrieved documents, scores them with structured LLM judges, and validates
those judges with controlled perturbation experiments and agreement
statistics.
"""

__version__ = "0.1.0"

from .corpus import (
    CON,
    Corpus,
    CorpusSplit,
    EvidenceDocument,
    PRO,
    Qrels,
    ReferenceArgument,
    SourceRef,
    Topic,
    build_qrels,
    load_corpus,
    read_qrels,
    save_corpus,
    split_topics,
    write_qrels,
)
from .gateway import (
    BackendConfig,
    ChatRequest,
    ChatResponse,
    ReplayBackend,
    ReplayMiss,
    ScriptedBackend,
    complete_many,
    make_backend,
    request_key,
)
from .generation import (
    Argument,
    ArgumentUnit,
    Premise,
    PromptBudget,
    allocate_budget,
    argument_from_text,
    assemble_generation_prompt,
    generate_argument,
    read_arguments,
    trim_proportionally,
    write_arguments,
)
from .judges import (
    JUDGE_FORMATS,
    JudgeParseError,
    JudgeVerdict,
    NuggetSheet,
    aggregate_self_consistency,
    build_judge_prompt,
    normalize_score,
    parse_verdict,
    predicted_precision,
    run_judge,
)
from .judge_prompts import QUALITY_DIMENSIONS
from .perturbation import (
    HallucinationSpec,
    IrrelevantInjection,
    inject_hallucinations,
    inject_irrelevant,
    replacement_count,
    true_precision,
    verify_modification,
)
from .retrieval import (
    BM25Params,
    RankedList,
    bm25_search,
    build_index,
    compare_runs,
    holm_bonferroni,
    ndcg_at_k,
    parse_permutation,
    precision_at_k,
    read_run,
    rerank_listwise,
    window_starts,
    write_run,
)
from .seeds import derive_seed
from .validation import (
    ConsistencyGrid,
    RatingsMatrix,
    SensitivityCurve,
    consistency_grid,
    krippendorff_alpha,
    monotonic_decrease,
    pearson,
    precision_comparison,
    sensitivity_curve,
)

__all__ = [
    "__version__",
    # corpus
    "CON",
    "Corpus",
    "CorpusSplit",
    "EvidenceDocument",
    "PRO",
    "Qrels",
    "ReferenceArgument",
    "SourceRef",
    "Topic",
    "build_qrels",
    "load_corpus",
    "read_qrels",
    "save_corpus",
    "split_topics",
    "write_qrels",
    # gateway
    "BackendConfig",
    "ChatRequest",
    "ChatResponse",
    "ReplayBackend",
    "ReplayMiss",
    "ScriptedBackend",
    "complete_many",
    "make_backend",
    "request_key",
    # generation
    "Argument",
    "ArgumentUnit",
    "Premise",
    "PromptBudget",
    "allocate_budget",
    "argument_from_text",
    "assemble_generation_prompt",
    "generate_argument",
    "read_arguments",
    "trim_proportionally",
    "write_arguments",
    # judges
    "JUDGE_FORMATS",
    "JudgeParseError",
    "JudgeVerdict",
    "NuggetSheet",
    "QUALITY_DIMENSIONS",
    "aggregate_self_consistency",
    "build_judge_prompt",
    "normalize_score",
    "parse_verdict",
    "predicted_precision",
    "run_judge",
    # perturbation
    "HallucinationSpec",
    "IrrelevantInjection",
    "inject_hallucinations",
    "inject_irrelevant",
    "replacement_count",
    "true_precision",
    "verify_modification",
    # retrieval
    "BM25Params",
    "RankedList",
    "bm25_search",
    "build_index",
    "compare_runs",
    "holm_bonferroni",
    "ndcg_at_k",
    "parse_permutation",
    "precision_at_k",
    "read_run",
    "rerank_listwise",
    "window_starts",
    "write_run",
    # seeds
    "derive_seed",
    # validation
    "ConsistencyGrid",
    "RatingsMatrix",
    "SensitivityCurve",
    "consistency_grid",
    "krippendorff_alpha",
    "monotonic_decrease",
    "pearson",
    "precision_comparison",
    "sensitivity_curve",
]
