"""Command-line pipeline orchestration.

Subcommands cover the full workbench: corpus preparation (index, qrels,
split), the generation pipeline (retrieve, rerank, generate, judge),
perturbation construction, and the validation suite (validate,
agreement, report). Every command exits 0 only when its stage ran
without error; diagnostics are stage-tagged on stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import statistics
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import judges
from .config import (
    ConfigError,
    RunConfig,
    load_manifest,
    resolve_config,
    save_manifest,
)
from .corpus import (
    CON,
    Corpus,
    EvidenceDocument,
    PRO,
    Qrels,
    Topic,
    build_qrels,
    load_corpus,
    read_qrels,
    split_topics,
    write_qrels,
)
from .gateway import Backend, make_backend
from .generation import (
    Argument,
    PromptBudget,
    assemble_generation_prompt,
    argument_to_record,
    generate_argument,
    read_arguments,
)
from .judges import (
    JudgeVerdict,
    RAW_SCALES,
    aggregate_self_consistency,
    dimension_orderings,
    normalize_score,
    run_judge,
    verdict_from_record,
    verdict_to_record,
    write_verdicts,
)
from .perturbation import (
    IrrelevantInjection,
    inject_hallucinations,
    inject_irrelevant,
    injection_to_record,
    write_perturbation_manifest,
)
from .reports import (
    agreement_records,
    grid_records,
    precision_records,
    render_agreement_table,
    render_grid,
    render_precision_table,
    render_sensitivity_table,
    sensitivity_records,
    write_json_report,
    write_text_report,
)
from .retrieval import (
    BM25Params,
    Index,
    RankedList,
    bm25_search,
    build_index,
    read_run,
    rerank_listwise,
    write_run,
)
from .seeds import derive_seed
from .validation import (
    ConsistencyGrid,
    GridCell,
    InsufficientData,
    PrecisionRow,
    RatingsMatrix,
    SensitivityCurve,
    consistency_grid,
    krippendorff_alpha,
    precision_comparison,
    sensitivity_curve,
    summarize_curve,
)

PIPELINE_STAGES = ("retrieve", "rerank", "generate", "judge")

# Formats that never emit a context relevance signal are excluded from
# the context sensitivity analysis.
CONTEXT_BLIND_FORMATS = ("listwise_quality",)


class CliError(Exception):
    pass


class NothingToValidate(CliError):
    pass


class StageFailure(CliError):
    def __init__(self, stage: str, original: Exception):
        super().__init__(str(original))
        self.stage = stage
        self.original = original


# ---------------------------------------------------------------------------
# shared plumbing


def _corpus(config: RunConfig) -> Corpus:
    return load_corpus(config.corpus_dir, token_ratio=config.token_ratio)


def _out_file(config: RunConfig, name: str) -> Path:
    path = Path(name)
    if path.is_absolute():
        return path
    return config.out_path(name)


def _backend(config: RunConfig, backend: Optional[Backend]) -> Backend:
    return backend if backend is not None else make_backend(config.backend_config())


def _splits(config: RunConfig, corpus: Corpus) -> tuple[list[str], list[str]]:
    """(train, test) topic ids; without a split file every topic is test."""
    path = _out_file(config, config.splits_path)
    if not path.exists():
        return [], sorted(corpus.topic_ids)
    record = json.loads(path.read_text(encoding="utf-8"))
    return sorted(record.get("train", [])), sorted(record.get("test", []))


def index_path(config: RunConfig) -> Path:
    return config.out_path("index.json")


def save_index(index: Index, path: Path) -> None:
    payload = {
        "params": {"k1": index.params.k1, "b": index.params.b},
        "doc_count": index.doc_count,
        "avg_doc_length": index.avg_doc_length,
        "doc_lengths": index.doc_lengths,
        "postings": {
            term: [[doc_id, tf] for doc_id, tf in posting]
            for term, posting in index.postings.items()
        },
    }
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(payload, sort_keys=True, ensure_ascii=True) + "\n",
        encoding="utf-8",
    )


def read_index(path: Path) -> Index:
    if not path.exists():
        raise CliError(f"index artifact not found at {path}; run `raarg index` first")
    payload = json.loads(path.read_text(encoding="utf-8"))
    return Index(
        postings={
            term: [(doc_id, tf) for doc_id, tf in posting]
            for term, posting in payload["postings"].items()
        },
        doc_lengths=payload["doc_lengths"],
        avg_doc_length=payload["avg_doc_length"],
        doc_count=payload["doc_count"],
        params=BM25Params(k1=payload["params"]["k1"], b=payload["params"]["b"]),
    )


def _rerank_run_path(config: RunConfig, stance: str) -> Path:
    if config.instruction_kind == "generic":
        return config.out_path("runs", "rerank_generic.txt")
    return config.out_path("runs", f"rerank_{stance}.txt")


def _docs_for(
    config: RunConfig, corpus: Corpus, ranked: RankedList
) -> list[EvidenceDocument]:
    return [corpus.documents[d] for d in ranked.doc_ids[: config.cutoff_k]]


def _context_docs(
    config: RunConfig, corpus: Corpus, topic_id: str, stance: str
) -> list[EvidenceDocument]:
    path = _rerank_run_path(config, stance)
    if not path.exists():
        raise CliError(f"run file not found at {path}; run `raarg rerank` first")
    runs = read_run(path)
    if topic_id not in runs:
        raise CliError(f"topic {topic_id} missing from run file {path}")
    return _docs_for(config, corpus, runs[topic_id])


def _negative_pool(corpus: Corpus, topic: Topic) -> list[EvidenceDocument]:
    """Documents never cited by this topic, in stable doc_id order."""
    cited = set(topic.cited_doc_ids())
    return [
        doc
        for doc_id, doc in sorted(corpus.documents.items())
        if doc_id not in cited
    ]


def _expert_argument(topic: Topic, stance: str) -> str:
    reference = topic.arguments_for(stance)
    if not reference:
        raise CliError(
            f"topic {topic.topic_id} has no reference {stance} argument to compare against"
        )
    return reference[0].text


def _judge_scale(config: RunConfig, fmt: str) -> tuple[float, float]:
    if fmt == "listwise_quality" and config.listwise_quality_scale == "1_3":
        return (1.0, 3.0)
    if fmt == "listwise_quality":
        return (0.0, 5.0)
    return RAW_SCALES[fmt]


def _judge_once(
    config: RunConfig,
    backend: Backend,
    fmt: str,
    topic: Topic,
    stance: str,
    docs: Sequence[EvidenceDocument],
    argument_text: str,
) -> JudgeVerdict:
    argument_b = None
    if fmt in ("rag_rubric", "rag_direct"):
        argument_b = _expert_argument(topic, stance)
    scale = _judge_scale(config, fmt)
    if config.self_consistency and fmt.startswith("listwise"):
        verdicts = [
            run_judge(
                backend,
                fmt,
                topic,
                stance,
                docs,
                argument_a=argument_text,
                argument_b=argument_b,
                dimension_order=ordering,
                scale=scale,
            )
            for ordering in dimension_orderings(config.self_consistency_seed)
        ]
        return aggregate_self_consistency(verdicts, config.self_consistency_mode)
    return run_judge(
        backend,
        fmt,
        topic,
        stance,
        docs,
        argument_a=argument_text,
        argument_b=argument_b,
        scale=scale,
    )


def _context_score(verdict: JudgeVerdict) -> Optional[float]:
    """One normalized context relevance number per verdict."""
    if verdict.context_relevance_overall is not None:
        return verdict.context_relevance_overall
    if verdict.context_relevance_per_doc:
        return statistics.fmean(verdict.context_relevance_per_doc)
    return None


# ---------------------------------------------------------------------------
# corpus preparation commands


def cmd_index(config: RunConfig, backend: Optional[Backend] = None) -> None:
    corpus = _corpus(config)
    index = build_index(
        corpus.documents.values(), BM25Params(k1=config.k1, b=config.b)
    )
    save_index(index, index_path(config))
    manifest = load_manifest(config)
    manifest.record_stage(
        "index",
        inputs={"corpus_dir": Path(config.corpus_dir) / "documents.jsonl"},
        outputs={"index": index_path(config)},
    )
    save_manifest(manifest, config)


def cmd_qrels(config: RunConfig, backend: Optional[Backend] = None) -> None:
    corpus = _corpus(config)
    qrels = build_qrels(corpus, stance_scope=config.stance_scope, seed=config.seed)
    path = _out_file(config, config.qrels_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_qrels(qrels, path)
    manifest = load_manifest(config)
    manifest.record_stage(
        "qrels",
        inputs={"topics": Path(config.corpus_dir) / "topics.jsonl"},
        outputs={"qrels": path},
    )
    save_manifest(manifest, config)


def cmd_split(config: RunConfig, backend: Optional[Backend] = None) -> None:
    corpus = _corpus(config)
    split = split_topics(corpus, config.train_fraction, seed=config.seed)
    path = _out_file(config, config.splits_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "train": sorted(split.train_topics),
        "test": sorted(split.test_topics),
    }
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    manifest = load_manifest(config)
    manifest.record_stage(
        "split",
        inputs={"topics": Path(config.corpus_dir) / "topics.jsonl"},
        outputs={"splits": path},
    )
    save_manifest(manifest, config)


# ---------------------------------------------------------------------------
# pipeline commands


def cmd_retrieve(config: RunConfig, backend: Optional[Backend] = None) -> None:
    corpus = _corpus(config)
    index = read_index(index_path(config))
    _, test_ids = _splits(config, corpus)
    ranked = [
        bm25_search(
            index, corpus.topic(tid).title, config.candidate_depth, topic_id=tid
        )
        for tid in test_ids
    ]
    path = config.out_path("runs", "bm25.txt")
    path.parent.mkdir(parents=True, exist_ok=True)
    write_run(ranked, path, tag="bm25")
    manifest = load_manifest(config)
    manifest.record_stage(
        "retrieve", inputs={"index": index_path(config)}, outputs={"run": path}
    )
    save_manifest(manifest, config)


def cmd_rerank(config: RunConfig, backend: Optional[Backend] = None) -> None:
    corpus = _corpus(config)
    backend = _backend(config, backend)
    bm25_path = config.out_path("runs", "bm25.txt")
    if not bm25_path.exists():
        raise CliError(f"run file not found at {bm25_path}; run `raarg retrieve` first")
    first_stage = read_run(bm25_path)

    stances: tuple[Optional[str], ...]
    stances = (None,) if config.instruction_kind == "generic" else (PRO, CON)
    outputs = {}
    for stance in stances:
        reranked = []
        for tid in sorted(first_stage):
            candidates = first_stage[tid]
            reranked.append(
                rerank_listwise(
                    backend,
                    corpus.topic(tid).title,
                    candidates,
                    corpus.documents,
                    instruction_kind=config.instruction_kind,
                    stance=stance,
                    window=config.window,
                    stride=config.stride,
                )
            )
        path = _rerank_run_path(config, stance or PRO)
        path.parent.mkdir(parents=True, exist_ok=True)
        write_run(reranked, path, tag=path.stem)
        outputs[path.stem] = path
    manifest = load_manifest(config)
    manifest.record_stage("rerank", inputs={"run": bm25_path}, outputs=outputs)
    save_manifest(manifest, config)


def _few_shot_examples(
    config: RunConfig, corpus: Corpus, stance: str
) -> list[tuple[Topic, list[EvidenceDocument], str]]:
    shots = []
    for tid in config.few_shot_topic_ids:
        topic = corpus.topic(tid)
        reference = topic.arguments_for(stance)
        if not reference:
            continue
        docs = [
            corpus.documents[d]
            for d in topic.cited_doc_ids(stance)[: config.cutoff_k]
        ]
        shots.append((topic, docs, reference[0].text))
    return shots


def cmd_generate(config: RunConfig, backend: Optional[Backend] = None) -> None:
    corpus = _corpus(config)
    backend = _backend(config, backend)
    _, test_ids = _splits(config, corpus)
    budget = PromptBudget(
        total_budget=config.total_budget,
        reserved_for_instructions_and_examples=config.example_reserve,
        per_call_output_reserve=config.output_reserve,
    )
    path = config.out_path("arguments.jsonl")
    path.parent.mkdir(parents=True, exist_ok=True)
    # Written incrementally so a mid-stage failure retains the finished part.
    with path.open("w", encoding="utf-8") as fh:
        for tid in test_ids:
            topic = corpus.topic(tid)
            for stance in (PRO, CON):
                docs = _context_docs(config, corpus, tid, stance)
                request = assemble_generation_prompt(
                    topic,
                    stance,
                    docs,
                    few_shot=_few_shot_examples(config, corpus, stance),
                    budget=budget,
                    temperature=config.generation_temperature,
                    token_ratio=config.token_ratio,
                )
                argument = generate_argument(
                    backend, request, topic_id=tid, stance=stance, doc_count=len(docs)
                )
                fh.write(
                    json.dumps(
                        argument_to_record(argument), ensure_ascii=True, sort_keys=True
                    )
                    + "\n"
                )
                fh.flush()
    manifest = load_manifest(config)
    manifest.record_stage(
        "generate",
        inputs={"splits": _out_file(config, config.splits_path)},
        outputs={"arguments": path},
    )
    save_manifest(manifest, config)


def _load_arguments(config: RunConfig) -> list[Argument]:
    path = config.out_path("arguments.jsonl")
    if not path.exists():
        raise CliError(f"no arguments at {path}; run `raarg generate` first")
    arguments = read_arguments(path)
    if not arguments:
        raise CliError(f"argument file {path} is empty")
    return arguments


def cmd_judge(config: RunConfig, backend: Optional[Backend] = None) -> None:
    corpus = _corpus(config)
    backend = _backend(config, backend)
    arguments = _load_arguments(config)
    out_dir = config.out_path("verdicts")
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = {}
    for fmt in config.judge_formats:
        records = []
        for argument in arguments:
            topic = corpus.topic(argument.topic_id)
            docs = _context_docs(config, corpus, argument.topic_id, argument.stance)
            verdict = _judge_once(
                config, backend, fmt, topic, argument.stance, docs, argument.text
            )
            records.append(
                verdict_to_record(
                    verdict, topic_id=argument.topic_id, stance=argument.stance
                )
            )
        path = out_dir / f"{fmt}.jsonl"
        write_verdicts(records, path)
        outputs[fmt] = path
    manifest = load_manifest(config)
    manifest.record_stage(
        "judge",
        inputs={"arguments": config.out_path("arguments.jsonl")},
        outputs=outputs,
    )
    save_manifest(manifest, config)


def cmd_perturb(config: RunConfig, backend: Optional[Backend] = None) -> None:
    """Materialize the seeded irrelevant-context injections as records."""
    corpus = _corpus(config)
    arguments = _load_arguments(config)
    records = []
    for argument in arguments:
        topic = corpus.topic(argument.topic_id)
        docs = _context_docs(config, corpus, argument.topic_id, argument.stance)
        pool = _negative_pool(corpus, topic)
        for level in config.irrelevance_levels:
            injection = inject_irrelevant(
                docs,
                pool,
                level,
                seed=derive_seed(config.seed, "sensitivity", f"{level}:0"),
                topic_id=argument.topic_id,
            )
            records.append(injection_to_record(injection, stance=argument.stance))
    path = config.out_path("perturb", "irrelevant.jsonl")
    path.parent.mkdir(parents=True, exist_ok=True)
    write_perturbation_manifest(records, path)
    manifest = load_manifest(config)
    manifest.record_stage(
        "perturb",
        inputs={"arguments": config.out_path("arguments.jsonl")},
        outputs={"irrelevant": path},
    )
    save_manifest(manifest, config)


# ---------------------------------------------------------------------------
# validation commands


def _sensitivity_runner(
    config: RunConfig,
    backend: Backend,
    corpus: Corpus,
    arguments: Sequence[Argument],
    fmt: str,
    collector: Optional[list[tuple[IrrelevantInjection, JudgeVerdict]]] = None,
):
    def runner(level: float, trial_seed: int) -> list[float]:
        scores = []
        for argument in arguments:
            topic = corpus.topic(argument.topic_id)
            docs = _context_docs(config, corpus, argument.topic_id, argument.stance)
            injection = inject_irrelevant(
                docs,
                _negative_pool(corpus, topic),
                level,
                seed=trial_seed,
                topic_id=argument.topic_id,
            )
            verdict = _judge_once(
                config,
                backend,
                fmt,
                topic,
                argument.stance,
                injection.resulting_docs,
                argument.text,
            )
            score = _context_score(verdict)
            if score is None:
                raise CliError(f"format {fmt} produced no context relevance signal")
            scores.append(score)
            if collector is not None:
                collector.append((injection, verdict))
        return scores

    return runner


def _grid_runner(
    config: RunConfig,
    backend: Backend,
    corpus: Corpus,
    arguments: Sequence[Argument],
    fmt: str,
):
    scale = _judge_scale(config, fmt)

    def runner(
        irr_level: float, hall_level: int, cell_seed: int
    ) -> list[tuple[float, float, float]]:
        triples = []
        for argument in arguments:
            topic = corpus.topic(argument.topic_id)
            docs = _context_docs(config, corpus, argument.topic_id, argument.stance)
            injection = inject_irrelevant(
                docs,
                _negative_pool(corpus, topic),
                irr_level,
                seed=cell_seed,
                topic_id=argument.topic_id,
            )
            # Arguments shorter than the level cap at their own length.
            n_sentences = min(hall_level, len(argument.sentence_spans))
            spec = inject_hallucinations(
                backend, argument, docs, n_sentences, seed=cell_seed
            )
            verdict = _judge_once(
                config,
                backend,
                fmt,
                topic,
                argument.stance,
                injection.resulting_docs,
                spec.modified_argument.text,
            )
            ctx = _context_score(verdict)
            if ctx is None or verdict.groundedness is None:
                raise CliError(
                    f"format {fmt} lacks the metrics required for the grid"
                )
            quality = (
                normalize_score(verdict.quality_ratings["overall_quality"], scale)
                if verdict.quality_ratings
                else ctx
            )
            triples.append((ctx, verdict.groundedness, quality))
        return triples

    return runner


def cmd_validate(config: RunConfig, backend: Optional[Backend] = None) -> None:
    corpus = _corpus(config)
    backend = _backend(config, backend)
    try:
        arguments = _load_arguments(config)
    except CliError as exc:
        raise NothingToValidate(str(exc))

    reports_dir = config.out_path("reports")
    reports_dir.mkdir(parents=True, exist_ok=True)
    notes: list[str] = []
    outputs: dict[str, Path] = {}

    fg = "listwise_rag_fine_grained"
    levels = config.irrelevance_levels
    curves: list[tuple[str, SensitivityCurve]] = []
    fg_pairs: list[tuple[IrrelevantInjection, JudgeVerdict]] = []
    for fmt in config.judge_formats:
        if fmt in CONTEXT_BLIND_FORMATS:
            notes.append(f"{fmt} emits no context relevance; excluded from sensitivity")
            continue
        collector = fg_pairs if fmt == fg else None
        runner = _sensitivity_runner(config, backend, corpus, arguments, fmt, collector)
        curves.append(
            (fmt, sensitivity_curve(runner, levels, trials_per_level=1, seed=config.seed))
        )
    if curves:
        text = render_sensitivity_table(curves)
        write_text_report(reports_dir / "sensitivity.txt", text)
        write_json_report(reports_dir / "sensitivity.json", sensitivity_records(curves))
        outputs["sensitivity"] = reports_dir / "sensitivity.txt"

    if fg_pairs:
        qrels_path = _out_file(config, config.qrels_path)
        if not qrels_path.exists():
            notes.append(
                f"no qrels at {qrels_path}; precision comparison skipped"
            )
        else:
            qrels = read_qrels(qrels_path, stance_scope=config.stance_scope)
            rows = precision_comparison(
                [pair[0] for pair in fg_pairs],
                [pair[1] for pair in fg_pairs],
                qrels,
                threshold=config.precision_threshold,
            )
            write_text_report(
                reports_dir / "precision.txt", render_precision_table(rows)
            )
            write_json_report(reports_dir / "precision.json", precision_records(rows))
            outputs["precision"] = reports_dir / "precision.txt"
    elif fg not in config.judge_formats:
        notes.append(f"{fg} not configured; precision comparison skipped")

    if fg in config.judge_formats:
        grid = consistency_grid(
            _grid_runner(config, backend, corpus, arguments, fg),
            config.irrelevance_levels,
            config.hallucination_levels,
            seed=config.seed,
        )
        write_text_report(reports_dir / "grid.txt", render_grid(grid))
        write_json_report(reports_dir / "grid.json", grid_records(grid))
        outputs["grid"] = reports_dir / "grid.txt"
    else:
        notes.append(f"{fg} not configured; consistency grid skipped")

    agreement_rows = _agreement_rows(config)
    if agreement_rows:
        write_text_report(
            reports_dir / "agreement.txt", render_agreement_table(agreement_rows)
        )
        write_json_report(
            reports_dir / "agreement.json", agreement_records(agreement_rows)
        )
        outputs["agreement"] = reports_dir / "agreement.txt"
    else:
        notes.append("no ratings or multi-format verdicts; agreement skipped")

    summary = ["validation reports"]
    # Paths are written relative to the output dir so the summary is
    # byte-stable across runs into different directories.
    summary.extend(
        f"wrote {path.relative_to(config.out_path()).as_posix()}"
        for path in outputs.values()
    )
    summary.extend(f"note: {note}" for note in notes)
    write_text_report(reports_dir / "summary.txt", "\n".join(summary) + "\n")

    manifest = load_manifest(config)
    manifest.record_stage(
        "validate",
        inputs={"arguments": config.out_path("arguments.jsonl")},
        outputs={**outputs, "summary": reports_dir / "summary.txt"},
    )
    save_manifest(manifest, config)


def _alpha_pair(
    matrix: RatingsMatrix,
) -> tuple[Optional[float], Optional[float]]:
    """Alpha at both measurement levels; None where undefined."""
    out = []
    for level in ("nominal", "interval"):
        try:
            out.append(
                krippendorff_alpha(dataclasses.replace(matrix, measurement_level=level))
            )
        except InsufficientData:
            out.append(None)
    return out[0], out[1]


def _ratings_file_rows(
    path: Path,
) -> list[tuple[str, Optional[float], Optional[float]]]:
    """Agreement rows from a JSONL ratings file.

    Records look like {"label": ..., "rater": ..., "item": ..., "value": ...};
    each label becomes one raters x items matrix.
    """
    groups: dict[str, dict[str, dict[str, float]]] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        record = json.loads(line)
        label = str(record.get("label", "ratings"))
        groups.setdefault(label, {}).setdefault(str(record["rater"]), {})[
            str(record["item"])
        ] = record["value"]

    rows = []
    for label in sorted(groups):
        raters = sorted(groups[label])
        items = sorted({item for per in groups[label].values() for item in per})
        matrix = RatingsMatrix(
            ratings=tuple(
                tuple(groups[label][rater].get(item) for item in items)
                for rater in raters
            ),
            measurement_level="nominal",
        )
        rows.append((label, *_alpha_pair(matrix)))
    return rows


def _verdict_agreement_rows(
    config: RunConfig,
) -> list[tuple[str, Optional[float], Optional[float]]]:
    """Cross-format agreement on context relevance over shared items."""
    per_format: dict[str, dict[str, float]] = {}
    for fmt in config.judge_formats:
        path = config.out_path("verdicts", f"{fmt}.jsonl")
        if not path.exists():
            continue
        scores: dict[str, float] = {}
        for record in judges.read_verdicts(path):
            verdict = verdict_from_record(record)
            score = _context_score(verdict)
            if score is not None:
                scores[f"{record['topic_id']}:{record['stance']}"] = score
        if scores:
            per_format[fmt] = scores
    if len(per_format) < 2:
        return []
    items = sorted(set.union(*(set(s) for s in per_format.values())))
    matrix = RatingsMatrix(
        ratings=tuple(
            tuple(per_format[fmt].get(item) for item in items)
            for fmt in sorted(per_format)
        ),
        measurement_level="nominal",
    )
    return [("context_relevance_across_formats", *_alpha_pair(matrix))]


def _agreement_rows(
    config: RunConfig,
) -> list[tuple[str, Optional[float], Optional[float]]]:
    ratings_path = config.out_path("ratings.jsonl")
    if ratings_path.exists():
        return _ratings_file_rows(ratings_path)
    return _verdict_agreement_rows(config)


def cmd_agreement(config: RunConfig, backend: Optional[Backend] = None) -> None:
    rows = _agreement_rows(config)
    if not rows:
        raise NothingToValidate(
            "no ratings.jsonl and fewer than two verdict files; nothing to agree on"
        )
    reports_dir = config.out_path("reports")
    reports_dir.mkdir(parents=True, exist_ok=True)
    text = render_agreement_table(rows)
    write_text_report(reports_dir / "agreement.txt", text)
    write_json_report(reports_dir / "agreement.json", agreement_records(rows))
    sys.stdout.write(text)


def cmd_report(config: RunConfig, backend: Optional[Backend] = None) -> None:
    """Re-render the plain-text tables from stored JSON records."""
    reports_dir = config.out_path("reports")
    rendered = False

    path = reports_dir / "sensitivity.json"
    if path.exists():
        payload = json.loads(path.read_text(encoding="utf-8"))
        curves = [
            (
                record["label"],
                SensitivityCurve(
                    axis_levels=tuple(record["levels"]),
                    values=tuple(record["values"]),
                    pearson_rho=record["pearson_rho"],
                    strictly_monotonic_decreasing=record[
                        "strictly_monotonic_decreasing"
                    ],
                    zero_variance=record["zero_variance"],
                ),
            )
            for record in payload["curves"]
        ]
        text = render_sensitivity_table(curves, axis_label=payload["axis"])
        write_text_report(reports_dir / "sensitivity.txt", text)
        sys.stdout.write(text + "\n")
        rendered = True

    path = reports_dir / "precision.json"
    if path.exists():
        payload = json.loads(path.read_text(encoding="utf-8"))
        rows = [
            PrecisionRow(
                level_percent=record["level_percent"],
                true_precision=record["true_precision"],
                predicted_precision=record["predicted_precision"],
                absolute_error=record["absolute_error"],
            )
            for record in payload
        ]
        text = render_precision_table(rows)
        write_text_report(reports_dir / "precision.txt", text)
        sys.stdout.write(text + "\n")
        rendered = True

    path = reports_dir / "grid.json"
    if path.exists():
        payload = json.loads(path.read_text(encoding="utf-8"))
        cells = {
            (cell["irrelevance_percent"], cell["hallucinated_sentences"]): GridCell(
                context_relevance=cell["context_relevance"],
                groundedness=cell["groundedness"],
                overall_quality=cell["overall_quality"],
                runs=cell["runs"],
            )
            for cell in payload["cells"]
        }
        grid = ConsistencyGrid(
            irrelevance_levels=tuple(payload["irrelevance_levels"]),
            hallucination_levels=tuple(payload["hallucination_levels"]),
            cells=cells,
        )
        text = render_grid(grid)
        write_text_report(reports_dir / "grid.txt", text)
        sys.stdout.write(text + "\n")
        rendered = True

    path = reports_dir / "agreement.json"
    if path.exists():
        payload = json.loads(path.read_text(encoding="utf-8"))
        rows = [
            (r["label"], r["alpha_nominal"], r["alpha_interval"]) for r in payload
        ]
        text = render_agreement_table(rows)
        write_text_report(reports_dir / "agreement.txt", text)
        sys.stdout.write(text + "\n")
        rendered = True

    if not rendered:
        raise NothingToValidate(
            f"no stored results under {reports_dir}; run `raarg validate` first"
        )


def cmd_pipeline(config: RunConfig, backend: Optional[Backend] = None) -> None:
    """retrieve -> rerank -> generate -> judge, then a summary report."""
    backend = _backend(config, backend)
    for stage, fn in (
        ("retrieve", cmd_retrieve),
        ("rerank", cmd_rerank),
        ("generate", cmd_generate),
        ("judge", cmd_judge),
    ):
        try:
            fn(config, backend)
        except StageFailure:
            raise
        except Exception as exc:
            raise StageFailure(stage, exc)
    _write_pipeline_summary(config)


def _write_pipeline_summary(config: RunConfig) -> None:
    arguments = _load_arguments(config)
    lines = [
        "pipeline summary",
        f"topics judged: {len({a.topic_id for a in arguments})}",
        f"arguments generated: {len(arguments)}",
    ]
    for fmt in config.judge_formats:
        path = config.out_path("verdicts", f"{fmt}.jsonl")
        if not path.exists():
            continue
        verdicts = [verdict_from_record(r) for r in judges.read_verdicts(path)]
        ctx = [s for v in verdicts if (s := _context_score(v)) is not None]
        grd = [v.groundedness for v in verdicts if v.groundedness is not None]
        parts = [f"{fmt}: {len(verdicts)} verdicts"]
        if ctx:
            parts.append(f"mean context relevance {statistics.fmean(ctx):.3f}")
        if grd:
            parts.append(f"mean groundedness {statistics.fmean(grd):.3f}")
        lines.append("; ".join(parts))
    reports_dir = config.out_path("reports")
    reports_dir.mkdir(parents=True, exist_ok=True)
    write_text_report(reports_dir / "pipeline_summary.txt", "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# argument parsing


COMMANDS = {
    "index": cmd_index,
    "qrels": cmd_qrels,
    "split": cmd_split,
    "retrieve": cmd_retrieve,
    "rerank": cmd_rerank,
    "generate": cmd_generate,
    "judge": cmd_judge,
    "perturb": cmd_perturb,
    "validate": cmd_validate,
    "agreement": cmd_agreement,
    "report": cmd_report,
    "pipeline": cmd_pipeline,
}


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="JSON config file")
    parser.add_argument("--seed", type=int, help="global seed override")
    parser.add_argument(
        "--backend", help="backend kind, optionally kind:endpoint"
    )
    parser.add_argument(
        "--format", help="comma-separated judge formats override"
    )
    parser.add_argument(
        "--levels", help="comma-separated irrelevance levels override"
    )
    parser.add_argument(
        "--threshold", type=float, help="predicted-precision threshold override"
    )
    parser.add_argument("--out", help="output directory override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raarg",
        description="Retrieval-augmented argumentation workbench",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub = subparsers.add_parser(name)
        _add_common_flags(sub)
    return parser


def _overrides_from_args(args: argparse.Namespace) -> dict:
    overrides: dict = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output_dir"] = args.out
    if args.threshold is not None:
        overrides["precision_threshold"] = args.threshold
    if args.backend is not None:
        kind, _, endpoint = args.backend.partition(":")
        overrides["backend_kind"] = kind
        if endpoint:
            overrides["backend_endpoint"] = endpoint
    if args.format is not None:
        overrides["judge_formats"] = tuple(
            f.strip() for f in args.format.split(",") if f.strip()
        )
    if args.levels is not None:
        overrides["irrelevance_levels"] = tuple(
            float(level) for level in args.levels.split(",") if level.strip()
        )
    return overrides


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = resolve_config(args.config, _overrides_from_args(args))
    except ConfigError as exc:
        print(f"[config] ConfigError: {exc}", file=sys.stderr)
        return 1
    try:
        COMMANDS[args.command](config)
    except StageFailure as exc:
        print(
            f"[{exc.stage}] {type(exc.original).__name__}: {exc.original}",
            file=sys.stderr,
        )
        return 1
    except Exception as exc:
        print(f"[{args.command}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
