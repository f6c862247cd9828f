"""Judge execution: prompt planning, reply parsing, score normalization.

Every format maps to one prompt builder and one parser. Replies must be a
single JSON object; exactly one repair pass (strip code fences, take the
outermost braces) is attempted before the reply is rejected, because a
judge that cannot follow its output contract is itself a finding.
"""

from __future__ import annotations

import json
import random
import re
import statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Optional, Sequence

from . import judge_prompts as prompts
from .corpus import EvidenceDocument, Topic
from .gateway import Backend, ChatRequest
from .judge_prompts import QUALITY_DIMENSIONS
from .seeds import derive_seed

JUDGE_FORMATS = (
    "direct",
    "static_rubric",
    "g_eval",
    "query_rubric",
    "rag_rubric",
    "rag_direct",
    "listwise_quality",
    "listwise_rag",
    "listwise_rag_fine_grained",
)

# Raw rating scale per format; static_rubric is already a fraction.
RAW_SCALES: dict[str, tuple[float, float]] = {
    "direct": (0, 10),
    "static_rubric": (0, 1),
    "g_eval": (1, 5),
    "query_rubric": (1, 5),
    "rag_rubric": (1, 5),
    "rag_direct": (1, 5),
    "listwise_quality": (1, 3),
    "listwise_rag": (0, 5),
    "listwise_rag_fine_grained": (0, 5),
}

STATIC_RUBRIC_KEYS = (
    "direct_relevance",
    "breadth_of_coverage",
    "quality_of_evidence",
    "applicability_to_argumentation",
    "consistency_with_topic_relevance",
    "noise_and_unrelated_content",
)

NUGGET_COUNT = 20

DEFAULT_JUDGE_MAX_TOKENS = 4096
DEFAULT_PRECISION_THRESHOLD = 0.8

PREFERENCES = ("argument_1", "argument_2", "tie")


class JudgeError(Exception):
    pass


class JudgeParseError(JudgeError):
    """The reply could not be used as a verdict, even after one repair."""


class LengthMismatch(JudgeParseError):
    def __init__(self, expected: int, got: int):
        super().__init__(f"expected {expected} per-document scores, got {got}")
        self.expected = expected
        self.got = got


class MissingArgumentB(JudgeError):
    pass


class UnsupportedCombination(JudgeError):
    pass


class FormatMismatch(JudgeError):
    pass


class EmptyList(JudgeError):
    pass


@dataclass(frozen=True)
class NuggetSheet:
    """One rubric sheet: 20 scored nuggets, optionally per-argument."""

    nuggets: tuple[tuple[str, Optional[int]], ...]
    per_argument_scores: Optional[tuple[tuple[int, int], ...]] = None
    preferences: Optional[tuple[str, ...]] = None

    def __post_init__(self):
        if len(self.nuggets) != NUGGET_COUNT:
            raise ValueError(f"a nugget sheet holds exactly {NUGGET_COUNT} nuggets")


@dataclass(frozen=True)
class JudgeVerdict:
    format: str
    context_relevance_overall: Optional[float] = None
    context_relevance_per_doc: Optional[tuple[float, ...]] = None
    answer_relevance: Optional[float] = None
    groundedness: Optional[float] = None
    preference: Optional[str] = None
    quality_ratings: Optional[dict[str, float]] = field(default=None, hash=False)
    explanations: dict[str, str] = field(default_factory=dict, hash=False)
    raw_reply: str = ""

    def __post_init__(self):
        if self.format not in JUDGE_FORMATS:
            raise ValueError(f"unknown judge format {self.format!r}")
        if self.preference is not None and self.preference not in PREFERENCES:
            raise ValueError(f"preference must be one of {PREFERENCES}")


# ---------------------------------------------------------------------------
# primitives


def normalize_score(raw: float, scale: tuple[float, float]) -> float:
    """Affine map of raw onto [0,1], clamped at both ends."""
    lo, hi = scale
    if hi <= lo:
        raise ValueError("scale max must exceed min")
    return min(1.0, max(0.0, (raw - lo) / (hi - lo)))


def predicted_precision(
    per_doc_scores: Sequence[float], threshold: float = DEFAULT_PRECISION_THRESHOLD
) -> float:
    """Fraction of documents the judge rates at or above the threshold."""
    if not per_doc_scores:
        raise EmptyList("predicted precision needs at least one per-document score")
    return sum(1 for s in per_doc_scores if s >= threshold) / len(per_doc_scores)


def dimension_orderings(seed: int) -> list[tuple[str, ...]]:
    """Canonical order, its reverse, and a seeded shuffle."""
    canonical = QUALITY_DIMENSIONS
    shuffled = list(canonical)
    random.Random(derive_seed(seed, "dimension_shuffle")).shuffle(shuffled)
    return [canonical, tuple(reversed(canonical)), tuple(shuffled)]


_FENCE_RE = re.compile(r"^```[a-zA-Z]*\s*|\s*```$")


def extract_json_object(reply: str) -> dict:
    """Parse a reply as one JSON object, with a single repair pass."""
    text = reply.strip()
    try:
        obj = json.loads(text)
        if isinstance(obj, dict):
            return obj
    except json.JSONDecodeError:
        pass
    repaired = _FENCE_RE.sub("", text).strip()
    start = repaired.find("{")
    end = repaired.rfind("}")
    if start == -1 or end <= start:
        raise JudgeParseError("no JSON object found in reply")
    try:
        obj = json.loads(repaired[start : end + 1])
    except json.JSONDecodeError as exc:
        raise JudgeParseError(f"unparseable JSON after repair: {exc}")
    if not isinstance(obj, dict):
        raise JudgeParseError("reply JSON is not an object")
    return obj


def _require_number(value: object, scale: tuple[float, float], label: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise JudgeParseError(f"{label} is not a number: {value!r}")
    lo, hi = scale
    if not lo <= float(value) <= hi:
        raise JudgeParseError(f"{label}={value} outside raw scale [{lo}, {hi}]")
    return float(value)


# ---------------------------------------------------------------------------
# per-format parsers


def _parse_direct(obj: dict, scale: tuple[float, float]) -> JudgeVerdict:
    score = _require_number(obj.get("score"), scale, "score")
    return JudgeVerdict(
        format="direct",
        context_relevance_overall=normalize_score(score, scale),
        explanations={"context_relevance": str(obj.get("explanation", ""))},
    )


def _parse_static_rubric(obj: dict) -> JudgeVerdict:
    scores = obj.get("scores")
    if not isinstance(scores, dict):
        raise JudgeParseError("static rubric reply lacks a scores object")
    flags = []
    for key in STATIC_RUBRIC_KEYS:
        value = scores.get(key)
        if not isinstance(value, bool):
            raise JudgeParseError(f"criterion {key} missing or not boolean")
        flags.append(value)
    return JudgeVerdict(
        format="static_rubric",
        context_relevance_overall=sum(flags) / len(flags),
        explanations={"context_relevance": str(obj.get("explanation", ""))},
    )


def _parse_g_eval(obj: dict, scale: tuple[float, float]) -> JudgeVerdict:
    score = _require_number(obj.get("score"), scale, "score")
    return JudgeVerdict(
        format="g_eval",
        context_relevance_overall=normalize_score(score, scale),
        explanations={"context_relevance": str(obj.get("explanation", ""))},
    )


def parse_nugget_list(raw: object, scale: tuple[float, float]) -> NuggetSheet:
    """Query-rubric style: a list of 20 single-entry {statement: score} maps."""
    if not isinstance(raw, list):
        raise JudgeParseError("nuggets is not a list")
    if len(raw) != NUGGET_COUNT:
        raise JudgeParseError(f"expected {NUGGET_COUNT} nuggets, got {len(raw)}")
    items: list[tuple[str, Optional[int]]] = []
    for entry in raw:
        if not isinstance(entry, dict) or len(entry) != 1:
            raise JudgeParseError("each nugget must be a single {statement: score} map")
        (statement, score), = entry.items()
        items.append((str(statement), int(_require_number(score, scale, "nugget score"))))
    return NuggetSheet(nuggets=tuple(items))


def _parse_query_rubric(obj: dict, scale: tuple[float, float]) -> JudgeVerdict:
    sheet = parse_nugget_list(obj.get("nuggets"), scale)
    mean_raw = statistics.fmean(score for _, score in sheet.nuggets)
    return JudgeVerdict(
        format="query_rubric",
        context_relevance_overall=normalize_score(mean_raw, scale),
    )


def _nugget_map(section: object, label: str) -> dict:
    if not isinstance(section, dict) or not isinstance(section.get("nuggets"), dict):
        raise JudgeParseError(f"{label} section lacks a nuggets map")
    nuggets = section["nuggets"]
    if len(nuggets) != NUGGET_COUNT:
        raise JudgeParseError(
            f"{label} has {len(nuggets)} nuggets, expected {NUGGET_COUNT}"
        )
    return nuggets


def _majority_preference(votes: Sequence[str]) -> str:
    counts = {"argument_1": 0, "argument_2": 0, "tie": 0}
    for vote in votes:
        counts[vote] += 1
    if counts["argument_1"] > counts["argument_2"] and counts["argument_1"] >= counts["tie"]:
        return "argument_1"
    if counts["argument_2"] > counts["argument_1"] and counts["argument_2"] >= counts["tie"]:
        return "argument_2"
    return "tie"


def _parse_rag_rubric(obj: dict, scale: tuple[float, float]) -> JudgeVerdict:
    ctx = _nugget_map(obj.get("context_relevance"), "context_relevance")
    ans = _nugget_map(obj.get("answer_relevance"), "answer_relevance")
    grd = _nugget_map(obj.get("answer_groundedness"), "answer_groundedness")
    prefs = _nugget_map(
        obj.get("argument_preference_evaluation"), "argument_preference_evaluation"
    )

    ctx_scores = [
        _require_number(v, scale, "context nugget") for v in ctx.values()
    ]

    def argument_1_scores(nuggets: dict, label: str) -> list[float]:
        out = []
        for statement, pair in nuggets.items():
            if not isinstance(pair, dict) or "Argument 1" not in pair:
                raise JudgeParseError(f"{label} nugget lacks per-argument scores")
            out.append(_require_number(pair["Argument 1"], scale, label))
        return out

    votes = []
    for statement, vote in prefs.items():
        if vote == "Argument 1":
            votes.append("argument_1")
        elif vote == "Argument 2":
            votes.append("argument_2")
        elif vote == "Both":
            votes.append("tie")
        else:
            raise JudgeParseError(f"unknown preference vote {vote!r}")

    return JudgeVerdict(
        format="rag_rubric",
        context_relevance_overall=normalize_score(statistics.fmean(ctx_scores), scale),
        answer_relevance=normalize_score(
            statistics.fmean(argument_1_scores(ans, "answer_relevance")), scale
        ),
        groundedness=normalize_score(
            statistics.fmean(argument_1_scores(grd, "answer_groundedness")), scale
        ),
        preference=_majority_preference(votes),
    )


def _parse_rag_direct(obj: dict, scale: tuple[float, float]) -> JudgeVerdict:
    def section_score(name: str) -> tuple[float, str]:
        section = obj.get(name)
        if not isinstance(section, dict):
            raise JudgeParseError(f"missing section {name}")
        score = _require_number(section.get("score_argument_1"), scale, name)
        return score, str(section.get("explanation", ""))

    ctx, ctx_note = section_score("context_relevance")
    ans, ans_note = section_score("answer_relevance")
    grd, grd_note = section_score("answer_groundedness")
    pref_section = obj.get("argument_preference_evaluation")
    if not isinstance(pref_section, dict):
        raise JudgeParseError("missing section argument_preference_evaluation")
    raw_pref = pref_section.get("preference")
    mapping = {"Argument 1": "argument_1", "Argument 2": "argument_2", "Tie": "tie"}
    if raw_pref not in mapping:
        raise JudgeParseError(f"unknown preference {raw_pref!r}")
    return JudgeVerdict(
        format="rag_direct",
        context_relevance_overall=normalize_score(ctx, scale),
        answer_relevance=normalize_score(ans, scale),
        groundedness=normalize_score(grd, scale),
        preference=mapping[raw_pref],
        explanations={
            "context_relevance": ctx_note,
            "answer_relevance": ans_note,
            "answer_groundedness": grd_note,
            "preference": str(pref_section.get("explanation", "")),
        },
    )


def _rating_entry(value: object, scale: tuple[float, float], label: str) -> tuple[float, str]:
    if not isinstance(value, dict):
        raise JudgeParseError(f"{label} entry is not an object")
    rating = _require_number(value.get("rating"), scale, f"{label} rating")
    return rating, str(value.get("explanation", ""))


def _parse_quality_ratings(
    obj: dict, scale: tuple[float, float]
) -> tuple[dict[str, float], dict[str, str]]:
    ratings: dict[str, float] = {}
    notes: dict[str, str] = {}
    for dim in QUALITY_DIMENSIONS:
        if dim not in obj:
            raise JudgeParseError(f"missing quality dimension {dim}")
        rating, note = _rating_entry(obj[dim], scale, dim)
        ratings[dim] = rating
        notes[dim] = note
    return ratings, notes


def _parse_listwise_quality(obj: dict, scale: tuple[float, float]) -> JudgeVerdict:
    ratings, notes = _parse_quality_ratings(obj, scale)
    return JudgeVerdict(
        format="listwise_quality", quality_ratings=ratings, explanations=notes
    )


def _parse_listwise_rag(
    obj: dict, scale: tuple[float, float], fmt: str, doc_count: Optional[int]
) -> JudgeVerdict:
    ratings, notes = _parse_quality_ratings(obj, scale)

    per_doc: Optional[tuple[float, ...]] = None
    ctx_overall: float
    ctx_raw = obj.get("context_relevance")
    if fmt == "listwise_rag_fine_grained":
        if not isinstance(ctx_raw, list):
            raise JudgeParseError("fine-grained context_relevance must be a list")
        if doc_count is not None and len(ctx_raw) != doc_count:
            raise LengthMismatch(doc_count, len(ctx_raw))
        if not ctx_raw:
            raise JudgeParseError("fine-grained context_relevance is empty")
        scores = []
        for i, entry in enumerate(ctx_raw, start=1):
            rating, note = _rating_entry(entry, scale, f"context_relevance[{i}]")
            scores.append(normalize_score(rating, scale))
            notes[f"context_relevance_{i}"] = note
        per_doc = tuple(scores)
        ctx_overall = statistics.fmean(scores)
    else:
        rating, note = _rating_entry(ctx_raw, scale, "context_relevance")
        notes["context_relevance"] = note
        ctx_overall = normalize_score(rating, scale)

    ans, ans_note = _rating_entry(obj.get("answer_relevance"), scale, "answer_relevance")
    grd, grd_note = _rating_entry(
        obj.get("answer_groundedness"), scale, "answer_groundedness"
    )
    notes["answer_relevance"] = ans_note
    notes["answer_groundedness"] = grd_note
    return JudgeVerdict(
        format=fmt,
        context_relevance_overall=ctx_overall,
        context_relevance_per_doc=per_doc,
        answer_relevance=normalize_score(ans, scale),
        groundedness=normalize_score(grd, scale),
        quality_ratings=ratings,
        explanations=notes,
    )


def parse_verdict(
    fmt: str,
    reply: str,
    doc_count: Optional[int] = None,
    scale: Optional[tuple[float, float]] = None,
) -> JudgeVerdict:
    """Parse one judge reply into a verdict with normalized scalar scores.

    Quality-dimension ratings stay on their raw scale; everything else is
    mapped onto [0,1].
    """
    if fmt not in JUDGE_FORMATS:
        raise ValueError(f"unknown judge format {fmt!r}")
    scale = scale or RAW_SCALES[fmt]
    obj = extract_json_object(reply)
    if fmt == "direct":
        verdict = _parse_direct(obj, scale)
    elif fmt == "static_rubric":
        verdict = _parse_static_rubric(obj)
    elif fmt == "g_eval":
        verdict = _parse_g_eval(obj, scale)
    elif fmt == "query_rubric":
        verdict = _parse_query_rubric(obj, scale)
    elif fmt == "rag_rubric":
        verdict = _parse_rag_rubric(obj, scale)
    elif fmt == "rag_direct":
        verdict = _parse_rag_direct(obj, scale)
    elif fmt == "listwise_quality":
        verdict = _parse_listwise_quality(obj, scale)
    else:
        verdict = _parse_listwise_rag(obj, scale, fmt, doc_count)
    return _with_raw_reply(verdict, reply)


def _with_raw_reply(verdict: JudgeVerdict, reply: str) -> JudgeVerdict:
    return JudgeVerdict(
        format=verdict.format,
        context_relevance_overall=verdict.context_relevance_overall,
        context_relevance_per_doc=verdict.context_relevance_per_doc,
        answer_relevance=verdict.answer_relevance,
        groundedness=verdict.groundedness,
        preference=verdict.preference,
        quality_ratings=verdict.quality_ratings,
        explanations=verdict.explanations,
        raw_reply=reply,
    )


# ---------------------------------------------------------------------------
# prompt planning and execution


@dataclass
class JudgePromptPlan:
    """A single request, or a two-step plan for step-based formats."""

    first: ChatRequest
    apply_builder: Optional[Callable[[str], ChatRequest]] = None


def build_judge_prompt(
    fmt: str,
    topic: Topic,
    stance: str,
    docs: Sequence[EvidenceDocument],
    argument_a: Optional[str] = None,
    argument_b: Optional[str] = None,
    dimension_order: Optional[Sequence[str]] = None,
    scale: Optional[tuple[float, float]] = None,
    max_output_tokens: int = DEFAULT_JUDGE_MAX_TOKENS,
) -> JudgePromptPlan:
    if fmt not in JUDGE_FORMATS:
        raise ValueError(f"unknown judge format {fmt!r}")
    scale = scale or RAW_SCALES[fmt]
    doc_texts = [d.text for d in docs]
    ordering = tuple(dimension_order) if dimension_order else QUALITY_DIMENSIONS
    if set(ordering) != set(QUALITY_DIMENSIONS):
        raise UnsupportedCombination("dimension_order must cover all 15 dimensions")

    needs_two_arguments = fmt in ("rag_rubric", "rag_direct")
    needs_argument = needs_two_arguments or fmt.startswith("listwise")
    if needs_argument and argument_a is None:
        raise UnsupportedCombination(f"format {fmt} requires an argument")
    if needs_two_arguments and argument_b is None:
        raise MissingArgumentB(f"format {fmt} compares two arguments")

    def request(user_text: str, tag: str) -> ChatRequest:
        return ChatRequest(
            user_text=user_text,
            temperature=0.0,
            max_output_tokens=max_output_tokens,
            tag=tag,
        )

    tag = f"judge:{fmt}:{topic.topic_id}:{stance}"
    if fmt == "direct":
        return JudgePromptPlan(request(prompts.build_direct_prompt(topic.title, doc_texts), tag))
    if fmt == "static_rubric":
        return JudgePromptPlan(
            request(prompts.build_static_rubric_prompt(topic.title, doc_texts), tag)
        )
    if fmt == "g_eval":
        first = request(prompts.build_g_eval_steps_prompt(), tag + ":steps")

        def apply_builder(steps: str) -> ChatRequest:
            return request(
                prompts.build_g_eval_apply_prompt(topic.title, doc_texts, steps.strip()),
                tag + ":apply",
            )

        return JudgePromptPlan(first, apply_builder)
    if fmt == "query_rubric":
        return JudgePromptPlan(
            request(prompts.build_query_rubric_prompt(topic.title, stance, doc_texts), tag)
        )
    if fmt == "rag_rubric":
        return JudgePromptPlan(
            request(
                prompts.build_rag_rubric_prompt(
                    topic.title, stance, doc_texts, argument_a, argument_b
                ),
                tag,
            )
        )
    if fmt == "rag_direct":
        return JudgePromptPlan(
            request(
                prompts.build_rag_direct_prompt(
                    topic.title, stance, doc_texts, argument_a, argument_b
                ),
                tag,
            )
        )
    if fmt == "listwise_quality":
        return JudgePromptPlan(
            request(
                prompts.build_listwise_quality_prompt(
                    topic.title, argument_a, ordering, scale=(int(scale[0]), int(scale[1]))
                ),
                tag,
            )
        )
    return JudgePromptPlan(
        request(
            prompts.build_listwise_rag_prompt(
                topic.title,
                stance,
                doc_texts,
                argument_a,
                ordering,
                scale=(int(scale[0]), int(scale[1])),
                per_document=fmt == "listwise_rag_fine_grained",
            ),
            tag,
        )
    )


def run_judge(
    backend: Backend,
    fmt: str,
    topic: Topic,
    stance: str,
    docs: Sequence[EvidenceDocument],
    argument_a: Optional[str] = None,
    argument_b: Optional[str] = None,
    dimension_order: Optional[Sequence[str]] = None,
    scale: Optional[tuple[float, float]] = None,
) -> JudgeVerdict:
    """Build, complete, parse: one judged evaluation."""
    plan = build_judge_prompt(
        fmt,
        topic,
        stance,
        docs,
        argument_a=argument_a,
        argument_b=argument_b,
        dimension_order=dimension_order,
        scale=scale,
    )
    reply = backend.complete(plan.first).text
    if plan.apply_builder is not None:
        reply = backend.complete(plan.apply_builder(reply)).text
    return parse_verdict(fmt, reply, doc_count=len(docs), scale=scale)


# ---------------------------------------------------------------------------
# self-consistency


def _majority_rating(values: Sequence[float]) -> float:
    counts: dict[float, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    top = max(counts.values())
    candidates = sorted(v for v, c in counts.items() if c == top)
    if len(candidates) == 1:
        return candidates[0]
    med = statistics.median(candidates)
    if med in candidates:
        return med
    return max(v for v in candidates if v < med)


def _mean_optional(values: Sequence[Optional[float]]) -> Optional[float]:
    present = [v for v in values if v is not None]
    if not present:
        return None
    if len(present) != len(values):
        raise FormatMismatch("scalar field populated in some verdicts but not others")
    return statistics.fmean(present)


def aggregate_self_consistency(
    verdicts: Sequence[JudgeVerdict], mode: str = "mean"
) -> JudgeVerdict:
    """Combine verdicts from different dimension orderings.

    Mean mode averages raw dimension ratings; majority mode takes the
    per-dimension mode with ties broken by median, then the lower rating.
    Scalar fields are averaged in both modes.
    """
    if mode not in ("mean", "majority"):
        raise ValueError("mode must be 'mean' or 'majority'")
    if not verdicts:
        raise FormatMismatch("no verdicts to aggregate")
    fmt = verdicts[0].format
    if any(v.format != fmt for v in verdicts):
        raise FormatMismatch("verdicts span multiple formats")

    ratings: Optional[dict[str, float]] = None
    if verdicts[0].quality_ratings is not None:
        keys = set(verdicts[0].quality_ratings)
        if any(v.quality_ratings is None or set(v.quality_ratings) != keys for v in verdicts):
            raise FormatMismatch("verdicts rate different dimension sets")
        ratings = {}
        for dim in keys:
            values = [v.quality_ratings[dim] for v in verdicts]
            ratings[dim] = (
                statistics.fmean(values) if mode == "mean" else _majority_rating(values)
            )

    per_doc: Optional[tuple[float, ...]] = None
    if verdicts[0].context_relevance_per_doc is not None:
        lists = [v.context_relevance_per_doc for v in verdicts]
        if any(l is None or len(l) != len(lists[0]) for l in lists):
            raise FormatMismatch("per-document score lists differ in length")
        per_doc = tuple(
            statistics.fmean(l[i] for l in lists) for i in range(len(lists[0]))
        )

    preference = None
    votes = [v.preference for v in verdicts if v.preference is not None]
    if votes:
        preference = _majority_preference(votes)

    return JudgeVerdict(
        format=fmt,
        context_relevance_overall=_mean_optional(
            [v.context_relevance_overall for v in verdicts]
        ),
        context_relevance_per_doc=per_doc,
        answer_relevance=_mean_optional([v.answer_relevance for v in verdicts]),
        groundedness=_mean_optional([v.groundedness for v in verdicts]),
        preference=preference,
        quality_ratings=ratings,
    )


# ---------------------------------------------------------------------------
# verdict files


def verdict_to_record(verdict: JudgeVerdict, **extra: object) -> dict:
    record: dict = {
        "format": verdict.format,
        "context_relevance_overall": verdict.context_relevance_overall,
        "context_relevance_per_doc": (
            list(verdict.context_relevance_per_doc)
            if verdict.context_relevance_per_doc is not None
            else None
        ),
        "answer_relevance": verdict.answer_relevance,
        "groundedness": verdict.groundedness,
        "preference": verdict.preference,
        "quality_ratings": dict(verdict.quality_ratings)
        if verdict.quality_ratings is not None
        else None,
        "explanations": dict(verdict.explanations),
        "raw_reply": verdict.raw_reply,
    }
    record.update(extra)
    return record


def verdict_from_record(record: Mapping) -> JudgeVerdict:
    per_doc = record.get("context_relevance_per_doc")
    ratings = record.get("quality_ratings")
    return JudgeVerdict(
        format=record["format"],
        context_relevance_overall=record.get("context_relevance_overall"),
        context_relevance_per_doc=tuple(per_doc) if per_doc is not None else None,
        answer_relevance=record.get("answer_relevance"),
        groundedness=record.get("groundedness"),
        preference=record.get("preference"),
        quality_ratings=dict(ratings) if ratings is not None else None,
        explanations=dict(record.get("explanations", {})),
        raw_reply=record.get("raw_reply", ""),
    )


def write_verdicts(records: Sequence[dict], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=True, sort_keys=True) + "\n")


def read_verdicts(path: str | Path) -> list[dict]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(json.loads(line))
    return out
