"""Controlled degradations with recorded ground truth.

Two perturbation families: replacing retrieved documents with documents
from other topics (irrelevant-context injection) and rewriting cited
sentences into contradictions (hallucination injection). Both record
exactly what changed so downstream judges can be scored against truth.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from .corpus import EvidenceDocument
from .gateway import Backend, ChatRequest
from .generation import Argument, argument_from_text
from .judge_prompts import build_hallucination_prompt
from .judges import JudgeParseError, extract_json_object
from .seeds import derive_seed

HALLUCINATION_MAX_TOKENS = 8192


class PerturbationError(Exception):
    pass


class PoolTooSmall(PerturbationError):
    def __init__(self, needed: int, available: int):
        super().__init__(f"need {needed} replacement documents, pool has {available}")
        self.needed = needed
        self.available = available


class ModificationParseError(PerturbationError):
    pass


class SentenceNotFound(PerturbationError):
    pass


class AmbiguousSentence(PerturbationError):
    pass


def replacement_count(level_percent: float, doc_count: int) -> int:
    """round(level/100 * doc_count) with exact .5 remainders rounded up."""
    if not 0 <= level_percent <= 100:
        raise ValueError("level_percent must be in [0, 100]")
    if float(level_percent).is_integer():
        return (2 * int(level_percent) * doc_count + 100) // 200
    return math.floor(level_percent * doc_count / 100 + 0.5)


@dataclass(frozen=True)
class IrrelevantInjection:
    topic_id: str
    level_percent: float
    replaced_positions: tuple[int, ...]
    injected_doc_ids: tuple[str, ...]
    original_doc_ids: tuple[str, ...]
    resulting_docs: tuple[EvidenceDocument, ...]
    truth_mask: tuple[bool, ...]
    seed: int = 0

    def __post_init__(self):
        if len(self.truth_mask) != len(self.resulting_docs):
            raise ValueError("truth mask must align with resulting documents")
        if len(self.replaced_positions) != len(self.injected_doc_ids):
            raise ValueError("each replaced position needs an injected document")


def inject_irrelevant(
    docs: Sequence[EvidenceDocument],
    pool: Sequence[EvidenceDocument],
    level_percent: float,
    seed: int = 0,
    topic_id: str = "",
) -> IrrelevantInjection:
    """Replace a seeded uniform sample of positions with pool documents.

    Positions are sampled without replacement, as are the replacement
    documents; untouched documents keep their identity and order. The
    pool must be disjoint from the input list.
    """
    doc_ids = {d.doc_id for d in docs}
    overlap = doc_ids & {d.doc_id for d in pool}
    if overlap:
        raise ValueError(f"pool overlaps the document list: {sorted(overlap)[:3]}")
    m = replacement_count(level_percent, len(docs))
    if m > len(pool):
        raise PoolTooSmall(m, len(pool))
    rng = random.Random(derive_seed(seed, "inject_irrelevant", topic_id))
    positions = sorted(rng.sample(range(len(docs)), m))
    replacements = rng.sample(list(pool), m)
    resulting = list(docs)
    for pos, replacement in zip(positions, replacements):
        resulting[pos] = replacement
    mask = tuple(i not in set(positions) for i in range(len(docs)))
    return IrrelevantInjection(
        topic_id=topic_id,
        level_percent=level_percent,
        replaced_positions=tuple(positions),
        injected_doc_ids=tuple(d.doc_id for d in replacements),
        original_doc_ids=tuple(d.doc_id for d in docs),
        resulting_docs=tuple(resulting),
        truth_mask=mask,
        seed=seed,
    )


def true_precision(
    injection: IrrelevantInjection,
    relevant_doc_ids: set[str],
    k: Optional[int] = None,
) -> float:
    """Fraction of the perturbed list that is original AND relevant."""
    n = len(injection.resulting_docs)
    k = n if k is None else min(k, n)
    if k == 0:
        return 0.0
    hits = sum(
        1
        for i in range(k)
        if injection.truth_mask[i] and injection.original_doc_ids[i] in relevant_doc_ids
    )
    return hits / k


# ---------------------------------------------------------------------------
# hallucination injection


@dataclass(frozen=True)
class ModificationReport:
    differing_count: int
    positions: tuple[int, ...]
    passed: bool


@dataclass(frozen=True)
class HallucinationSpec:
    n_sentences: int
    replacements: tuple[tuple[str, str], ...]
    modified_argument: Argument
    verification: ModificationReport
    model_reported_modifications: tuple[str, ...] = ()
    seed: int = 0

    @property
    def passed(self) -> bool:
        return self.verification.passed


def verify_modification(
    original: Argument, modified: Argument, n_expected: int
) -> ModificationReport:
    """Positional sentence diff: pass iff counts match and exactly
    n_expected sentences differ."""
    orig = original.sentences()
    mod = modified.sentences()
    if len(orig) != len(mod):
        return ModificationReport(
            differing_count=abs(len(orig) - len(mod)), positions=(), passed=False
        )
    positions = tuple(i for i, (a, b) in enumerate(zip(orig, mod)) if a != b)
    return ModificationReport(
        differing_count=len(positions),
        positions=positions,
        passed=len(positions) == n_expected,
    )


def apply_replacements(
    argument: Argument, replacements: Sequence[tuple[str, str]]
) -> Argument:
    """Deterministic offline substitution of whole sentences.

    Each original sentence must occur exactly once in the text; all other
    characters are untouched and spans are recomputed.
    """
    text = argument.text
    for original, modified in replacements:
        count = text.count(original)
        if count == 0:
            raise SentenceNotFound(original[:60])
        if count > 1:
            raise AmbiguousSentence(original[:60])
        text = text.replace(original, modified, 1)
    return argument_from_text(
        text,
        topic_id=argument.topic_id,
        stance=argument.stance,
        generator_tag=argument.generator_tag,
    )


def _sentence_pairs(original: Argument, modified: Argument) -> tuple[tuple[str, str], ...]:
    orig = original.sentences()
    mod = modified.sentences()
    return tuple(
        (a, b) for a, b in zip(orig, mod) if a != b
    )


def inject_hallucinations(
    backend: Backend,
    argument: Argument,
    docs: Sequence[EvidenceDocument],
    n_sentences: int,
    seed: int = 0,
) -> HallucinationSpec:
    """Ask the backend to contradict n cited sentences, then verify.

    Verification is a positional sentence diff; one corrective retry is
    attempted on failure, after which the spec is returned with the
    failure recorded. n_sentences = 0 short-circuits to the identity.
    """
    sentence_count = len(argument.sentence_spans)
    if n_sentences > sentence_count:
        raise ValueError(
            f"cannot modify {n_sentences} of {sentence_count} sentences"
        )
    if n_sentences == 0:
        return HallucinationSpec(
            n_sentences=0,
            replacements=(),
            modified_argument=argument,
            verification=ModificationReport(0, (), True),
            seed=seed,
        )

    doc_texts = [d.text for d in docs]
    prompt = build_hallucination_prompt(n_sentences, doc_texts, argument.text)
    retry_suffix = (
        f"\nEnsure that exactly {n_sentences} sentences are modified and that "
        "all other sentences remain unchanged."
    )

    last_spec: Optional[HallucinationSpec] = None
    for attempt, user_text in enumerate((prompt, prompt + retry_suffix)):
        request = ChatRequest(
            user_text=user_text,
            temperature=0.0,
            max_output_tokens=HALLUCINATION_MAX_TOKENS,
            tag=f"hallucinate:{argument.topic_id}:{argument.stance}:{n_sentences}:{attempt}",
        )
        reply = backend.complete(request).text
        try:
            obj = extract_json_object(reply)
        except JudgeParseError as exc:
            raise ModificationParseError(str(exc))
        modifications = obj.get("modifications")
        modified_text = obj.get("modified_argument")
        if not isinstance(modifications, list) or not isinstance(modified_text, str):
            raise ModificationParseError(
                "reply must contain a modifications list and a modified_argument"
            )
        modified = argument_from_text(
            modified_text,
            topic_id=argument.topic_id,
            stance=argument.stance,
            generator_tag="hallucinated",
        )
        report = verify_modification(argument, modified, n_sentences)
        last_spec = HallucinationSpec(
            n_sentences=n_sentences,
            replacements=_sentence_pairs(argument, modified) if report.passed else (),
            modified_argument=modified,
            verification=report,
            model_reported_modifications=tuple(str(m) for m in modifications),
            seed=seed,
        )
        if report.passed:
            return last_spec
    return last_spec


# ---------------------------------------------------------------------------
# manifest records


def injection_to_record(injection: IrrelevantInjection, stance: str = "") -> dict:
    return {
        "kind": "irrelevant_injection",
        "topic_id": injection.topic_id,
        "stance": stance,
        "level_percent": injection.level_percent,
        "seed": injection.seed,
        "replaced_positions": list(injection.replaced_positions),
        "replacements": list(injection.injected_doc_ids),
        "truth_mask": list(injection.truth_mask),
    }


def hallucination_to_record(spec: HallucinationSpec, topic_id: str, stance: str) -> dict:
    return {
        "kind": "hallucination",
        "topic_id": topic_id,
        "stance": stance,
        "n_sentences": spec.n_sentences,
        "seed": spec.seed,
        "replacements": [list(pair) for pair in spec.replacements],
        "verification_passed": spec.passed,
        "differing_positions": list(spec.verification.positions),
    }


def write_perturbation_manifest(records: Sequence[dict], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=True, sort_keys=True) + "\n")
