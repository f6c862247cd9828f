"""Few-shot structured-argument generation under a token budget.

The prompt stacks a stance-specific instruction, worked (Topic, Context,
Argument) examples from the train split, and the numbered candidate
documents, proportionally trimmed so the whole request fits the budget.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Sequence

from .corpus import CON, PRO, EvidenceDocument, Topic
from .gateway import Backend, ChatRequest, estimate_tokens
from .sentences import extract_citations, split_sentences

DEFAULT_TOTAL_BUDGET = 128_000
DEFAULT_EXAMPLE_RESERVE = 16_384
DEFAULT_OUTPUT_RESERVE = 4_096
DEFAULT_GENERATION_TEMPERATURE = 0.3


class GenerationError(Exception):
    pass


class BudgetTooSmall(GenerationError):
    pass


class EmptyGeneration(GenerationError):
    pass


@dataclass(frozen=True)
class Premise:
    text: str
    citations: tuple[int, ...] = ()


@dataclass(frozen=True)
class ArgumentUnit:
    conclusion: str
    premises: tuple[Premise, ...] = ()


@dataclass(frozen=True)
class Argument:
    topic_id: str
    stance: str
    text: str
    units: tuple[ArgumentUnit, ...] = ()
    sentence_spans: tuple[tuple[int, int], ...] = ()
    validation_notes: tuple[str, ...] = ()
    generator_tag: str = ""

    def __post_init__(self):
        if self.stance not in (PRO, CON):
            raise ValueError(f"stance must be pro or con, got {self.stance!r}")

    @property
    def citations(self) -> tuple[int, ...]:
        seen: list[int] = []
        for unit in self.units:
            for premise in unit.premises:
                for c in premise.citations:
                    if c not in seen:
                        seen.append(c)
        return tuple(seen)

    def sentences(self) -> list[str]:
        return [self.text[a:b].strip() for a, b in self.sentence_spans]


@dataclass(frozen=True)
class PromptBudget:
    total_budget: int = DEFAULT_TOTAL_BUDGET
    reserved_for_instructions_and_examples: int = DEFAULT_EXAMPLE_RESERVE
    per_call_output_reserve: int = DEFAULT_OUTPUT_RESERVE

    def __post_init__(self):
        reserves = self.reserved_for_instructions_and_examples + self.per_call_output_reserve
        if reserves >= self.total_budget:
            raise ValueError("reserves must be smaller than the total budget")

    @property
    def document_budget(self) -> int:
        return (
            self.total_budget
            - self.reserved_for_instructions_and_examples
            - self.per_call_output_reserve
        )


# ---------------------------------------------------------------------------
# proportional trimming


def allocate_budget(lengths: Sequence[int], budget: int) -> list[int]:
    """Token counts each document keeps under proportional trimming.

    Each document keeps floor(len_i * budget / total); flooring leftovers
    go one at a time to the largest truncation remainders (ties to the
    earlier document). Every document keeps at least 1 token, so a budget
    below the document count is unsatisfiable.
    """
    if any(l <= 0 for l in lengths):
        raise ValueError("document lengths must be positive")
    n = len(lengths)
    if budget < n:
        raise BudgetTooSmall(f"budget {budget} cannot keep {n} documents non-empty")
    total = sum(lengths)
    if total <= budget:
        return list(lengths)
    shares = [length * budget / total for length in lengths]
    keep = [math.floor(s) for s in shares]
    leftover = budget - sum(keep)
    by_remainder = sorted(range(n), key=lambda i: (-(shares[i] - keep[i]), i))
    for i in by_remainder:
        if leftover == 0:
            break
        if keep[i] < lengths[i]:
            keep[i] += 1
            leftover -= 1
    # Zero-share documents are bumped to one token; shed the excess from
    # the largest allocations so the total stays within budget.
    for i in range(n):
        if keep[i] == 0:
            keep[i] = 1
    while sum(keep) > budget:
        keep[max(range(n), key=lambda i: (keep[i], -i))] -= 1
    return keep


def _truncate_to_tokens(text: str, tokens: int, ratio: int) -> str:
    raw = text.encode("utf-8")
    if estimate_tokens(text, ratio) <= tokens:
        return text
    clipped = raw[: tokens * ratio].decode("utf-8", errors="ignore")
    return clipped if clipped else text[0]


def trim_proportionally(
    docs: Sequence[EvidenceDocument], budget: int, token_ratio: int = 4
) -> list[EvidenceDocument]:
    """Trim each document's tail so the total token estimate fits budget.

    Order and count are preserved; a document under budget pressure keeps
    a prefix (web pages front-load titles and ledes).
    """
    keep = allocate_budget([doc.token_estimate for doc in docs], budget)
    out = []
    for doc, tokens in zip(docs, keep):
        if tokens >= doc.token_estimate:
            out.append(doc)
            continue
        text = _truncate_to_tokens(doc.text, tokens, token_ratio)
        out.append(
            replace(doc, text=text, token_estimate=estimate_tokens(text, token_ratio))
        )
    return out


# ---------------------------------------------------------------------------
# prompt assembly

_PRO_INSTRUCTION = """Craft a persuasive argument that takes a "pro" stance on a given controversial topic (i.e., you are in favor of the topic). For example, if the topic is "Is light a particle?", you would argue in support of the idea that light is indeed a particle. Using the provided documents, construct an argument that integrates multiple points, seamlessly incorporating evidence, historical context, and direct quotes.

Your argument should follow the format shown in the provided examples: each argument should consist of multiple conclusions, with each conclusion followed by a set of premises that justify the conclusion. When referencing information from the documents, include appropriate citation(s) of the relevant documents in the form of [1], [2], etc., at the end of the premise.

Ensure your argument includes detailed reasoning, is well-supported by the documents, and maintains a nuanced narrative that is both rich in detail and complexity. If a document is unrelated to the argument, omit it. Focus on creating a persuasive and human-like argument."""

_CON_INSTRUCTION = """Craft a persuasive argument that takes a "con" stance on a controversial topic (i.e., you oppose the topic). For example, if the topic is "Is light a particle?", you would argue why light is not a particle. Using the provided documents, construct an argument that integrates multiple points, seamlessly incorporating evidence, historical context, and direct quotes.

Your argument should follow the format shown in the provided examples: each argument should consist of multiple conclusions, with each conclusion followed by a set of premises that justify the conclusion. When referencing information from the documents, include appropriate citation(s) of the relevant documents in the form of [1], [2], etc., at the end of the premise.

Ensure your argument includes detailed reasoning, is well-supported by the documents, and maintains a nuanced narrative that is both rich in detail and complexity. If a document is unrelated to the argument, omit it. Focus on creating a persuasive and human-like argument."""


def _context_block(doc_texts: Sequence[str]) -> str:
    return "\n".join(
        f"Document {i}:\n{text}" for i, text in enumerate(doc_texts, start=1)
    )


def assemble_generation_prompt(
    topic: Topic,
    stance: str,
    docs: Sequence[EvidenceDocument],
    few_shot: Sequence[tuple[Topic, Sequence[EvidenceDocument], str]] = (),
    budget: PromptBudget = PromptBudget(),
    temperature: float = DEFAULT_GENERATION_TEMPERATURE,
    token_ratio: int = 4,
) -> ChatRequest:
    """Deterministic few-shot generation request for one (topic, stance).

    few_shot entries are (topic, documents, expert argument text) triples
    drawn from the train split; candidate documents are proportionally
    trimmed into the budget left after both reserves.
    """
    if not docs:
        raise ValueError("docs must be non-empty")
    instruction = _PRO_INSTRUCTION if stance == PRO else _CON_INSTRUCTION

    blocks = [instruction, ""]
    for shot_topic, shot_docs, shot_argument in few_shot:
        blocks.append(f"Topic: {shot_topic.title}")
        blocks.append("Context:")
        blocks.append(_context_block([d.text for d in shot_docs]))
        blocks.append("Argument:")
        blocks.append(shot_argument)
        blocks.append("")

    trimmed = trim_proportionally(docs, budget.document_budget, token_ratio)
    blocks.append(f"Topic: {topic.title}")
    blocks.append("Context:")
    blocks.append(_context_block([d.text for d in trimmed]))
    blocks.append("Argument:")

    return ChatRequest(
        user_text="\n".join(blocks),
        temperature=temperature,
        max_output_tokens=budget.per_call_output_reserve,
        tag=f"generate:{topic.topic_id}:{stance}",
    )


# ---------------------------------------------------------------------------
# response parsing

_CONCLUSION_RE = re.compile(r"^\s*conclusion\s*[:\-]\s*(.*)$", re.IGNORECASE)
_PREMISE_RE = re.compile(r"^\s*premise\s*[:\-]\s*(.*)$", re.IGNORECASE)


def parse_argument_text(text: str) -> tuple[ArgumentUnit, ...]:
    """Recover conclusion/premise units from generated text.

    Explicit "Conclusion:"/"Premise:" line markers take priority; without
    them, each paragraph becomes a unit whose first sentence is the
    conclusion and whose remaining sentences are premises.
    """
    lines = text.splitlines()
    if any(_CONCLUSION_RE.match(line) for line in lines):
        units: list[ArgumentUnit] = []
        conclusion: Optional[str] = None
        premises: list[Premise] = []
        for line in lines:
            m = _CONCLUSION_RE.match(line)
            if m:
                if conclusion is not None:
                    units.append(ArgumentUnit(conclusion, tuple(premises)))
                conclusion = m.group(1).strip()
                premises = []
                continue
            m = _PREMISE_RE.match(line)
            if m and conclusion is not None:
                body = m.group(1).strip()
                premises.append(Premise(body, tuple(extract_citations(body))))
        if conclusion is not None:
            units.append(ArgumentUnit(conclusion, tuple(premises)))
        return tuple(units)

    units = []
    for paragraph in re.split(r"\n\s*\n", text):
        paragraph = paragraph.strip()
        if not paragraph:
            continue
        sents = [paragraph[a:b].strip() for a, b in split_sentences(paragraph)]
        if not sents:
            continue
        units.append(
            ArgumentUnit(
                conclusion=sents[0],
                premises=tuple(
                    Premise(s, tuple(extract_citations(s))) for s in sents[1:]
                ),
            )
        )
    return tuple(units)


def argument_from_text(
    text: str,
    topic_id: str,
    stance: str,
    doc_count: Optional[int] = None,
    generator_tag: str = "",
) -> Argument:
    """Build a validated Argument (units, spans, citation notes) from text."""
    if not text.strip():
        raise EmptyGeneration(f"empty generation for topic {topic_id} ({stance})")
    units = parse_argument_text(text)
    notes: list[str] = []
    if doc_count is not None:
        out_of_range = sorted(
            {
                c
                for unit in units
                for premise in unit.premises
                for c in premise.citations
                if not 1 <= c <= doc_count
            }
        )
        if out_of_range:
            notes.append(
                "out_of_range citations "
                f"{out_of_range} with only {doc_count} documents supplied"
            )
    return Argument(
        topic_id=topic_id,
        stance=stance,
        text=text,
        units=units,
        sentence_spans=tuple(split_sentences(text)),
        validation_notes=tuple(notes),
        generator_tag=generator_tag,
    )


def generate_argument(
    backend: Backend,
    request: ChatRequest,
    topic_id: str,
    stance: str,
    doc_count: Optional[int] = None,
) -> Argument:
    response = backend.complete(request)
    return argument_from_text(
        response.text,
        topic_id=topic_id,
        stance=stance,
        doc_count=doc_count,
        generator_tag=response.backend_id,
    )


# ---------------------------------------------------------------------------
# argument files


def argument_to_record(argument: Argument) -> dict:
    return {
        "topic_id": argument.topic_id,
        "stance": argument.stance,
        "text": argument.text,
        "units": [
            {
                "conclusion": u.conclusion,
                "premises": [
                    {"text": p.text, "citations": list(p.citations)}
                    for p in u.premises
                ],
            }
            for u in argument.units
        ],
        "citations": list(argument.citations),
        "validation_notes": list(argument.validation_notes),
        "generator_tag": argument.generator_tag,
    }


def argument_from_record(record: dict) -> Argument:
    text = record["text"]
    return Argument(
        topic_id=record["topic_id"],
        stance=record["stance"],
        text=text,
        units=tuple(
            ArgumentUnit(
                conclusion=u["conclusion"],
                premises=tuple(
                    Premise(p["text"], tuple(p["citations"])) for p in u["premises"]
                ),
            )
            for u in record.get("units", [])
        ),
        sentence_spans=tuple(split_sentences(text)),
        validation_notes=tuple(record.get("validation_notes", [])),
        generator_tag=record.get("generator_tag", ""),
    )


def write_arguments(arguments: Sequence[Argument], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for argument in arguments:
            fh.write(json.dumps(argument_to_record(argument), ensure_ascii=True) + "\n")


def read_arguments(path: str | Path) -> list[Argument]:
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if line.strip():
            out.append(argument_from_record(json.loads(line)))
    return out
