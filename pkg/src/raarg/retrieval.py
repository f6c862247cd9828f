"""BM25 retrieval, listwise LLM reranking, and run evaluation.

The reranker follows the sliding-window listwise recipe: prompt the model
with a numbered window of candidates, parse the returned permutation, and
slide the window from the bottom of the list upward so strong documents
can bubble to the top across overlapping windows.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from scipy import stats

from .corpus import CON, PRO, EvidenceDocument, Qrels
from .gateway import Backend, ChatRequest

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)
_BRACKET_ID_RE = re.compile(r"\[(\d+)\]")


class RetrievalError(Exception):
    pass


class EmptyCorpus(RetrievalError):
    pass


class DegenerateVariance(RetrievalError):
    pass


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class BM25Params:
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B


@dataclass
class Index:
    """Okapi BM25 inverted index; immutable once built."""

    postings: dict[str, list[tuple[str, int]]]
    doc_lengths: dict[str, int]
    avg_doc_length: float
    doc_count: int
    params: BM25Params

    def idf(self, term: str) -> float:
        df = len(self.postings.get(term, ()))
        # The +1 inside the log keeps idf positive for very common terms.
        return math.log(1 + (self.doc_count - df + 0.5) / (df + 0.5))


@dataclass(frozen=True)
class RankedList:
    topic_id: str
    items: tuple[tuple[str, float], ...]
    k: int
    stance: Optional[str] = None

    def __post_init__(self):
        seen = set()
        prev: Optional[tuple[float, str]] = None
        for doc_id, score in self.items:
            if doc_id in seen:
                raise ValueError(f"duplicate doc_id {doc_id} in ranked list")
            seen.add(doc_id)
            key = (-score, doc_id)
            if prev is not None and key < prev:
                raise ValueError("items must be sorted by score desc, doc_id asc")
            prev = key

    @property
    def doc_ids(self) -> tuple[str, ...]:
        return tuple(doc_id for doc_id, _ in self.items)


def build_index(
    docs: Iterable[EvidenceDocument], params: BM25Params = BM25Params()
) -> Index:
    postings: dict[str, list[tuple[str, int]]] = {}
    doc_lengths: dict[str, int] = {}
    for doc in docs:
        tokens = tokenize(doc.text)
        doc_lengths[doc.doc_id] = len(tokens)
        counts: dict[str, int] = {}
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for term, tf in counts.items():
            postings.setdefault(term, []).append((doc.doc_id, tf))
    if not doc_lengths:
        raise EmptyCorpus("cannot index an empty document collection")
    avg = sum(doc_lengths.values()) / len(doc_lengths)
    return Index(
        postings=postings,
        doc_lengths=doc_lengths,
        avg_doc_length=avg,
        doc_count=len(doc_lengths),
        params=params,
    )


def bm25_search(
    index: Index,
    query: str,
    k: int,
    topic_id: str = "",
    stance: Optional[str] = None,
) -> RankedList:
    """Top-k documents by Okapi BM25; ties broken by doc_id ascending.

    Only documents matching at least one query term are returned, so an
    all-unknown query yields an empty list.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    k1, b = index.params.k1, index.params.b
    scores: dict[str, float] = {}
    for term in tokenize(query):
        posting = index.postings.get(term)
        if not posting:
            continue
        idf = index.idf(term)
        for doc_id, tf in posting:
            norm = k1 * (1 - b + b * index.doc_lengths[doc_id] / index.avg_doc_length)
            scores[doc_id] = scores.get(doc_id, 0.0) + idf * (tf * (k1 + 1)) / (tf + norm)
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))[:k]
    return RankedList(topic_id=topic_id, items=tuple(ranked), k=k, stance=stance)


def brute_force_bm25(
    docs: Sequence[EvidenceDocument], query: str, k: int, params: BM25Params = BM25Params()
) -> list[tuple[str, float]]:
    """Reference scorer: BM25 computed independently per document.

    Kept deliberately naive (no inverted index) to cross-check bm25_search.
    """
    tokenized = {d.doc_id: tokenize(d.text) for d in docs}
    n = len(docs)
    if n == 0:
        raise EmptyCorpus("cannot score an empty document collection")
    avg = sum(len(t) for t in tokenized.values()) / n
    query_terms = tokenize(query)
    df = {
        term: sum(1 for toks in tokenized.values() if term in toks)
        for term in set(query_terms)
    }
    out: dict[str, float] = {}
    for doc in docs:
        toks = tokenized[doc.doc_id]
        score = 0.0
        matched = False
        for term in query_terms:
            tf = toks.count(term)
            if tf == 0:
                continue
            matched = True
            idf = math.log(1 + (n - df[term] + 0.5) / (df[term] + 0.5))
            norm = params.k1 * (1 - params.b + params.b * len(toks) / avg)
            score += idf * (tf * (params.k1 + 1)) / (tf + norm)
        if matched:
            out[doc.doc_id] = score
    return sorted(out.items(), key=lambda item: (-item[1], item[0]))[:k]


# ---------------------------------------------------------------------------
# listwise reranking

_GENERIC_SYSTEM = (
    "You are an intelligent assistant that can rank documents based on "
    "their relevance to a query."
)

_STANCE_SYSTEM = {
    PRO: (
        "You are an intelligent assistant that ranks documents supporting the "
        "'pro' position of a given controversial query, meaning documents that "
        "provide evidence in favor of the 'pro' argument. For instance, if the "
        "controversial query is 'Is light a particle?', your task is to "
        "retrieve and rank documents that provide evidence supporting the "
        "argument that 'light is a particle.'"
    ),
    CON: (
        "You are an intelligent assistant that ranks documents supporting the "
        "'con' position of a given controversial query, meaning documents that "
        "provide evidence in favor of the 'con' argument. For instance, if the "
        "controversial query is 'Is light a particle?', your task is to "
        "retrieve and rank documents that provide evidence supporting the "
        "argument that 'light is not a particle.'"
    ),
}

_GENERIC_PREAMBLE = (
    "I will provide you with {num} documents, each identified by a number.\n"
    "Rank the documents based on their relevance to the query: {query}.\n"
)

_STANCE_PREAMBLE = (
    "I will provide you with {num} documents, each identified by a number.\n"
    "Rank the documents based on their relevance to supporting the {stance} "
    "position for the controversial query: {query}.\n"
)

_GENERIC_EPILOGUE = (
    "Search Query: {query}.\n"
    "Rank the {num} documents above based on their relevance to the search "
    "query. The documents should be listed in descending order using their "
    "identifiers. The most relevant documents should be listed first. The "
    "output format should be [1] > [2], and so on. Only respond with the "
    "ranking results; do not provide any explanations or additional words."
)

_STANCE_EPILOGUE = (
    "Search Query: {query}.\n"
    "Rank the {num} documents above. Rank the documents based on their "
    "relevance to the {stance} position for the search query. List the "
    "documents in descending order using their identifiers, with the most "
    "relevant documents supporting the '{stance}' position listed first. The "
    "output format should be [1] > [2], and so on. Only respond with the "
    "ranking results; do not provide any explanations or additional words."
)


def build_rerank_prompt(
    query: str,
    doc_texts: Sequence[str],
    instruction_kind: str = "generic",
    stance: Optional[str] = None,
    max_output_tokens: int = 512,
) -> ChatRequest:
    if instruction_kind not in ("generic", "stance_conditioned"):
        raise ValueError(f"unknown instruction_kind {instruction_kind!r}")
    if instruction_kind == "stance_conditioned":
        if stance not in (PRO, CON):
            raise ValueError("stance_conditioned reranking requires a stance")
        system = _STANCE_SYSTEM[stance]
        preamble = _STANCE_PREAMBLE.format(num=len(doc_texts), query=query, stance=stance)
        epilogue = _STANCE_EPILOGUE.format(num=len(doc_texts), query=query, stance=stance)
    else:
        system = _GENERIC_SYSTEM
        preamble = _GENERIC_PREAMBLE.format(num=len(doc_texts), query=query)
        epilogue = _GENERIC_EPILOGUE.format(num=len(doc_texts), query=query)
    body = "".join(
        f"Document {i}:\n{text}\n" for i, text in enumerate(doc_texts, start=1)
    )
    return ChatRequest(
        system_text=system,
        user_text=preamble + body + epilogue,
        temperature=0.0,
        max_output_tokens=max_output_tokens,
        tag="rerank",
    )


def parse_permutation(reply: str, n: int) -> list[int]:
    """Total repair of a model-emitted ranking into a permutation of 1..n.

    Bracketed ids are taken in order of appearance; out-of-range ids are
    dropped, repeats keep their first occurrence, and missing ids are
    appended in ascending order. Never fails.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    seen: set[int] = set()
    order: list[int] = []
    for raw in _BRACKET_ID_RE.findall(reply):
        idx = int(raw)
        if 1 <= idx <= n and idx not in seen:
            seen.add(idx)
            order.append(idx)
    order.extend(i for i in range(1, n + 1) if i not in seen)
    return order


def window_starts(length: int, window: int, stride: int) -> list[int]:
    """Start offsets of the bottom-up sliding windows, last clamped to 0."""
    if length <= window:
        return [0]
    starts = []
    start = length - window
    while start > 0:
        starts.append(start)
        start -= stride
    starts.append(0)
    return starts


def rerank_listwise(
    backend: Backend,
    query: str,
    candidates: RankedList,
    documents: Mapping[str, EvidenceDocument],
    instruction_kind: str = "generic",
    stance: Optional[str] = None,
    window: int = 20,
    stride: int = 10,
) -> RankedList:
    """Sliding-window listwise rerank; output is a permutation of the input.

    Windows run bottom-up and sequentially: each pass reorders a slice in
    place, so later (higher) windows see documents promoted by earlier ones.
    New scores are synthetic descending ranks; the original retrieval scores
    do not survive reranking.
    """
    if stride > window:
        raise ValueError("stride must be <= window")
    if instruction_kind == "stance_conditioned" and stance is None:
        raise ValueError("stance_conditioned reranking requires a stance")
    ordered = list(candidates.doc_ids)
    if len(ordered) > 1:
        for start in window_starts(len(ordered), window, stride):
            chunk = ordered[start:start + window]
            request = build_rerank_prompt(
                query,
                [documents[doc_id].text for doc_id in chunk],
                instruction_kind=instruction_kind,
                stance=stance,
            )
            permutation = parse_permutation(backend.complete(request).text, len(chunk))
            ordered[start:start + window] = [chunk[i - 1] for i in permutation]
    items = tuple(
        (doc_id, float(len(ordered) - rank))
        for rank, doc_id in enumerate(ordered)
    )
    return RankedList(
        topic_id=candidates.topic_id, items=items, k=candidates.k, stance=stance
    )


# ---------------------------------------------------------------------------
# IR metrics

def precision_at_k(ranked: RankedList, qrels: Qrels, k: int) -> float:
    """Fraction of the top k that is relevant; unjudged documents count 0."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(
        1
        for doc_id, _ in ranked.items[:k]
        if qrels.entries.get((ranked.topic_id, doc_id), 0) == 1
    )
    return hits / k


def ndcg_at_k(ranked: RankedList, qrels: Qrels, k: int) -> float:
    """Binary-gain nDCG@k against the topic's full relevant set.

    Zero when the topic has no relevant documents at all.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    relevant = qrels.relevant_docs(ranked.topic_id)
    if not relevant:
        return 0.0
    dcg = sum(
        1.0 / math.log2(rank + 1)
        for rank, (doc_id, _) in enumerate(ranked.items[:k], start=1)
        if doc_id in relevant
    )
    ideal = sum(1.0 / math.log2(rank + 1) for rank in range(1, min(k, len(relevant)) + 1))
    return dcg / ideal


# ---------------------------------------------------------------------------
# significance testing

@dataclass(frozen=True)
class RunComparison:
    per_topic_metrics: dict[str, dict[str, tuple[float, float]]] = field(hash=False)
    raw_p_values: tuple[float, ...] = ()
    adjusted_decisions: tuple[tuple[str, bool], ...] = ()
    alpha: float = 0.05
    degenerate_labels: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.raw_p_values) != len(self.adjusted_decisions):
            raise ValueError("p-values and decisions must align")


def holm_bonferroni(p_values: Sequence[float], alpha: float = 0.05) -> list[bool]:
    """Step-down familywise correction; returns per-hypothesis rejections.

    NaN p-values (degenerate comparisons) are never rejected and do not
    shrink the family size for the rest.
    """
    m = len(p_values)
    order = sorted(
        (i for i in range(m) if not math.isnan(p_values[i])),
        key=lambda i: p_values[i],
    )
    rejected = [False] * m
    for step, idx in enumerate(order):
        if p_values[idx] <= alpha / (m - step):
            rejected[idx] = True
        else:
            break
    return rejected


def paired_ttest(a: Sequence[float], b: Sequence[float]) -> float:
    """Two-sided paired t-test p-value with explicit degenerate handling.

    All-zero differences mean the runs are identical: p = 1.0. Identical
    nonzero differences leave the t statistic undefined; callers must
    flag and skip (DegenerateVariance).
    """
    if len(a) != len(b):
        raise ValueError("paired samples must have equal length")
    if len(a) < 2:
        raise ValueError("need at least 2 pairs")
    diffs = [x - y for x, y in zip(a, b)]
    if all(d == 0 for d in diffs):
        return 1.0
    if len(set(diffs)) == 1:
        raise DegenerateVariance("all paired differences identical and nonzero")
    return float(stats.ttest_rel(a, b).pvalue)


def compare_runs(
    per_topic_a: Mapping[str, float],
    per_topic_b: Mapping[str, float],
    family: Sequence[tuple[str, Mapping[str, float], Mapping[str, float]]] = (),
    alpha: float = 0.05,
    label: str = "b_vs_a",
) -> RunComparison:
    """Paired t-tests with Holm correction across a comparison family.

    The positional pair is the primary comparison; `family` adds further
    labeled (a, b) map pairs corrected jointly with it.
    """
    comparisons = [(label, per_topic_a, per_topic_b)]
    comparisons.extend(family)

    p_values: list[float] = []
    degenerate: list[str] = []
    per_topic_metrics: dict[str, dict[str, tuple[float, float]]] = {}
    for comp_label, map_a, map_b in comparisons:
        if set(map_a) != set(map_b):
            raise ValueError(f"{comp_label}: topic sets differ")
        topics = sorted(map_a)
        if len(topics) < 2:
            raise ValueError(f"{comp_label}: need at least 2 topics")
        a = [map_a[t] for t in topics]
        b = [map_b[t] for t in topics]
        per_topic_metrics[comp_label] = {
            t: (map_a[t], map_b[t]) for t in topics
        }
        try:
            p_values.append(paired_ttest(a, b))
        except DegenerateVariance:
            degenerate.append(comp_label)
            p_values.append(float("nan"))

    rejected = holm_bonferroni(p_values, alpha)
    decisions = tuple(
        (comp_label, reject)
        for (comp_label, _, _), reject in zip(comparisons, rejected)
    )
    return RunComparison(
        per_topic_metrics=per_topic_metrics,
        raw_p_values=tuple(p_values),
        adjusted_decisions=decisions,
        alpha=alpha,
        degenerate_labels=tuple(degenerate),
    )


# ---------------------------------------------------------------------------
# TREC run files

def write_run(ranked_lists: Sequence[RankedList], path: str | Path, tag: str = "raarg") -> None:
    """TREC run format: "topic_id Q0 doc_id rank score tag", bit-exact."""
    lines = []
    for ranked in ranked_lists:
        for rank, (doc_id, score) in enumerate(ranked.items, start=1):
            lines.append(f"{ranked.topic_id} Q0 {doc_id} {rank} {score:.6f} {tag}")
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_run(path: str | Path) -> dict[str, RankedList]:
    by_topic: dict[str, list[tuple[str, float]]] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        topic_id, _, doc_id, _, score, _ = line.split()
        by_topic.setdefault(topic_id, []).append((doc_id, float(score)))
    return {
        topic_id: RankedList(topic_id=topic_id, items=tuple(items), k=len(items))
        for topic_id, items in by_topic.items()
    }
