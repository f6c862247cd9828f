"""Corpus loading, validation, qrels construction, and topic splits.

A corpus directory holds two JSON Lines files:

  topics.jsonl     {topic_id, title, introduction, pro: [...], con: [...],
                    sources: [{local_id, doc_id, title, url?, stance?}]}
  documents.jsonl  {doc_id, url?, text}

Qrels use TREC-style lines "topic_id 0 doc_id grade" throughout.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .gateway import estimate_tokens
from .seeds import derive_seed

PRO = "pro"
CON = "con"
STANCES = (PRO, CON)

STANCE_SCOPES = ("pro", "con", "pro_and_con")


class CorpusError(Exception):
    pass


class MissingFile(CorpusError):
    pass


class MalformedRecord(CorpusError):
    def __init__(self, path: str, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line
        self.reason = reason


class DanglingReference(CorpusError):
    def __init__(self, topic_id: str, doc_id: str):
        super().__init__(f"topic {topic_id} cites unknown document {doc_id}")
        self.topic_id = topic_id
        self.doc_id = doc_id


class InsufficientNegativePool(CorpusError):
    def __init__(self, topic_id: str, needed: int, available: int):
        super().__init__(
            f"topic {topic_id} needs {needed} negatives but only "
            f"{available} other-topic documents exist"
        )
        self.topic_id = topic_id
        self.needed = needed
        self.available = available


@dataclass(frozen=True)
class SourceRef:
    """A citation on a topic page: local number plus the global document id."""

    local_id: int
    doc_id: str
    title: str = ""
    url: Optional[str] = None
    stance: Optional[str] = None

    def __post_init__(self):
        if self.local_id < 1:
            raise ValueError("local_id must be >= 1")
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if self.stance is not None and self.stance not in STANCES:
            raise ValueError(f"stance must be one of {STANCES}, got {self.stance!r}")


@dataclass(frozen=True)
class ReferenceArgument:
    stance: str
    title: str
    paragraphs: tuple[str, ...]

    def __post_init__(self):
        if self.stance not in STANCES:
            raise ValueError(f"stance must be one of {STANCES}")
        if not self.paragraphs:
            raise ValueError("paragraphs must be non-empty")

    @property
    def text(self) -> str:
        return "\n\n".join(self.paragraphs)


@dataclass(frozen=True)
class Topic:
    topic_id: str
    title: str
    introduction: str
    reference_arguments: tuple[ReferenceArgument, ...]
    sources: tuple[SourceRef, ...]

    def __post_init__(self):
        if not self.topic_id:
            raise ValueError("topic_id must be non-empty")
        if not self.title:
            raise ValueError("title must be non-empty")

    def arguments_for(self, stance: str) -> tuple[ReferenceArgument, ...]:
        return tuple(a for a in self.reference_arguments if a.stance == stance)

    def cited_doc_ids(self, stance_scope: str = "pro_and_con") -> tuple[str, ...]:
        """Document ids cited by this topic, filtered by stance scope.

        Sources without a stance count for every scope; order follows the
        page's citation order with duplicates dropped.
        """
        if stance_scope not in STANCE_SCOPES:
            raise ValueError(f"unknown stance scope {stance_scope!r}")
        seen: dict[str, None] = {}
        for src in self.sources:
            if stance_scope != "pro_and_con" and src.stance is not None:
                if src.stance != stance_scope:
                    continue
            seen.setdefault(src.doc_id, None)
        return tuple(seen)


@dataclass(frozen=True)
class EvidenceDocument:
    doc_id: str
    text: str
    url: Optional[str] = None
    token_estimate: int = 0

    def __post_init__(self):
        if not self.doc_id:
            raise ValueError("doc_id must be non-empty")
        if not self.text:
            raise ValueError("text must be non-empty")


@dataclass(frozen=True)
class Corpus:
    topics: tuple[Topic, ...]
    documents: dict[str, EvidenceDocument] = field(hash=False)

    def __post_init__(self):
        seen: set[str] = set()
        for topic in self.topics:
            if topic.topic_id in seen:
                raise CorpusError(f"duplicate topic_id {topic.topic_id}")
            seen.add(topic.topic_id)
            for src in topic.sources:
                if src.doc_id not in self.documents:
                    raise DanglingReference(topic.topic_id, src.doc_id)

    def topic(self, topic_id: str) -> Topic:
        for t in self.topics:
            if t.topic_id == topic_id:
                return t
        raise KeyError(topic_id)

    @property
    def topic_ids(self) -> tuple[str, ...]:
        return tuple(t.topic_id for t in self.topics)


@dataclass(frozen=True)
class Qrels:
    """Binary relevance judgments keyed by (topic_id, doc_id)."""

    entries: dict[tuple[str, str], int] = field(hash=False)
    stance_scope: str = "pro_and_con"

    def __post_init__(self):
        for (tid, did), grade in self.entries.items():
            if grade not in (0, 1):
                raise ValueError(f"grade for ({tid}, {did}) must be 0 or 1")

    def relevant_docs(self, topic_id: str) -> set[str]:
        return {
            did for (tid, did), grade in self.entries.items()
            if tid == topic_id and grade == 1
        }

    def judged_topics(self) -> tuple[str, ...]:
        return tuple(sorted({tid for tid, _ in self.entries}))

    def restricted_to(self, topic_ids: Iterable[str]) -> "Qrels":
        keep = set(topic_ids)
        return Qrels(
            entries={k: v for k, v in self.entries.items() if k[0] in keep},
            stance_scope=self.stance_scope,
        )


@dataclass(frozen=True)
class CorpusSplit:
    train_topics: frozenset[str]
    test_topics: frozenset[str]

    def __post_init__(self):
        if self.train_topics & self.test_topics:
            raise ValueError("train and test topic sets overlap")


# ---------------------------------------------------------------------------
# loading / saving


def _read_jsonl(path: Path) -> list[tuple[int, dict]]:
    if not path.exists():
        raise MissingFile(str(path))
    records = []
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(str(path), line_no, f"invalid JSON: {exc}")
            if not isinstance(obj, dict):
                raise MalformedRecord(str(path), line_no, "record is not an object")
            records.append((line_no, obj))
    if not records:
        raise MalformedRecord(str(path), 0, "file contains no records")
    return records


def _parse_reference_arguments(raw: object, stance: str, path: str, line_no: int):
    if raw is None:
        return []
    if not isinstance(raw, list):
        raise MalformedRecord(path, line_no, f"{stance} must be a list")
    out = []
    for item in raw:
        try:
            out.append(
                ReferenceArgument(
                    stance=stance,
                    title=str(item.get("title", "")),
                    paragraphs=tuple(str(p) for p in item["paragraphs"]),
                )
            )
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            raise MalformedRecord(path, line_no, f"bad {stance} argument: {exc}")
    return out


def load_corpus(path: str | Path, token_ratio: int = 4) -> Corpus:
    """Load and validate a corpus directory.

    Raises MissingFile, MalformedRecord, or DanglingReference; a corpus
    that loads is fully cross-resolved.
    """
    root = Path(path)
    topics_path = root / "topics.jsonl"
    documents_path = root / "documents.jsonl"

    documents: dict[str, EvidenceDocument] = {}
    for line_no, obj in _read_jsonl(documents_path):
        try:
            doc = EvidenceDocument(
                doc_id=str(obj["doc_id"]),
                text=str(obj["text"]),
                url=obj.get("url"),
                token_estimate=estimate_tokens(str(obj["text"]), token_ratio),
            )
        except (KeyError, ValueError) as exc:
            raise MalformedRecord(str(documents_path), line_no, str(exc))
        if doc.doc_id in documents:
            raise MalformedRecord(
                str(documents_path), line_no, f"duplicate doc_id {doc.doc_id}"
            )
        documents[doc.doc_id] = doc

    topics: list[Topic] = []
    for line_no, obj in _read_jsonl(topics_path):
        spath = str(topics_path)
        args = _parse_reference_arguments(obj.get("pro"), PRO, spath, line_no)
        args += _parse_reference_arguments(obj.get("con"), CON, spath, line_no)
        sources = []
        for raw in obj.get("sources", []):
            try:
                sources.append(
                    SourceRef(
                        local_id=int(raw["local_id"]),
                        doc_id=str(raw["doc_id"]),
                        title=str(raw.get("title", "")),
                        url=raw.get("url"),
                        stance=raw.get("stance"),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise MalformedRecord(spath, line_no, f"bad source: {exc}")
        try:
            topics.append(
                Topic(
                    topic_id=str(obj["topic_id"]),
                    title=str(obj["title"]),
                    introduction=str(obj.get("introduction", "")),
                    reference_arguments=tuple(args),
                    sources=tuple(sources),
                )
            )
        except (KeyError, ValueError) as exc:
            raise MalformedRecord(spath, line_no, str(exc))

    return Corpus(topics=tuple(topics), documents=documents)


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    """Write a corpus back out in the directory format load_corpus reads."""
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with (root / "topics.jsonl").open("w", encoding="utf-8") as fh:
        for topic in corpus.topics:
            record = {
                "topic_id": topic.topic_id,
                "title": topic.title,
                "introduction": topic.introduction,
                "pro": [
                    {"title": a.title, "paragraphs": list(a.paragraphs)}
                    for a in topic.arguments_for(PRO)
                ],
                "con": [
                    {"title": a.title, "paragraphs": list(a.paragraphs)}
                    for a in topic.arguments_for(CON)
                ],
                "sources": [
                    {
                        "local_id": s.local_id,
                        "doc_id": s.doc_id,
                        "title": s.title,
                        **({"url": s.url} if s.url is not None else {}),
                        **({"stance": s.stance} if s.stance is not None else {}),
                    }
                    for s in topic.sources
                ],
            }
            fh.write(json.dumps(record, ensure_ascii=True) + "\n")
    with (root / "documents.jsonl").open("w", encoding="utf-8") as fh:
        for doc_id in corpus.documents:
            doc = corpus.documents[doc_id]
            record = {
                "doc_id": doc.doc_id,
                **({"url": doc.url} if doc.url is not None else {}),
                "text": doc.text,
            }
            fh.write(json.dumps(record, ensure_ascii=True) + "\n")


# ---------------------------------------------------------------------------
# qrels


def build_qrels(corpus: Corpus, stance_scope: str = "pro_and_con", seed: int = 0) -> Qrels:
    """Positive grades for cited in-scope sources plus an equal number of
    seeded negatives drawn from documents cited only by other topics.
    """
    if stance_scope not in STANCE_SCOPES:
        raise ValueError(f"unknown stance scope {stance_scope!r}")

    cited_by_topic = {t.topic_id: set(t.cited_doc_ids("pro_and_con")) for t in corpus.topics}

    entries: dict[tuple[str, str], int] = {}
    for topic in corpus.topics:
        positives = topic.cited_doc_ids(stance_scope)
        for doc_id in positives:
            entries[(topic.topic_id, doc_id)] = 1
        # Negatives come from other topics' citations, never this topic's
        # own sources (under any stance).
        pool = sorted(
            {
                doc_id
                for other_id, docs in cited_by_topic.items()
                if other_id != topic.topic_id
                for doc_id in docs
            }
            - cited_by_topic[topic.topic_id]
        )
        needed = len(positives)
        if needed > len(pool):
            raise InsufficientNegativePool(topic.topic_id, needed, len(pool))
        rng = random.Random(derive_seed(seed, "qrels", topic.topic_id))
        for doc_id in rng.sample(pool, needed):
            entries[(topic.topic_id, doc_id)] = 0
    return Qrels(entries=entries, stance_scope=stance_scope)


def write_qrels(qrels: Qrels, path: str | Path) -> None:
    """TREC-style qrels, sorted by topic then document id, bit-exact."""
    lines = [
        f"{tid} 0 {did} {grade}"
        for (tid, did), grade in sorted(qrels.entries.items())
    ]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def read_qrels(path: str | Path, stance_scope: str = "pro_and_con") -> Qrels:
    entries: dict[tuple[str, str], int] = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 4:
            raise MalformedRecord(str(path), line_no, "expected 4 fields")
        tid, _, did, grade = parts
        entries[(tid, did)] = int(grade)
    return Qrels(entries=entries, stance_scope=stance_scope)


# ---------------------------------------------------------------------------
# splits


def split_topics(corpus: Corpus, train_fraction: float, seed: int = 0) -> CorpusSplit:
    """Seeded topic-wise split.

    Train size is floor(fraction * n), with an exact .5 remainder rounded
    up on the train side.
    """
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    ids = sorted(corpus.topic_ids)
    target = train_fraction * len(ids)
    train_size = math.floor(target)
    if target - train_size == 0.5:
        train_size += 1
    rng = random.Random(derive_seed(seed, "split"))
    rng.shuffle(ids)
    return CorpusSplit(
        train_topics=frozenset(ids[:train_size]),
        test_topics=frozenset(ids[train_size:]),
    )
