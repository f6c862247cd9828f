"""Shared fixtures: a three-topic toy corpus and a scripted stand-in model.

The scripted model recognizes each prompt family by its fixed opening text
and answers deterministically. Its scoring rules are simple enough to
predict by hand:

  * a document counts as relevant iff it shares a content word (5+ letters)
    with the topic title, so injected documents from other topics always
    score zero;
  * groundedness is the fraction of argument sentences that do not carry
    the contradiction marker the hallucination handler plants;
  * every JSON reply is wrapped in a ```json fence, so the single repair
    pass in the verdict parser is exercised on every call.

The toy corpus is built so that BM25 retrieves exactly the four documents
each topic cites (no title word appears in another topic's documents) and
each acceptance-relevant quantity (true precision, predicted precision,
sensitivity means) is an exact closed-form value.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

import pytest

from raarg import cli
from raarg.config import RunConfig, config_from_dict, save_config
from raarg.corpus import (
    Corpus,
    EvidenceDocument,
    ReferenceArgument,
    SourceRef,
    Topic,
    save_corpus,
    split_topics,
)
from raarg.gateway import ChatRequest, ReplayBackend, ScriptedBackend
from raarg.generation import Argument, argument_from_text
from raarg.sentences import split_sentences

SEED = 13

TOY_LEVELS = (0.0, 25.0, 50.0, 75.0, 100.0)
TOY_HALLUCINATION_LEVELS = (0, 1, 2)
TOY_FORMATS = ("direct", "rag_direct", "listwise_rag_fine_grained")
TOY_CUTOFF = 4

# One full CLI pass: corpus preparation, the generation pipeline, the
# perturbation records, and every validation report. "_ratings" is not a
# subcommand; it drops the human ratings file the agreement stage reads.
CLI_SEQUENCE = (
    "index",
    "qrels",
    "split",
    "pipeline",
    "perturb",
    "_ratings",
    "validate",
    "agreement",
    "report",
)

RATINGS_ROWS = [
    {"label": "argument_quality_human", "rater": rater, "item": f"i{i}", "value": value}
    for rater, values in (
        ("r1", (1, 2, 3, 3, 2, 1)),
        ("r2", (1, 2, 3, 3, 2, 2)),
        ("r3", (1, 2, 3, 3, 1, 1)),
    )
    for i, value in enumerate(values, start=1)
]


# ---------------------------------------------------------------------------
# toy corpus

_TOPICS = (
    (
        "t1",
        "Is solar energy worth the investment?",
        "Falling panel prices have renewed the debate over rooftop adoption.",
        (
            ("d01", "pro", "Solar panels cut household electricity bills measurably. Rooftop solar arrays repay their purchase price within a decade."),
            ("d02", "pro", "Utility records show solar farms delivering cheap daytime electricity. Grid operators report solar output meeting afternoon demand."),
            ("d03", "con", "Solar output drops sharply under cloud cover and at night. Storage needed to smooth solar supply remains expensive."),
            ("d04", "con", "Manufacturing solar modules consumes scarce materials. Recycling retired solar hardware remains an unsolved problem."),
        ),
    ),
    (
        "t2",
        "Should students wear school uniforms?",
        "Dress codes remain a perennial argument between parents and administrators.",
        (
            ("d05", "pro", "Uniforms reduce visible clothing competition among students. Schools with uniforms report fewer dress disputes."),
            ("d06", "pro", "A common uniform simplifies mornings for families. Teachers say uniforms make intruders easier to spot on school grounds."),
            ("d07", "con", "Uniforms suppress personal expression that students value. Forcing identical clothing does not erase social hierarchies."),
            ("d08", "con", "Uniform mandates shift costs onto families who must buy separate school clothing. Secondhand uniform supplies run short."),
        ),
    ),
    (
        "t3",
        "Is nuclear power generation safe?",
        "New reactor designs have reopened an old safety controversy.",
        (
            ("d09", "pro", "Modern nuclear reactors include passive cooling that prevents meltdowns. Regulators audit nuclear plants continuously."),
            ("d10", "pro", "Per unit of output, nuclear power causes fewer deaths than coal. Radiation doses near plants stay below natural background."),
            ("d11", "con", "Nuclear accidents, though rare, contaminate land for decades. Evacuation zones around failed reactors persist for generations."),
            ("d12", "con", "No country has opened a permanent repository for spent nuclear fuel. Interim storage of reactor waste keeps growing."),
        ),
    ),
)


def _reference(stance: str, title: str) -> ReferenceArgument:
    verdict = "deserves support" if stance == "pro" else "does not hold up"
    return ReferenceArgument(
        stance=stance,
        title=f"{stance} reference",
        paragraphs=(
            f"An expert review concluded the position {verdict}. "
            "Primary sources were weighed against each other [1]. "
            "The strongest objections were addressed directly [2].",
        ),
    )


def build_toy_corpus() -> Corpus:
    topics = []
    documents: dict[str, EvidenceDocument] = {}
    for topic_id, title, intro, sources in _TOPICS:
        refs = []
        for local_id, (doc_id, stance, text) in enumerate(sources, start=1):
            documents[doc_id] = EvidenceDocument(doc_id=doc_id, text=text)
            refs.append(
                SourceRef(local_id=local_id, doc_id=doc_id, title=f"source {local_id}", stance=stance)
            )
        topics.append(
            Topic(
                topic_id=topic_id,
                title=title,
                introduction=intro,
                reference_arguments=(_reference("pro", title), _reference("con", title)),
                sources=tuple(refs),
            )
        )
    return Corpus(topics=tuple(topics), documents=documents)


def topic_docs(corpus: Corpus, topic_id: str) -> list[EvidenceDocument]:
    topic = corpus.topic(topic_id)
    return [corpus.documents[d] for d in topic.cited_doc_ids()]


def toy_argument_text(topic_title: str, stance: str) -> str:
    verdict = "holds up" if stance == "pro" else "falls apart"
    claim = topic_title.rstrip("?").lower()
    return (
        f"On balance the claim that {claim} {verdict} under scrutiny. "
        "Reported outcomes back the central reading in detail [1]. "
        "Independent reviews reach the same conclusion across regions [2]. "
        "Critics have not produced counter-evidence of comparable weight [3]."
    )


def make_argument(corpus: Corpus, topic_id: str = "t1", stance: str = "pro") -> Argument:
    text = toy_argument_text(corpus.topic(topic_id).title, stance)
    return Argument(
        topic_id=topic_id,
        stance=stance,
        text=text,
        sentence_spans=tuple(split_sentences(text)),
        generator_tag="fixture",
    )


# ---------------------------------------------------------------------------
# scripted model

HALLUCINATION_MARKER = "Contrary to the evidence"

_STOPWORDS = {"should"}
_WORD_RE = re.compile(r"[a-z0-9]+")
_TOPIC_LINE_RE = re.compile(r"(?m)^(?:TOPIC|QUERY): (.*)$")
_GEN_TOPIC_RE = re.compile(r"(?m)^Topic: (.*)$")
_DOC_HEADER_RE = re.compile(r"(?m)^Document \d+:\n")
_RERANK_DOC_RE = re.compile(r"(?m)^Document \d+:\n(.*)$")
_SEARCH_QUERY_RE = re.compile(r"(?m)^Search Query: (.*)\.$")
_SCALE_RE = re.compile(r"scale from (\d+) to (\d+)")

QUALITY_DIMENSIONS = (
    "local_acceptability",
    "local_relevance",
    "local_sufficiency",
    "cogency",
    "credibility",
    "emotional_appeal",
    "clarity",
    "appropriateness",
    "arrangement",
    "effectiveness",
    "global_acceptability",
    "global_relevance",
    "global_sufficiency",
    "reasonableness",
    "overall_quality",
)

STATIC_RUBRIC_KEYS = (
    "direct_relevance",
    "breadth_of_coverage",
    "quality_of_evidence",
    "applicability_to_argumentation",
    "consistency_with_topic_relevance",
    "noise_and_unrelated_content",
)


def _json_reply(obj: object) -> str:
    return "```json\n" + json.dumps(obj, indent=1) + "\n```"


def _content_tokens(line: str) -> set[str]:
    return {
        word
        for word in _WORD_RE.findall(line.lower())
        if len(word) >= 5 and word not in _STOPWORDS
    }


def _topic_line(text: str) -> str:
    return _TOPIC_LINE_RE.findall(text)[-1]


def _doc_texts(text: str) -> list[str]:
    block = text.split("\nDOCUMENTS:\n", 1)[1]
    for stop in ("\n\nARGUMENT", "\n\nArgument 1:"):
        if stop in block:
            block = block.split(stop, 1)[0]
    return [part.strip() for part in _DOC_HEADER_RE.split(block)[1:]]


def _relevance(topic_line: str, docs: list[str]) -> tuple[list[bool], float]:
    keys = _content_tokens(topic_line)
    flags = [bool(keys & _content_tokens(doc)) for doc in docs]
    return flags, (sum(flags) / len(flags) if flags else 0.0)


def _grounded_fraction(argument_text: str) -> float:
    spans = split_sentences(argument_text)
    if not spans:
        return 1.0
    marked = sum(
        1 for a, b in spans if HALLUCINATION_MARKER in argument_text[a:b]
    )
    return 1.0 - marked / len(spans)


def _two_arguments(text: str) -> tuple[str, str]:
    tail = text.split("\n\nArgument 1:\n", 1)[1]
    first, second = tail.split("\n\nArgument 2:\n", 1)
    return first.strip("\n"), second.rstrip("\n")


def _single_argument(text: str) -> str:
    return text.rsplit("\n\nARGUMENT:\n", 1)[1].rstrip("\n")


def _nuggets(keyword: str, value) -> dict:
    return {"nuggets": {f"nugget {i:02d} about {keyword}": value for i in range(1, 21)}}


def _preference(g1: float, g2: float, tie: str) -> str:
    if g1 > g2:
        return "Argument 1"
    if g2 > g1:
        return "Argument 2"
    return tie


def _reply_rerank(request: ChatRequest) -> str:
    text = request.user_text
    query = _SEARCH_QUERY_RE.search(text).group(1)
    docs = _RERANK_DOC_RE.findall(text)
    flags, _ = _relevance(query, docs)
    order = [i for i in range(len(docs), 0, -1) if flags[i - 1]]
    order += [i for i in range(len(docs), 0, -1) if not flags[i - 1]]
    return " > ".join(f"[{i}]" for i in order)


def _reply_generate(text: str) -> str:
    stance = "pro" if '"pro" stance' in text[:400] else "con"
    title = _GEN_TOPIC_RE.findall(text)[-1]
    return toy_argument_text(title, stance)


def _reply_hallucinate(text: str) -> str:
    n = int(re.search(r"Identify (\d+) sentences", text).group(1))
    tail = text.rsplit("\nARGUMENT:\n", 1)[1]
    if "\nEnsure that exactly" in tail:
        tail = tail.split("\nEnsure that exactly", 1)[0]
    argument = tail.rstrip("\n")
    spans = split_sentences(argument)
    base = len(spans) - n
    out = argument
    modifications = []
    for offset in range(n - 1, -1, -1):
        a, b = spans[base + offset]
        sentence = out[a:b]
        trailing = sentence[len(sentence.rstrip()):]
        replacement = f"{HALLUCINATION_MARKER}, claim {base + offset + 1} is false."
        out = out[:a] + replacement + trailing + out[b:]
        modifications.append(replacement)
    modifications.reverse()
    return _json_reply({"modifications": modifications, "modified_argument": out})


def _reply_direct(text: str) -> str:
    _, frac = _relevance(_topic_line(text), _doc_texts(text))
    return _json_reply({"explanation": "scripted", "score": round(10 * frac)})


def _reply_static_rubric(text: str) -> str:
    _, frac = _relevance(_topic_line(text), _doc_texts(text))
    scores = {
        key: frac >= (i + 0.5) / 6 for i, key in enumerate(STATIC_RUBRIC_KEYS)
    }
    return _json_reply({"explanation": "scripted", "scores": scores})


def _reply_g_eval_steps(text: str) -> str:
    return (
        "1. Read the topic.\n"
        "2. Read every document.\n"
        "3. Check whether each document addresses the topic.\n"
        "4. Assign a rating between 1 and 5."
    )


def _reply_g_eval_apply(text: str) -> str:
    _, frac = _relevance(_topic_line(text), _doc_texts(text))
    return _json_reply({"score": 1 + round(4 * frac)})


def _reply_query_rubric(text: str) -> str:
    topic = _topic_line(text)
    _, frac = _relevance(topic, _doc_texts(text))
    keyword = min(_content_tokens(topic) or {"topic"})
    score = 1 + round(4 * frac)
    nuggets = [{f"nugget {i:02d} about {keyword}": score} for i in range(1, 21)]
    return _json_reply({"nuggets": nuggets})


def _reply_rag_rubric(text: str) -> str:
    topic = _topic_line(text)
    _, frac = _relevance(topic, _doc_texts(text))
    arg1, arg2 = _two_arguments(text)
    g1, g2 = _grounded_fraction(arg1), _grounded_fraction(arg2)
    keyword = min(_content_tokens(topic) or {"topic"})
    ctx = 1 + round(4 * frac)
    grounded = {"Argument 1": 1 + round(4 * g1), "Argument 2": 1 + round(4 * g2)}
    preference = _preference(g1, g2, "Both")
    return _json_reply(
        {
            "context_relevance": _nuggets(keyword, ctx),
            "answer_relevance": _nuggets(keyword, {"Argument 1": 5, "Argument 2": 5}),
            "answer_groundedness": _nuggets(keyword, grounded),
            "argument_preference_evaluation": _nuggets(keyword, preference),
        }
    )


def _reply_rag_direct(text: str) -> str:
    _, frac = _relevance(_topic_line(text), _doc_texts(text))
    arg1, arg2 = _two_arguments(text)
    g1, g2 = _grounded_fraction(arg1), _grounded_fraction(arg2)
    ctx = 1 + round(4 * frac)

    def section(score_1: int, score_2: int) -> dict:
        return {
            "explanation": "scripted",
            "score_argument_1": score_1,
            "score_argument_2": score_2,
        }

    return _json_reply(
        {
            "context_relevance": section(ctx, ctx),
            "answer_relevance": section(5, 5),
            "answer_groundedness": section(1 + round(4 * g1), 1 + round(4 * g2)),
            "argument_preference_evaluation": {
                "explanation": "scripted",
                "preference": _preference(g1, g2, "Tie"),
            },
        }
    )


def _quality_block(rating: int) -> dict:
    return {
        dim: {"explanation": "scripted", "rating": rating}
        for dim in QUALITY_DIMENSIONS
    }


def _reply_listwise_quality(text: str) -> str:
    lo, hi = (int(v) for v in _SCALE_RE.search(text).groups())
    g = _grounded_fraction(_single_argument(text))
    return _json_reply(_quality_block(lo + round((hi - lo) * g)))


def _reply_listwise_rag(text: str) -> str:
    lo, hi = (int(v) for v in _SCALE_RE.search(text).groups())
    flags, frac = _relevance(_topic_line(text), _doc_texts(text))
    g = _grounded_fraction(_single_argument(text))
    obj = _quality_block(lo + round((hi - lo) * g))
    if "granularity of each document" in text:
        obj["context_relevance"] = [
            {"explanation": "scripted", "rating": hi if flag else lo} for flag in flags
        ]
    else:
        obj["context_relevance"] = {
            "explanation": "scripted",
            "rating": lo + round((hi - lo) * frac),
        }
    obj["answer_relevance"] = {"explanation": "scripted", "rating": hi}
    obj["answer_groundedness"] = {
        "explanation": "scripted",
        "rating": lo + round((hi - lo) * g),
    }
    return _json_reply(obj)


_PREFIX_HANDLERS = (
    ("You are provided with a set of 'documents' and an 'argument'", _reply_hallucinate),
    ("You are a RELEVANCE grader, evaluating the relevance and quality", _reply_static_rubric),
    ("You are a RELEVANCE grader, evaluating the relevance of the given", _reply_direct),
    (
        "You will be given a set of documents retrieved for a controversial topic, "
        "and they are to be rated",
        _reply_g_eval_steps,
    ),
    (
        "You will be given a set of documents retrieved for a controversial topic. "
        "Your task is to rate",
        _reply_g_eval_apply,
    ),
    ("You are tasked with generating a list of 20 'nuggets'", _reply_query_rubric),
    ("You are tasked with performing the following analysis", _reply_rag_rubric),
    ("Task: You are tasked with evaluating two arguments", _reply_rag_direct),
    ("You will be provided with an argument for a controversial topic", _reply_listwise_quality),
    ("You will be provided with a (pro or con) argument", _reply_listwise_rag),
    ("Craft a persuasive argument", _reply_generate),
)


def scripted_reply(request: ChatRequest) -> str:
    """Deterministic reply for every prompt family the workbench emits."""
    if request.system_text is not None:
        return _reply_rerank(request)
    for prefix, handler in _PREFIX_HANDLERS:
        if request.user_text.startswith(prefix):
            return handler(request.user_text)
    raise AssertionError(
        f"scripted model got an unrecognized prompt: {request.user_text[:80]!r}"
    )


# ---------------------------------------------------------------------------
# recorded workbench

@dataclass
class Workbench:
    root: Path
    corpus: Corpus
    corpus_dir: Path
    trace_dir: Path
    train_topic: str
    test_topics: tuple[str, ...]

    def config(self, out_dir: Path | str, **overrides) -> RunConfig:
        record: dict = {
            "corpus_dir": str(self.corpus_dir),
            "output_dir": str(out_dir),
            "backend_kind": "replay",
            "trace_dir": str(self.trace_dir),
            "cutoff_k": TOY_CUTOFF,
            "judge_formats": TOY_FORMATS,
            "irrelevance_levels": TOY_LEVELS,
            "hallucination_levels": TOY_HALLUCINATION_LEVELS,
            "train_fraction": 1 / 3,
            "few_shot_topic_ids": (self.train_topic,),
            "seed": SEED,
        }
        record.update(overrides)
        return config_from_dict(record)

    def write_config(self, out_dir: Path, **overrides) -> Path:
        path = out_dir.parent / f"{out_dir.name}.config.json"
        save_config(self.config(out_dir, **overrides), path)
        return path

    def write_ratings(self, out_dir: Path) -> None:
        out_dir.mkdir(parents=True, exist_ok=True)
        with (out_dir / "ratings.jsonl").open("w", encoding="utf-8") as fh:
            for row in RATINGS_ROWS:
                fh.write(json.dumps(row, sort_keys=True) + "\n")

    def drive_cli(self, out_dir: Path, commands=CLI_SEQUENCE) -> Path:
        """Run a full CLI pass into out_dir; returns the config path."""
        config_path = self.write_config(out_dir)
        for command in commands:
            if command == "_ratings":
                self.write_ratings(out_dir)
                continue
            rc = cli.main([command, "--config", str(config_path)])
            assert rc == 0, f"raarg {command} exited {rc}"
        return config_path


def _record_traces(bench: Workbench) -> None:
    recorder = ReplayBackend(bench.trace_dir, record_with=ScriptedBackend(scripted_reply))
    config = bench.config(bench.root / "warm")
    cli.cmd_index(config)
    cli.cmd_qrels(config)
    cli.cmd_split(config)
    cli.cmd_retrieve(config)
    cli.cmd_rerank(config, recorder)
    cli.cmd_generate(config, recorder)
    cli.cmd_judge(config, recorder)
    cli.cmd_perturb(config)
    bench.write_ratings(bench.root / "warm")
    cli.cmd_validate(config, recorder)


@pytest.fixture(scope="session")
def corpus() -> Corpus:
    return build_toy_corpus()


@pytest.fixture()
def backend() -> ScriptedBackend:
    return ScriptedBackend(scripted_reply)


@pytest.fixture(scope="session")
def workbench(tmp_path_factory, corpus) -> Workbench:
    root = tmp_path_factory.mktemp("workbench")
    corpus_dir = root / "corpus"
    save_corpus(corpus, corpus_dir)
    split = split_topics(corpus, 1 / 3, seed=SEED)
    assert len(split.train_topics) == 1
    bench = Workbench(
        root=root,
        corpus=corpus,
        corpus_dir=corpus_dir,
        trace_dir=root / "traces",
        train_topic=next(iter(split.train_topics)),
        test_topics=tuple(sorted(split.test_topics)),
    )
    _record_traces(bench)
    return bench


# ---------------------------------------------------------------------------
# acceptance reporting

ACCEPTANCE_LINES: list[str] = []


def record_criterion(line: str) -> None:
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
