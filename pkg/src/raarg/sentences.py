"""Sentence segmentation and citation-marker extraction.

The splitter is intentionally simple and fully deterministic: a sentence
ends at '.', '!' or '?' (plus any attached bracketed citation markers)
when what follows is whitespace and then an uppercase letter, a digit, or
the end of the text. Abbrevations like "$3.50" survive because the
terminator is followed directly by a digit, not whitespace.
"""

from __future__ import annotations

import re

_TERMINATORS = ".!?"
_MARKER_RE = re.compile(r"\s*\[\d+(?:\s*,\s*\d+)*\]")
_CITATION_RE = re.compile(r"\[(\d+(?:\s*,\s*\d+)*)\]")


def split_sentences(text: str) -> list[tuple[int, int]]:
    """Return (start, end) character spans that tile the text.

    Whitespace between sentences belongs to the span of the sentence it
    follows, so the spans concatenate back to the original text exactly.
    """
    n = len(text)
    spans: list[tuple[int, int]] = []
    start = 0
    i = 0
    while i < n:
        if text[i] not in _TERMINATORS:
            i += 1
            continue
        j = i + 1
        while True:
            m = _MARKER_RE.match(text, j)
            if m is None:
                break
            j = m.end()
        if j >= n:
            spans.append((start, n))
            start = n
            i = n
            continue
        k = j
        while k < n and text[k].isspace():
            k += 1
        if k == j:
            # No whitespace after the terminator: not a boundary.
            i = j
            continue
        if k >= n:
            spans.append((start, n))
            start = n
            i = n
        elif text[k].isupper() or text[k].isdigit():
            spans.append((start, k))
            start = k
            i = k
        else:
            i = j
    if start < n:
        spans.append((start, n))
    return spans


def sentence_texts(text: str, strip: bool = True) -> list[str]:
    out = [text[a:b] for a, b in split_sentences(text)]
    return [s.strip() for s in out] if strip else out


def extract_citations(text: str) -> list[int]:
    """Citation ids in order of first appearance; "[1, 2]" yields 1 and 2."""
    seen: list[int] = []
    for group in _CITATION_RE.findall(text):
        for raw in group.split(","):
            value = int(raw.strip())
            if value not in seen:
                seen.append(value)
    return seen
