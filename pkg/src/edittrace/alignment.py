"""Word- and character-level edit-script alignment.

Both granularities run the same dynamic program over element sequences with
unit insert/delete costs and no substitution move: a replaced element is
always a deletion plus an insertion, never "the same element, changed".
That property is what makes character scripts safe to drive provenance
tracking, because an element only survives an alignment through an ``equal``
span. The implied script cost (total inserted plus deleted elements) is
minimal for this cost model.

Ties between equal-cost scripts are broken deterministically so rendered
diffs and golden tests are stable: within a changed region the forward
script lists deletions before the insertions that replace them, and
insertions attach after an equal run rather than before it.

Word tokenization splits on whitespace, keeping punctuation attached to
words ("Paris." is one token) and keeping whitespace runs as their own
tokens, so concatenating span texts reconstructs either side exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum


class Granularity(str, Enum):
    WORD = "word"
    CHARACTER = "character"


class AlignOp(str, Enum):
    EQUAL = "equal"
    INSERT = "insert"
    DELETE = "delete"


@dataclass(frozen=True)
class AlignmentSpan:
    """A maximal run of one alignment operation at one granularity."""

    op: AlignOp
    text: str
    granularity: Granularity


_TOKEN_RE = re.compile(r"\S+|\s+")


def tokenize(text: str) -> list[str]:
    """Alternating word and whitespace runs; concatenation is the identity."""
    return _TOKEN_RE.findall(text)


def _align(src: list[str], tgt: list[str]) -> list[tuple[AlignOp, str]]:
    n, m = len(src), len(tgt)
    dist = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dist[i][0] = i
    for j in range(m + 1):
        dist[0][j] = j
    for i in range(1, n + 1):
        row = dist[i]
        above = dist[i - 1]
        element = src[i - 1]
        for j in range(1, m + 1):
            if element == tgt[j - 1]:
                row[j] = above[j - 1]
            else:
                row[j] = min(above[j], row[j - 1]) + 1
    # Backtrace prefers insert, then delete, then match. Walking backwards,
    # that fixes the forward script to delete-before-insert.
    ops: list[tuple[AlignOp, str]] = []
    i, j = n, m
    while i > 0 or j > 0:
        if j > 0 and dist[i][j] == dist[i][j - 1] + 1:
            ops.append((AlignOp.INSERT, tgt[j - 1]))
            j -= 1
        elif i > 0 and dist[i][j] == dist[i - 1][j] + 1:
            ops.append((AlignOp.DELETE, src[i - 1]))
            i -= 1
        else:
            ops.append((AlignOp.EQUAL, src[i - 1]))
            i -= 1
            j -= 1
    ops.reverse()
    return ops


def _merge(ops: list[tuple[AlignOp, str]], granularity: Granularity) -> list[AlignmentSpan]:
    spans: list[AlignmentSpan] = []
    for op, text in ops:
        if spans and spans[-1].op == op:
            spans[-1] = AlignmentSpan(op, spans[-1].text + text, granularity)
        else:
            spans.append(AlignmentSpan(op, text, granularity))
    return spans


def word_align(source: str, target: str) -> list[AlignmentSpan]:
    """Minimal word-level edit script between two strings."""
    return _merge(_align(tokenize(source), tokenize(target)), Granularity.WORD)


def char_align(source: str, target: str) -> list[AlignmentSpan]:
    """Minimal character-level edit script between two strings."""
    return _merge(_align(list(source), list(target)), Granularity.CHARACTER)


def script_cost(spans: list[AlignmentSpan]) -> int:
    """Characters inserted plus deleted by the script."""
    return sum(len(span.text) for span in spans if span.op is not AlignOp.EQUAL)


def source_text(spans: list[AlignmentSpan]) -> str:
    return "".join(span.text for span in spans if span.op is not AlignOp.INSERT)


def target_text(spans: list[AlignmentSpan]) -> str:
    return "".join(span.text for span in spans if span.op is not AlignOp.DELETE)


def levenshtein_distance(a: str, b: str) -> int:
    """Classic edit distance with unit substitutions.

    Used for the divergence-over-time analytic; the alignment scripts above
    deliberately use the substitution-free cost model instead.
    """
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb)))
        previous = current
    return previous[-1]


@dataclass(frozen=True)
class DisplayInstruction:
    """One rendering step for a suggestion diff: plain, strike, or insert."""

    kind: str
    text: str


_DISPLAY_KIND = {AlignOp.EQUAL: "plain", AlignOp.DELETE: "strike", AlignOp.INSERT: "insert"}


def render_alignment(spans: list[AlignmentSpan]) -> list[DisplayInstruction]:
    """Display script for the inline view; the hover view reuses it in an overlay."""
    return [DisplayInstruction(_DISPLAY_KIND[span.op], span.text) for span in spans]
