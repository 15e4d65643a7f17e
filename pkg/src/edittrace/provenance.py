"""Per-character origin tracking across the whole editing history.

Every character of the document carries a tag: user-originated, or
system-originated and linked to the accepted suggestion that inserted it.
The tag vector always has exactly one entry per character.

Accepting a suggestion tags only the characters the suggestion actually
introduced: the original and replacement texts are character-aligned and
``equal`` characters keep whatever tag they already had, so accepting a
pure deletion leaves no system trace. A substituted character loses its
provenance (delete plus insert), and a retyped character becomes
user-originated: content is only "the system's" while it descends from an
accepted insertion through equal alignment spans.
"""

from __future__ import annotations

from dataclasses import dataclass

from .alignment import AlignOp, char_align

USER = "user"
SYSTEM = "system"


class LengthMismatch(ValueError):
    """Tag vector length diverged from content length."""


@dataclass(frozen=True)
class CharProvenance:
    origin: str
    edit_id: str | None = None
    new_info: bool = False


USER_TAG = CharProvenance(USER)


@dataclass(frozen=True)
class ProvenanceSnapshot:
    """A document version with its full tag vector."""

    version_id: int
    content: str
    tags: tuple[CharProvenance, ...]

    def __post_init__(self) -> None:
        if len(self.tags) != len(self.content):
            raise LengthMismatch(
                f"{len(self.tags)} tags for {len(self.content)} characters "
                f"in version {self.version_id}"
            )


def system_tag(edit_id: str, new_info: bool) -> CharProvenance:
    return CharProvenance(SYSTEM, edit_id, new_info)


def splice_tags(
    tags: tuple[CharProvenance, ...],
    start: int,
    end: int,
    inserted: tuple[CharProvenance, ...],
) -> tuple[CharProvenance, ...]:
    """Replace the tag range [start, end) with the inserted tags."""
    return tags[:start] + inserted + tags[end:]


def replacement_tags(
    tags: tuple[CharProvenance, ...],
    start: int,
    original: str,
    replacement: str,
    inserted_tag: CharProvenance,
) -> tuple[CharProvenance, ...]:
    """Tags for ``replacement`` when it substitutes ``original`` at ``start``.

    Characters the replacement keeps from the original (equal alignment
    spans) carry their existing tags forward; characters it introduces get
    ``inserted_tag``. A replacement that only deletes yields no new tags.
    """
    out: list[CharProvenance] = []
    src = start
    for span in char_align(original, replacement):
        length = len(span.text)
        if span.op is AlignOp.EQUAL:
            out.extend(tags[src : src + length])
            src += length
        elif span.op is AlignOp.DELETE:
            src += length
        else:
            out.extend([inserted_tag] * length)
    return tuple(out)


def advance_snapshot(
    prev: ProvenanceSnapshot,
    new_content: str,
    inserted_tag: CharProvenance = USER_TAG,
) -> ProvenanceSnapshot:
    """Carry tags forward onto a new content version by character alignment.

    Characters in equal spans keep their tags at their new positions,
    deleted characters drop out, and inserted characters default to
    user-originated unless the triggering command supplies a tag. This is
    the fallback for content-only saves; commands that know their exact
    ranges should use ``splice_tags``/``replacement_tags`` instead.
    """
    spans = char_align(prev.content, new_content)
    tags: list[CharProvenance] = []
    src = 0
    for span in spans:
        length = len(span.text)
        if span.op is AlignOp.EQUAL:
            tags.extend(prev.tags[src : src + length])
            src += length
        elif span.op is AlignOp.DELETE:
            src += length
        else:
            tags.extend([inserted_tag] * length)
    return ProvenanceSnapshot(prev.version_id + 1, new_content, tuple(tags))


@dataclass(frozen=True)
class TraceSpan:
    """A maximal run of system characters sharing one originating edit."""

    start: int
    end: int
    edit_id: str
    new_info: bool


def trace_spans(snapshot: ProvenanceSnapshot) -> list[TraceSpan]:
    """Contiguous system-originated spans, in document order."""
    spans: list[TraceSpan] = []
    run_start: int | None = None
    run_tag: CharProvenance | None = None
    for index, tag in enumerate(snapshot.tags):
        key = (tag.edit_id, tag.new_info) if tag.origin == SYSTEM else None
        run_key = (run_tag.edit_id, run_tag.new_info) if run_tag is not None else None
        if key != run_key:
            if run_tag is not None and run_start is not None:
                spans.append(TraceSpan(run_start, index, run_tag.edit_id or "", run_tag.new_info))
            run_start = index if key is not None else None
            run_tag = tag if key is not None else None
    if run_tag is not None and run_start is not None:
        spans.append(TraceSpan(run_start, len(snapshot.tags), run_tag.edit_id or "", run_tag.new_info))
    return spans


def encode_tags(tags: tuple[CharProvenance, ...]) -> list[list]:
    """Run-length encode a tag vector for persistence."""
    runs: list[list] = []
    for tag in tags:
        if runs and runs[-1][1] == tag.origin and runs[-1][2] == tag.edit_id and runs[-1][3] == tag.new_info:
            runs[-1][0] += 1
        else:
            runs.append([1, tag.origin, tag.edit_id, tag.new_info])
    return runs


def decode_tags(runs: list[list]) -> tuple[CharProvenance, ...]:
    tags: list[CharProvenance] = []
    for count, origin, edit_id, new_info in runs:
        tags.extend([CharProvenance(origin, edit_id, bool(new_info))] * count)
    return tuple(tags)
