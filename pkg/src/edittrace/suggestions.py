"""Suggestion lifecycle types and the pure planning rules behind them.

A suggestion is one bound instance of an executable edit. It is created
pending (or discarded outright when its original text is absent) and ends
in exactly one terminal status. The document session owns the mutation
sequencing; this module holds the record types plus the deterministic
planning functions it relies on, so the rules are testable in isolation.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .edits import ComponentTag, DocumentText, ExecutableEdit, OccurrenceSpan, edit_from_obj, edit_to_obj, locate_occurrences


class SuggestionStatus(str, Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    DISMISSED = "dismissed"
    IMPLICITLY_DISMISSED = "implicitly_dismissed"
    DISCARDED = "discarded"


TERMINAL_STATUSES = frozenset(
    {
        SuggestionStatus.ACCEPTED,
        SuggestionStatus.DISMISSED,
        SuggestionStatus.IMPLICITLY_DISMISSED,
        SuggestionStatus.DISCARDED,
    }
)


class SuggestionError(Exception):
    pass


class NotPending(SuggestionError):
    """Accept/dismiss attempted on a suggestion already resolved."""


class StaleSuggestion(SuggestionError):
    """The suggestion's binding no longer holds in the current draft."""


class RangeOutOfBounds(ValueError):
    pass


class PasteCapExceeded(RangeOutOfBounds):
    """Study-mode rejection of replacements longer than the paste cap."""


class UnderlineStyle(str, Enum):
    SOLID = "solid"
    DOTTED = "dotted"
    DASHED = "dashed"
    WAVY = "wavy"


@dataclass
class MarkerDef:
    """A named proactive checker with its underline identity."""

    id: str
    name: str
    underline_style: UnderlineStyle = UnderlineStyle.SOLID
    color: str = "#e91e63"
    description: str | None = None
    visible: bool = True

    def dump(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "underline_style": self.underline_style.value,
            "color": self.color,
            "description": self.description,
            "visible": self.visible,
        }

    @classmethod
    def load(cls, obj: dict) -> "MarkerDef":
        return cls(
            id=obj["id"],
            name=obj["name"],
            underline_style=UnderlineStyle(obj["underline_style"]),
            color=obj["color"],
            description=obj.get("description"),
            visible=bool(obj["visible"]),
        )


# Underline identities for the non-marker components; markers use their
# own definitions. Exact values are theme configuration.
COMPONENT_UNDERLINES = {
    "chat": {"style": "solid", "color": "#000000"},
    "comment": {"style": "dashed", "color": "#7b1fa2"},
    "brainstorm": {"style": "dotted", "color": "#00796b"},
    "marker": {"style": "solid", "color": "#e91e63"},
}

DEFAULT_STUDY_MARKERS = (
    ("Typos", UnderlineStyle.WAVY, "#d32f2f", "Fix typos, spelling and grammatical errors."),
    ("Professional", UnderlineStyle.SOLID, "#f57c00", "Keep the tone professional."),
    ("Formal", UnderlineStyle.DOTTED, "#1976d2", "Prefer formal phrasing over casual language."),
)


@dataclass
class SuggestionRecord:
    id: str
    seq: int
    edit: ExecutableEdit
    span: OccurrenceSpan | None
    origin: str
    status: SuggestionStatus
    created_at_us: int
    resolved_at_us: int | None = None
    dismiss_reason: str | None = None
    thread_id: str | None = None
    ground_truth_inaccurate: bool | None = None
    verification: str | None = None

    def dump(self) -> dict:
        return {
            "id": self.id,
            "seq": self.seq,
            "edit": edit_to_obj(self.edit, quoted_flags=False),
            "span": None if self.span is None else {"start": self.span.start, "end": self.span.end, "version_id": self.span.version_id},
            "origin": self.origin,
            "status": self.status.value,
            "created_at_us": self.created_at_us,
            "resolved_at_us": self.resolved_at_us,
            "dismiss_reason": self.dismiss_reason,
            "thread_id": self.thread_id,
            "ground_truth_inaccurate": self.ground_truth_inaccurate,
            "verification": self.verification,
        }

    @classmethod
    def load(cls, obj: dict) -> "SuggestionRecord":
        span = obj["span"]
        return cls(
            id=obj["id"],
            seq=obj["seq"],
            edit=edit_from_obj(obj["edit"]),
            span=None if span is None else OccurrenceSpan(span["start"], span["end"], span["version_id"]),
            origin=obj["origin"],
            status=SuggestionStatus(obj["status"]),
            created_at_us=obj["created_at_us"],
            resolved_at_us=obj.get("resolved_at_us"),
            dismiss_reason=obj.get("dismiss_reason"),
            thread_id=obj.get("thread_id"),
            ground_truth_inaccurate=obj.get("ground_truth_inaccurate"),
            verification=obj.get("verification"),
        )


def spans_overlap(a: OccurrenceSpan, b: OccurrenceSpan) -> bool:
    return a.start < b.end and b.start < a.end


def underline_for(origin: str, markers: Iterable[MarkerDef]) -> dict:
    """Underline style/color identifying a suggestion's originating component."""
    tag = ComponentTag.parse(origin)
    if tag.base == "marker" and tag.sub is not None:
        for marker in markers:
            if marker.name == tag.sub:
                return {"style": marker.underline_style.value, "color": marker.color}
    return dict(COMPONENT_UNDERLINES[tag.base])


@dataclass(frozen=True)
class RebindPlan:
    """Outcome of revalidating pending suggestions against the draft."""

    assignments: list[tuple[str, OccurrenceSpan]]
    retired: list[str]


def plan_rebinding(content: str, version_id: int, pending: Iterable[SuggestionRecord]) -> RebindPlan:
    """Re-bind pending suggestions to the current draft.

    Records are processed in current span order (creation order on ties)
    and each claims the leftmost occurrence of its original text that does
    not overlap an already claimed span. Records left without a claimable
    occurrence are retired: their binding is no longer executable. The
    claimed spans are pairwise disjoint by construction.
    """
    doc = DocumentText(content, version_id)
    ordered = sorted(pending, key=lambda r: (r.span.start if r.span else 0, r.seq))
    claimed: list[OccurrenceSpan] = []
    assignments: list[tuple[str, OccurrenceSpan]] = []
    retired: list[str] = []
    for record in ordered:
        taken = None
        for occurrence in locate_occurrences(doc, record.edit.original_text):
            if not any(spans_overlap(occurrence, span) for span in claimed):
                taken = occurrence
                break
        if taken is None:
            retired.append(record.id)
        else:
            claimed.append(taken)
            assignments.append((record.id, taken))
    return RebindPlan(assignments, retired)


def shift_span(start: int, end: int, edit_start: int, edit_end: int, inserted_len: int) -> tuple[int, int]:
    """Map an anchored [start, end) range across a replacement of
    [edit_start, edit_end) by ``inserted_len`` characters.

    Text inserted exactly at the anchor start pushes the anchor right;
    text inserted exactly at the anchor end stays outside it. Positions
    inside the replaced range collapse to its start, so a fully deleted
    anchor becomes empty.
    """
    delta = inserted_len - (edit_end - edit_start)
    if start < edit_start:
        new_start = start
    elif start >= edit_end:
        new_start = start + delta
    else:
        new_start = edit_start
    if end <= edit_start:
        new_end = end
    elif end >= edit_end:
        new_end = end + delta
    else:
        new_end = edit_start
    return new_start, max(new_start, new_end)
