"""Warn/Verify workflow and the audit computation over the latest draft.

A pending edit that introduces new information gets a warning and a Verify
action next to Accept/Dismiss. Verification produces search queries the
author can open externally, tracks which were visited, and records a human
judgment. The audit view highlights every surviving system-originated span
with a color class derived purely from (new_info, label).
"""

from __future__ import annotations

import urllib.parse
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping

from .provenance import SYSTEM, ProvenanceSnapshot, trace_spans
from .suggestions import SuggestionRecord, SuggestionStatus

WARNING_TEXT = "Edit contains new unverified information"


class VerificationLabel(str, Enum):
    VERIFIED = "verified"
    INCORRECT = "incorrect"
    NOT_SURE = "not_sure"
    NOT_ENOUGH_TIME = "not_enough_time"
    UNLABELED = "unlabeled"


LABEL_DISPLAY = {
    VerificationLabel.VERIFIED: "Verified",
    VerificationLabel.INCORRECT: "Incorrect",
    VerificationLabel.NOT_SURE: "Not Sure",
    VerificationLabel.NOT_ENOUGH_TIME: "Not Enough Time",
    VerificationLabel.UNLABELED: "Unlabeled",
}

ASSIGNABLE_LABELS = frozenset(
    {
        VerificationLabel.VERIFIED,
        VerificationLabel.INCORRECT,
        VerificationLabel.NOT_SURE,
        VerificationLabel.NOT_ENOUGH_TIME,
    }
)


class InvalidLabel(ValueError):
    pass


class IndexOutOfRange(ValueError):
    pass


@dataclass
class VerificationRecord:
    id: str
    suggestion_id: str
    initiated_at_us: int
    queries: tuple[str, ...]
    visited: set[int] = field(default_factory=set)
    label: VerificationLabel = VerificationLabel.UNLABELED
    labeled_at_us: int | None = None

    @property
    def queries_opened(self) -> bool:
        return bool(self.visited)

    def dump(self) -> dict:
        return {
            "id": self.id,
            "suggestion_id": self.suggestion_id,
            "initiated_at_us": self.initiated_at_us,
            "queries": list(self.queries),
            "visited": sorted(self.visited),
            "label": self.label.value,
            "labeled_at_us": self.labeled_at_us,
            "queries_opened": self.queries_opened,
        }

    @classmethod
    def load(cls, obj: dict) -> "VerificationRecord":
        return cls(
            id=obj["id"],
            suggestion_id=obj["suggestion_id"],
            initiated_at_us=obj["initiated_at_us"],
            queries=tuple(obj["queries"]),
            visited=set(obj["visited"]),
            label=VerificationLabel(obj["label"]),
            labeled_at_us=obj.get("labeled_at_us"),
        )


def warn_check(record: SuggestionRecord) -> str | None:
    """The new-information warning for a suggestion, or None."""
    return WARNING_TEXT if record.edit.new_info else None


def menu_actions(record: SuggestionRecord) -> tuple[str, ...]:
    """Accept/Dismiss menu; new-information edits also get a Verify action."""
    if record.edit.new_info:
        return ("accept", "dismiss", "verify")
    return ("accept", "dismiss")


def record_visit(record: VerificationRecord, query_index: int) -> VerificationRecord:
    if not 0 <= query_index < len(record.queries):
        raise IndexOutOfRange(f"query index {query_index} outside 0..{len(record.queries) - 1}")
    record.visited.add(query_index)
    return record


def assign_label(record: VerificationRecord, label: VerificationLabel | str, now_us: int) -> VerificationRecord:
    try:
        label = VerificationLabel(label)
    except ValueError:
        raise InvalidLabel(f"unknown label {label!r}") from None
    if label not in ASSIGNABLE_LABELS:
        raise InvalidLabel(f"label {label.value} cannot be assigned directly")
    record.label = label
    record.labeled_at_us = now_us
    return record


class HighlightClass(str, Enum):
    NEW_INFO_UNLABELED = "new_info_unlabeled"
    NO_NEW_INFO = "no_new_info"
    VERIFIED = "verified"
    INCORRECT = "incorrect"
    NOT_SURE = "not_sure"


CLASS_COLORS = {
    HighlightClass.NEW_INFO_UNLABELED: "yellow",
    HighlightClass.NO_NEW_INFO: "grey",
    HighlightClass.VERIFIED: "green",
    HighlightClass.INCORRECT: "red",
    HighlightClass.NOT_SURE: "orange",
}

_LABEL_CLASSES = {
    VerificationLabel.VERIFIED: HighlightClass.VERIFIED,
    VerificationLabel.INCORRECT: HighlightClass.INCORRECT,
    VerificationLabel.NOT_SURE: HighlightClass.NOT_SURE,
}


def highlight_class_for(new_info: bool, label: VerificationLabel) -> HighlightClass:
    """Total, deterministic color-class mapping over (new_info, label)."""
    if label in _LABEL_CLASSES:
        return _LABEL_CLASSES[label]
    return HighlightClass.NEW_INFO_UNLABELED if new_info else HighlightClass.NO_NEW_INFO


@dataclass(frozen=True)
class AuditSpan:
    start: int
    end: int
    edit_id: str
    new_info: bool
    label: VerificationLabel
    highlight_class: HighlightClass


@dataclass(frozen=True)
class AuditView:
    """Read-only rendering input: the draft plus its highlighted spans."""

    content: str
    spans: tuple[AuditSpan, ...]


def build_audit_view(
    snapshot: ProvenanceSnapshot,
    labels: Mapping[str, VerificationLabel],
) -> AuditView:
    """Audit view over the latest version; spans come from provenance tracing."""
    spans = []
    for trace in trace_spans(snapshot):
        label = labels.get(trace.edit_id, VerificationLabel.UNLABELED)
        spans.append(
            AuditSpan(
                start=trace.start,
                end=trace.end,
                edit_id=trace.edit_id,
                new_info=trace.new_info,
                label=label,
                highlight_class=highlight_class_for(trace.new_info, label),
            )
        )
    return AuditView(snapshot.content, tuple(spans))


def surviving_edit_ids(tags) -> set[str]:
    """Edit ids with at least one inserted character still in the draft."""
    return {tag.edit_id for tag in tags if tag.origin == SYSTEM and tag.edit_id}


def metric_prevented(records: Iterable[SuggestionRecord], tags) -> float | None:
    """Share of ground-truth-inaccurate suggested edits kept out of the draft.

    An edit counts as present only while at least one character it inserted
    survives, so a suggestion that was accepted and then manually deleted in
    full still counts as prevented. Undefined (None) without any inaccurate
    suggestions.
    """
    suggested = [
        r for r in records
        if r.ground_truth_inaccurate and r.status is not SuggestionStatus.DISCARDED
    ]
    if not suggested:
        return None
    surviving = surviving_edit_ids(tags)
    present = sum(1 for r in suggested if r.id in surviving)
    return 100.0 * (len(suggested) - present) / len(suggested)


def metric_detected(
    records: Iterable[SuggestionRecord],
    tags,
    labels: Mapping[str, VerificationLabel],
) -> float | None:
    """Share of surviving inaccurate edits the auditor labeled Incorrect.

    Undefined (None) when the audited draft holds no inaccurate edits.
    """
    surviving = surviving_edit_ids(tags)
    inaccurate = [r for r in records if r.ground_truth_inaccurate and r.id in surviving]
    if not inaccurate:
        return None
    detected = sum(1 for r in inaccurate if labels.get(r.id) is VerificationLabel.INCORRECT)
    return 100.0 * detected / len(inaccurate)


def false_positive_incorrect(
    records: Iterable[SuggestionRecord],
    tags,
    labels: Mapping[str, VerificationLabel],
) -> int:
    """Surviving accurate edits mislabeled Incorrect; tracked, not a metric."""
    surviving = surviving_edit_ids(tags)
    return sum(
        1
        for r in records
        if r.ground_truth_inaccurate is False
        and r.id in surviving
        and labels.get(r.id) is VerificationLabel.INCORRECT
    )


def search_url(template: str, query: str) -> str:
    """Fill the configured search-URL template with an encoded query."""
    return template.replace("{query}", urllib.parse.quote_plus(query))
