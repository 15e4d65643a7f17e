"""Executable edit language: parsing, validation, and occurrence binding.

An executable edit is a machine-applicable replacement: a non-empty
``original_text`` that must occur verbatim in the draft, a ``replace_text``
(possibly empty, meaning deletion), the component that produced it, and two
flags. Edits whose original text is absent from the draft are discarded by
``expand_edit``; everything else binds to exact character offsets.

Offsets everywhere are Unicode scalar-value indices (plain Python string
indices), never bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Iterable

COMPONENT_BASES = ("marker", "chat", "comment", "brainstorm")

EDIT_KEYS = ("original_text", "replace_text", "component", "replace_all", "new_info")


class PayloadMalformed(ValueError):
    """The payload bytes are not a JSON array (or object) at all."""


class SchemaViolation(ValueError):
    """An edit object is missing required keys or has wrongly typed values."""


@dataclass(frozen=True)
class ComponentTag:
    """Origin of an edit: a known base component plus a free-form suffix.

    ``marker_TYPO`` parses to base ``marker`` with subcomponent ``TYPO``;
    the suffix keeps its original casing.
    """

    base: str
    sub: str | None = None

    def __str__(self) -> str:
        return self.base if self.sub is None else f"{self.base}_{self.sub}"

    @classmethod
    def parse(cls, raw: str) -> "ComponentTag":
        if not isinstance(raw, str) or not raw:
            raise SchemaViolation(f"component must be a non-empty string, got {raw!r}")
        base, sep, sub = raw.partition("_")
        if base not in COMPONENT_BASES:
            raise SchemaViolation(f"unknown component base {base!r} in {raw!r}")
        return cls(base, sub if sep else None)


@dataclass(frozen=True)
class ExecutableEdit:
    original_text: str
    replace_text: str
    component: ComponentTag
    replace_all: bool = False
    new_info: bool = False


@dataclass(frozen=True)
class DocumentText:
    """A document version: plain text plus a strictly increasing version id."""

    content: str
    version_id: int


@dataclass(frozen=True)
class OccurrenceSpan:
    """Half-open character range [start, end) in a specific document version."""

    start: int
    end: int
    version_id: int


def _parse_flag(value: Any, key: str) -> bool:
    """Accept native booleans and the quoted "0"/"1" wire forms."""
    if isinstance(value, bool):
        return value
    if isinstance(value, int) and value in (0, 1):
        return bool(value)
    if isinstance(value, str) and value in ("0", "1"):
        return value == "1"
    raise SchemaViolation(f"{key} must be a boolean or '0'/'1', got {value!r}")


def edit_from_obj(obj: Any) -> ExecutableEdit:
    """Build one edit from a decoded JSON object; unknown keys are ignored."""
    if not isinstance(obj, dict):
        raise SchemaViolation(f"edit must be an object, got {type(obj).__name__}")
    for key in ("original_text", "replace_text", "component"):
        if key not in obj:
            raise SchemaViolation(f"missing required key {key!r}")
    original = obj["original_text"]
    replace = obj["replace_text"]
    if not isinstance(original, str) or not original:
        raise SchemaViolation(f"original_text must be a non-empty string, got {original!r}")
    if not isinstance(replace, str):
        raise SchemaViolation(f"replace_text must be a string, got {replace!r}")
    component = ComponentTag.parse(obj["component"])
    replace_all = _parse_flag(obj["replace_all"], "replace_all") if "replace_all" in obj else False
    new_info = _parse_flag(obj["new_info"], "new_info") if "new_info" in obj else False
    return ExecutableEdit(original, replace, component, replace_all, new_info)


def edit_to_obj(edit: ExecutableEdit, quoted_flags: bool = True) -> dict:
    """Wire form of an edit. ``quoted_flags`` emits the "0"/"1" string style."""

    def flag(value: bool) -> Any:
        return ("1" if value else "0") if quoted_flags else value

    return {
        "original_text": edit.original_text,
        "replace_text": edit.replace_text,
        "component": str(edit.component),
        "replace_all": flag(edit.replace_all),
        "new_info": flag(edit.new_info),
    }


def parse_edit_payload(raw: bytes | str) -> list[ExecutableEdit]:
    """Parse a payload into edits.

    The payload is a JSON array of edit objects; a single bare object is
    accepted as a one-edit payload. Missing flags default to false and
    unknown extra keys are ignored.
    """
    if isinstance(raw, bytes):
        try:
            raw = raw.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise PayloadMalformed(f"payload is not valid UTF-8: {exc}") from exc
    try:
        decoded = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise PayloadMalformed(f"payload is not valid JSON: {exc}") from exc
    if isinstance(decoded, dict):
        decoded = [decoded]
    if not isinstance(decoded, list):
        raise PayloadMalformed(f"payload must be an array of edits, got {type(decoded).__name__}")
    edits = []
    for index, obj in enumerate(decoded):
        try:
            edits.append(edit_from_obj(obj))
        except SchemaViolation as exc:
            raise SchemaViolation(f"edit {index}: {exc}") from exc
    return edits


def serialize_edits(edits: Iterable[ExecutableEdit], quoted_flags: bool = True) -> bytes:
    return json.dumps([edit_to_obj(e, quoted_flags) for e in edits]).encode("utf-8")


def locate_occurrences(doc: DocumentText, original_text: str) -> list[OccurrenceSpan]:
    """Every exact occurrence of ``original_text``, left to right.

    Matching is case- and whitespace-sensitive with no normalization.
    Self-overlapping occurrences are resolved leftmost-greedy: after a
    match the scan resumes past its end.
    """
    spans = []
    start = 0
    while True:
        found = doc.content.find(original_text, start)
        if found < 0:
            break
        spans.append(OccurrenceSpan(found, found + len(original_text), doc.version_id))
        start = found + len(original_text)
    return spans


def expand_edit(doc: DocumentText, edit: ExecutableEdit) -> list[tuple[ExecutableEdit, OccurrenceSpan]]:
    """Bind an edit to concrete occurrences.

    Absent original text yields an empty list (the edit is discarded by the
    caller). With ``replace_all`` set, one instance per occurrence; otherwise
    only the first occurrence is suggested.
    """
    occurrences = locate_occurrences(doc, edit.original_text)
    if not occurrences:
        return []
    if edit.replace_all:
        return [(edit, span) for span in occurrences]
    return [(edit, occurrences[0])]
