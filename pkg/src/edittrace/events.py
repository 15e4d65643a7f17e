"""Append-only session events.

Every mutation of a document is recorded as one or more events with a
strictly increasing per-document sequence number and an engine-assigned
monotone timestamp. Replaying the log from an empty document reproduces
the final content, provenance, and metrics exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum


class EventKind(str, Enum):
    MANUAL_EDIT = "manual_edit"
    SUGGESTIONS_SUBMITTED = "suggestions_submitted"
    ACCEPTED = "accepted"
    DISMISSED = "dismissed"
    IMPLICITLY_DISMISSED = "implicitly_dismissed"
    DISCARDED = "discarded"
    VERIFICATION_STARTED = "verification_started"
    QUERY_VISITED = "query_visited"
    LABEL_ASSIGNED = "label_assigned"
    SNAPSHOT = "snapshot"
    MODE_SWITCHED = "mode_switched"
    MARKER_CRUD = "marker_crud"
    CONVERSATION_MESSAGE = "conversation_message"


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    at_us: int
    kind: EventKind
    payload: dict

    def to_line(self) -> str:
        return json.dumps(
            {"seq": self.seq, "at_us": self.at_us, "kind": self.kind.value, "payload": self.payload},
            sort_keys=True,
        )

    @classmethod
    def from_line(cls, line: str) -> "SessionEvent":
        obj = json.loads(line)
        return cls(seq=obj["seq"], at_us=obj["at_us"], kind=EventKind(obj["kind"]), payload=obj["payload"])

    def dump(self) -> dict:
        return {"seq": self.seq, "at_us": self.at_us, "kind": self.kind.value, "payload": self.payload}
