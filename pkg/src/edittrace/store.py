"""Directory-per-document persistence.

Each document owns a directory with an append-only ``events.log`` (one JSON
record per line, UTF-8) and a ``checkpoint.json`` holding the latest state
plus a content checksum. Loading always replays the event log; the
checkpoint is an integrity cross-check, not an alternative source of truth.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path
from typing import Callable

from .config import EngineConfig
from .events import SessionEvent
from .providers import PromptLibrary
from .session import DocumentSession, ReplayError

EVENTS_FILE = "events.log"
CHECKPOINT_FILE = "checkpoint.json"


class StoreCorrupt(Exception):
    """The stored document cannot be loaded consistently."""


def state_digest(checkpoint: dict) -> str:
    return hashlib.sha256(json.dumps(checkpoint, sort_keys=True).encode("utf-8")).hexdigest()


def canonical_json_bytes(obj: dict) -> bytes:
    """Stable serialization shared by the CLI and the audit endpoint."""
    return json.dumps(obj, sort_keys=True, indent=2).encode("utf-8") + b"\n"


def read_event_log(path: Path) -> list[SessionEvent]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise StoreCorrupt(f"cannot read event log {path}: {exc}") from exc
    events = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            events.append(SessionEvent.from_line(line))
        except (ValueError, KeyError) as exc:
            raise StoreCorrupt(f"bad event at line {number} of {path}: {exc}") from exc
    return events


class DocumentStore:
    def __init__(
        self,
        root: Path | str,
        config: EngineConfig | None = None,
        library: PromptLibrary | None = None,
        clock: Callable[[], float] | None = None,
    ) -> None:
        self.root = Path(root)
        self.config = config or EngineConfig()
        self.library = library
        self.clock = clock
        self._flushed: dict[str, int] = {}

    def _doc_dir(self, doc_id: str) -> Path:
        return self.root / doc_id

    def list_ids(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.name for p in self.root.iterdir() if (p / EVENTS_FILE).exists())

    def create(self, template: str, doc_id: str | None = None) -> DocumentSession:
        session = DocumentSession.create(
            template, config=self.config, library=self.library, clock=self.clock, doc_id=doc_id
        )
        self._doc_dir(session.doc_id).mkdir(parents=True, exist_ok=True)
        self.flush(session)
        return session

    def open(self, doc_id: str) -> DocumentSession:
        """Load a document by replaying its event log and checking the checkpoint."""
        doc_dir = self._doc_dir(doc_id)
        events_path = doc_dir / EVENTS_FILE
        if not events_path.exists():
            raise KeyError(f"unknown document {doc_id}")
        events = read_event_log(events_path)
        try:
            session = DocumentSession.replay(events, config=self.config, library=self.library)
        except ReplayError as exc:
            raise StoreCorrupt(f"replay of {doc_id} failed: {exc}") from exc
        if self.clock is not None:
            session._clock = self.clock
        checkpoint_path = doc_dir / CHECKPOINT_FILE
        if checkpoint_path.exists():
            try:
                stored = json.loads(checkpoint_path.read_text(encoding="utf-8"))
            except (OSError, json.JSONDecodeError) as exc:
                raise StoreCorrupt(f"unreadable checkpoint for {doc_id}: {exc}") from exc
            expected = stored.get("digest")
            actual = state_digest(session.checkpoint())
            if expected != actual:
                raise StoreCorrupt(
                    f"checkpoint digest mismatch for {doc_id}: stored {expected}, replayed {actual}"
                )
        self._flushed[doc_id] = len(events)
        return session

    def flush(self, session: DocumentSession) -> None:
        """Append any new events and rewrite the checkpoint atomically."""
        doc_dir = self._doc_dir(session.doc_id)
        doc_dir.mkdir(parents=True, exist_ok=True)
        done = self._flushed.get(session.doc_id, 0)
        new_events = session.events[done:]
        if new_events:
            with (doc_dir / EVENTS_FILE).open("a", encoding="utf-8") as handle:
                for event in new_events:
                    handle.write(event.to_line() + "\n")
            self._flushed[session.doc_id] = len(session.events)
        checkpoint = session.checkpoint()
        record = {"digest": state_digest(checkpoint), "state": checkpoint}
        tmp_path = doc_dir / (CHECKPOINT_FILE + ".tmp")
        tmp_path.write_text(json.dumps(record, sort_keys=True), encoding="utf-8")
        os.replace(tmp_path, doc_dir / CHECKPOINT_FILE)

    def read_meta(self, doc_id: str) -> dict:
        path = self._doc_dir(doc_id) / "meta.json"
        if not path.exists():
            return {}
        return json.loads(path.read_text(encoding="utf-8"))

    def write_meta(self, doc_id: str, meta: dict) -> None:
        path = self._doc_dir(doc_id) / "meta.json"
        path.write_text(json.dumps(meta, sort_keys=True), encoding="utf-8")


def load_document_dir(doc_dir: Path | str, config: EngineConfig | None = None) -> DocumentSession:
    """Open a single stored document directory (CLI entry point)."""
    doc_dir = Path(doc_dir)
    store = DocumentStore(doc_dir.parent, config=config)
    return store.open(doc_dir.name)
