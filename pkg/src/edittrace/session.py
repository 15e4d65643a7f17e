"""Per-document editing session: the single writer for one document.

All mutations (manual edits, suggestion lifecycle, conversations, markers,
verification, mode switches) flow through this object in order, each
appending one or more events to the session log. The client-side draft is
the source of truth: provider results are expanded against the version
current at merge time, and pending suggestions are revalidated after every
content change, so a suggestion whose original text disappeared is
implicitly dismissed rather than applied.

``DocumentSession.replay`` folds an event log back into an identical
session without touching any provider; state is a pure function of the log.
"""

from __future__ import annotations

import time
import uuid
from dataclasses import dataclass, field, replace as dc_replace
from typing import Callable, Sequence

from .alignment import render_alignment, word_align
from .analytics import edit_distance_series, verification_stats
from .config import EngineConfig
from .edits import ComponentTag, DocumentText, ExecutableEdit, OccurrenceSpan, expand_edit
from .events import EventKind, SessionEvent
from .providers import (
    InvalidProviderOutput,
    PromptLibrary,
    SuggestionProvider,
    assemble_prompt,
    call_provider,
    choose_prompt_variant,
    classify_bracket,
    generate_verify_queries,
)
from .provenance import (
    LengthMismatch,
    ProvenanceSnapshot,
    USER_TAG,
    decode_tags,
    encode_tags,
    replacement_tags,
    system_tag,
    trace_spans,
)
from .suggestions import (
    DEFAULT_STUDY_MARKERS,
    MarkerDef,
    NotPending,
    PasteCapExceeded,
    RangeOutOfBounds,
    StaleSuggestion,
    SuggestionRecord,
    SuggestionStatus,
    UnderlineStyle,
    plan_rebinding,
    shift_span,
    spans_overlap,
    underline_for,
)
from .verify import (
    VerificationLabel,
    VerificationRecord,
    assign_label,
    build_audit_view,
    false_positive_incorrect,
    menu_actions,
    metric_detected,
    metric_prevented,
    record_visit,
    search_url,
    warn_check,
)


class WrongMode(Exception):
    """A mutating edit operation was attempted outside edit mode."""


class ThreadResolved(Exception):
    """A resolved comment thread accepts no new messages."""


class DuplicateMarker(ValueError):
    pass


class UnknownId(KeyError):
    pass


class VerificationNotAllowed(ValueError):
    pass


class ReplayError(ValueError):
    """The event log cannot be folded into a consistent state."""


@dataclass
class CommentThread:
    id: str
    anchor_start: int
    anchor_end: int
    messages: list = field(default_factory=list)
    resolved: bool = False

    def dump(self) -> dict:
        return {
            "id": self.id,
            "anchor": {"start": self.anchor_start, "end": self.anchor_end},
            "resolved": self.resolved,
            "messages": list(self.messages),
        }


@dataclass
class Brainstorm:
    """An open paraphrase dropdown; ephemeral, not part of persisted state."""

    id: str
    anchor_start: int
    anchor_end: int
    selected: str
    option_edits: list
    ground_truth: tuple
    stale: bool = False
    consumed: bool = False


_CONTENT_EVENTS = (EventKind.MANUAL_EDIT, EventKind.ACCEPTED)


class DocumentSession:
    def __init__(
        self,
        doc_id: str,
        config: EngineConfig | None = None,
        library: PromptLibrary | None = None,
        clock: Callable[[], float] | None = None,
    ) -> None:
        self.doc_id = doc_id
        self.config = config or EngineConfig()
        self.library = library or PromptLibrary.default()
        self._clock = clock or time.time
        self.content: str = ""
        self.version_id = 0
        self.tags: tuple = ()
        self.mode = "edit"
        self.records: dict[str, SuggestionRecord] = {}
        self.chat_messages: list[dict] = []
        self.chat_turns = 0
        self.comments: dict[str, CommentThread] = {}
        self.brainstorms: dict[str, Brainstorm] = {}
        self.markers: dict[str, MarkerDef] = {}
        self.verifications: dict[str, VerificationRecord] = {}
        self._ver_by_sid: dict[str, str] = {}
        self.events: list[SessionEvent] = []
        self.created_at_us: int | None = None
        self._seq = 0
        self._last_ts_us = 0
        self._last_snapshot_us: int | None = None
        self._counters = {"s": 0, "c": 0, "b": 0, "v": 0, "m": 0}

    # ------------------------------------------------------------------
    # construction

    @classmethod
    def create(
        cls,
        template: str,
        config: EngineConfig | None = None,
        library: PromptLibrary | None = None,
        clock: Callable[[], float] | None = None,
        doc_id: str | None = None,
    ) -> "DocumentSession":
        session = cls(doc_id or uuid.uuid4().hex[:12], config, library, clock)
        session.content = template
        session.version_id = 1
        session.tags = (USER_TAG,) * len(template)
        session._emit_snapshot(force=True)
        session.created_at_us = session.events[0].at_us
        if session.config.study_mode:
            for name, style, color, description in DEFAULT_STUDY_MARKERS:
                session.create_marker(name, style.value, color, description)
        return session

    # ------------------------------------------------------------------
    # event plumbing

    def _next_ts(self) -> int:
        now_us = int(self._clock() * 1_000_000)
        if now_us <= self._last_ts_us:
            now_us = self._last_ts_us + 1
        self._last_ts_us = now_us
        return now_us

    def _emit_at(self, at_us: int, kind: EventKind, payload: dict) -> SessionEvent:
        self._seq += 1
        event = SessionEvent(self._seq, at_us, kind, payload)
        self.events.append(event)
        return event

    def _emit(self, kind: EventKind, payload: dict) -> SessionEvent:
        return self._emit_at(self._next_ts(), kind, payload)

    def _emit_snapshot(self, force: bool = False) -> None:
        debounce_us = int(self.config.snapshot_debounce_s * 1_000_000)
        if (
            not force
            and self._last_snapshot_us is not None
            and self._last_ts_us - self._last_snapshot_us < debounce_us
        ):
            return
        ts = self._next_ts()
        self._last_snapshot_us = ts
        self._emit_at(
            ts,
            EventKind.SNAPSHOT,
            {
                "doc_id": self.doc_id,
                "version_id": self.version_id,
                "content": self.content,
                "tags_rle": encode_tags(self.tags),
            },
        )

    def _new_id(self, prefix: str) -> str:
        self._counters[prefix] += 1
        return f"{self.doc_id}.{prefix}{self._counters[prefix]}"

    # ------------------------------------------------------------------
    # shared mutation helpers (no event emission)

    def _splice(self, start: int, end: int, replacement: str, new_tags: tuple) -> None:
        self.content = self.content[:start] + replacement + self.content[end:]
        self.tags = self.tags[:start] + tuple(new_tags) + self.tags[end:]
        self.version_id += 1
        if len(self.tags) != len(self.content):
            raise LengthMismatch(f"{len(self.tags)} tags for {len(self.content)} characters")
        for thread in self.comments.values():
            thread.anchor_start, thread.anchor_end = shift_span(
                thread.anchor_start, thread.anchor_end, start, end, len(replacement)
            )
        for brainstorm in self.brainstorms.values():
            if brainstorm.consumed or brainstorm.stale:
                continue
            new_anchor = shift_span(
                brainstorm.anchor_start, brainstorm.anchor_end, start, end, len(replacement)
            )
            brainstorm.anchor_start, brainstorm.anchor_end = new_anchor
            if self.content[new_anchor[0] : new_anchor[1]] != brainstorm.selected:
                brainstorm.stale = True

    def _pending(self) -> list[SuggestionRecord]:
        return [r for r in self.records.values() if r.status is SuggestionStatus.PENDING]

    def _apply_rebinding(self) -> list[str]:
        """Re-bind pending suggestions to the current draft; returns retired ids."""
        plan = plan_rebinding(self.content, self.version_id, self._pending())
        for sid, span in plan.assignments:
            self.records[sid].span = span
        return plan.retired

    def _revalidate(self) -> list[str]:
        retired = self._apply_rebinding()
        for sid in retired:
            self._transition(self.records[sid], SuggestionStatus.IMPLICITLY_DISMISSED)
        return retired

    def _transition(self, record: SuggestionRecord, status: SuggestionStatus, reason: str | None = None) -> None:
        ts = self._next_ts()
        record.status = status
        record.resolved_at_us = ts
        record.dismiss_reason = reason
        if status is SuggestionStatus.DISMISSED:
            payload = {"sid": record.id}
            if reason:
                payload["reason"] = reason
            self._emit_at(ts, EventKind.DISMISSED, payload)
        elif status is SuggestionStatus.IMPLICITLY_DISMISSED:
            self._emit_at(ts, EventKind.IMPLICITLY_DISMISSED, {"sid": record.id})
        else:
            raise ValueError(f"unexpected transition to {status}")

    def _require_edit_mode(self) -> None:
        if self.mode != "edit":
            raise WrongMode("the document is in audit mode; switch back to edit first")

    def _check_range(self, start: int, end: int) -> None:
        if not (0 <= start <= end <= len(self.content)):
            raise RangeOutOfBounds(f"range [{start}, {end}) outside document of length {len(self.content)}")

    def _record(self, sid: str) -> SuggestionRecord:
        try:
            return self.records[sid]
        except KeyError:
            raise UnknownId(f"unknown suggestion {sid}") from None

    def _call(self, provider: SuggestionProvider, prompt: str):
        t0 = self._clock()
        reply = call_provider(provider, prompt)
        return reply, max(0.0, self._clock() - t0)

    # ------------------------------------------------------------------
    # commands: editing

    def manual_edit(self, start: int, end: int, replacement: str) -> None:
        self._require_edit_mode()
        self._check_range(start, end)
        if self.config.study_mode and len(replacement) > self.config.paste_cap:
            raise PasteCapExceeded(
                f"replacement of {len(replacement)} characters exceeds the "
                f"{self.config.paste_cap}-character paste cap"
            )
        self._emit(EventKind.MANUAL_EDIT, {"start": start, "end": end, "replacement": replacement})
        self._splice(start, end, replacement, (USER_TAG,) * len(replacement))
        self._revalidate()
        self._emit_snapshot()

    def _submit(
        self,
        edits: Sequence[ExecutableEdit],
        origin: str | None,
        ground_truth: Sequence[bool | None] = (),
        thread_id: str | None = None,
        bind: OccurrenceSpan | None = None,
        latency_s: float | None = None,
    ) -> list[SuggestionRecord]:
        doc = DocumentText(self.content, self.version_id)
        ts = self._next_ts()
        new_records: list[SuggestionRecord] = []
        superseded: dict[str, SuggestionRecord] = {}
        for index, edit in enumerate(edits):
            truth = ground_truth[index] if index < len(ground_truth) else None
            if origin is not None:
                record_origin = origin
            elif edit.component.base == "marker":
                record_origin = str(edit.component)
            else:
                record_origin = "marker"
            instances = [(edit, bind)] if bind is not None else expand_edit(doc, edit)
            if not instances:
                number = self._counters["s"] + 1
                self._counters["s"] = number
                record = SuggestionRecord(
                    id=f"{self.doc_id}.s{number}",
                    seq=number,
                    edit=edit,
                    span=None,
                    origin=record_origin,
                    status=SuggestionStatus.DISCARDED,
                    created_at_us=ts,
                    resolved_at_us=ts,
                    thread_id=thread_id,
                    ground_truth_inaccurate=truth,
                )
                self.records[record.id] = record
                new_records.append(record)
                continue
            for bound_edit, span in instances:
                number = self._counters["s"] + 1
                self._counters["s"] = number
                record = SuggestionRecord(
                    id=f"{self.doc_id}.s{number}",
                    seq=number,
                    edit=bound_edit,
                    span=span,
                    origin=record_origin,
                    status=SuggestionStatus.PENDING,
                    created_at_us=ts,
                    thread_id=thread_id,
                    ground_truth_inaccurate=truth,
                )
                for other in self._pending():
                    if other.id in superseded or other.span is None:
                        continue
                    if spans_overlap(other.span, span):
                        superseded[other.id] = other
                self.records[record.id] = record
                new_records.append(record)
        payload = {
            "origin": origin if origin is not None else "marker",
            "records": [record.dump() for record in new_records],
        }
        if thread_id is not None:
            payload["thread_id"] = thread_id
        if latency_s is not None:
            payload["latency_s"] = latency_s
        self._emit_at(ts, EventKind.SUGGESTIONS_SUBMITTED, payload)
        for record in new_records:
            if record.status is SuggestionStatus.DISCARDED:
                self._emit(EventKind.DISCARDED, {"sid": record.id})
        for record in superseded.values():
            self._transition(record, SuggestionStatus.DISMISSED, reason="superseded")
        return new_records

    def submit_suggestions(
        self,
        edits: Sequence[ExecutableEdit],
        origin: str = "chat",
        ground_truth: Sequence[bool | None] = (),
        thread_id: str | None = None,
    ) -> list[SuggestionRecord]:
        """Expand and register edits against the current draft.

        Edits whose original text is absent are recorded as discarded; a new
        suggestion overlapping a pending one supersedes it (the older one is
        dismissed).
        """
        self._require_edit_mode()
        return self._submit(edits, origin=origin, ground_truth=ground_truth, thread_id=thread_id)

    def accept(self, sid: str) -> SuggestionRecord:
        self._require_edit_mode()
        record = self._record(sid)
        if record.status is SuggestionStatus.IMPLICITLY_DISMISSED:
            raise StaleSuggestion(f"suggestion {sid} was implicitly dismissed")
        if record.status is not SuggestionStatus.PENDING:
            raise NotPending(f"suggestion {sid} is {record.status.value}")
        span = record.span
        if (
            span is None
            or span.version_id != self.version_id
            or self.content[span.start : span.end] != record.edit.original_text
        ):
            self._transition(record, SuggestionStatus.IMPLICITLY_DISMISSED)
            raise StaleSuggestion(f"suggestion {sid} no longer matches the draft")
        inserted_tag = system_tag(record.id, record.edit.new_info)
        new_tags = replacement_tags(
            self.tags, span.start, record.edit.original_text, record.edit.replace_text, inserted_tag
        )
        ts = self._next_ts()
        record.status = SuggestionStatus.ACCEPTED
        record.resolved_at_us = ts
        self._emit_at(
            ts,
            EventKind.ACCEPTED,
            {"sid": sid, "start": span.start, "end": span.end, "replacement": record.edit.replace_text},
        )
        self._splice(span.start, span.end, record.edit.replace_text, new_tags)
        self._revalidate()
        self._emit_snapshot(force=True)
        return record

    def dismiss(self, sid: str, reason: str | None = None) -> SuggestionRecord:
        self._require_edit_mode()
        record = self._record(sid)
        if record.status is not SuggestionStatus.PENDING:
            raise NotPending(f"suggestion {sid} is {record.status.value}")
        self._transition(record, SuggestionStatus.DISMISSED, reason=reason)
        return record

    def _matching_pending(self, origin_base: str | None) -> list[SuggestionRecord]:
        pending = self._pending()
        if origin_base is None:
            return pending
        return [r for r in pending if ComponentTag.parse(r.origin).base == origin_base]

    def accept_all(self, origin_base: str | None = None) -> list[SuggestionRecord]:
        """Accept pending suggestions in document order so earlier
        applications never invalidate later spans within the batch."""
        self._require_edit_mode()
        accepted = []
        while True:
            candidates = self._matching_pending(origin_base)
            if not candidates:
                break
            target = min(candidates, key=lambda r: (r.span.start, r.seq))
            accepted.append(self.accept(target.id))
        return accepted

    def dismiss_all(self, origin_base: str | None = None) -> list[SuggestionRecord]:
        self._require_edit_mode()
        dismissed = []
        for record in list(self._matching_pending(origin_base)):
            dismissed.append(self.dismiss(record.id))
        return dismissed

    # ------------------------------------------------------------------
    # commands: conversations

    def _conversation_window(self, messages: list[dict]) -> list[dict]:
        cap = self.config.max_conversation_messages
        return messages if cap is None else messages[-cap:]

    def chat_prepare(self, text: str) -> dict:
        """Record the author's chat message and assemble the prompt for it."""
        self._require_edit_mode()
        variant = choose_prompt_variant(
            self.chat_turns,
            enabled=self.config.perturbed_mode,
            mode=self.config.perturbed_alternation,
            seed=self.config.perturb_seed if self.config.perturb_seed is not None else self.doc_id,
        )
        self.chat_turns += 1
        self._emit(
            EventKind.CONVERSATION_MESSAGE,
            {"op": "message", "scope": "chat", "author": "user", "text": text, "variant": variant},
        )
        self.chat_messages.append({"author": "user", "text": text})
        prompt = assemble_prompt(
            self.library,
            "chat",
            self.content,
            conversation=self._conversation_window(self.chat_messages),
            variant=variant,
        )
        return {"prompt": prompt, "variant": variant}

    def chat_merge(self, reply, variant: str, latency_s: float) -> dict:
        """Merge a provider reply; edits expand against the now-current draft."""
        self._emit(
            EventKind.CONVERSATION_MESSAGE,
            {"op": "message", "scope": "chat", "author": "system", "text": reply.reply_text, "latency_s": latency_s},
        )
        self.chat_messages.append({"author": "system", "text": reply.reply_text})
        records = self._submit(reply.edits, origin="chat", ground_truth=reply.ground_truth, latency_s=latency_s)
        return {
            "reply": reply.reply_text,
            "variant": variant,
            "suggestions": [self.suggestion_payload(r) for r in records],
        }

    def chat_message(self, provider: SuggestionProvider, text: str) -> dict:
        prepared = self.chat_prepare(text)
        reply, latency = self._call(provider, prepared["prompt"])
        return self.chat_merge(reply, prepared["variant"], latency)

    def create_comment(self, start: int, end: int) -> str:
        self._require_edit_mode()
        self._check_range(start, end)
        if start == end:
            raise RangeOutOfBounds("a comment needs a non-empty selection")
        cid = self._new_id("c")
        self._emit(
            EventKind.CONVERSATION_MESSAGE,
            {"op": "open", "cid": cid, "anchor": {"start": start, "end": end}},
        )
        self.comments[cid] = CommentThread(cid, start, end)
        return cid

    def comment_prepare(self, cid: str, text: str) -> dict:
        self._require_edit_mode()
        thread = self._comment(cid)
        if thread.resolved:
            raise ThreadResolved(f"comment {cid} is resolved")
        self._emit(
            EventKind.CONVERSATION_MESSAGE,
            {"op": "message", "scope": "comment", "cid": cid, "author": "user", "text": text},
        )
        thread.messages.append({"author": "user", "text": text})
        selected = self.content[thread.anchor_start : thread.anchor_end]
        prompt = assemble_prompt(
            self.library,
            "comment",
            self.content,
            conversation=self._conversation_window(thread.messages),
            selected=selected,
        )
        return {"prompt": prompt}

    def comment_merge(self, cid: str, reply, latency_s: float) -> dict:
        thread = self._comment(cid)
        if thread.resolved:
            raise ThreadResolved(f"comment {cid} was resolved while waiting for the provider")
        self._emit(
            EventKind.CONVERSATION_MESSAGE,
            {
                "op": "message",
                "scope": "comment",
                "cid": cid,
                "author": "system",
                "text": reply.reply_text,
                "latency_s": latency_s,
            },
        )
        thread.messages.append({"author": "system", "text": reply.reply_text})
        records = self._submit(
            reply.edits, origin="comment", ground_truth=reply.ground_truth, thread_id=cid, latency_s=latency_s
        )
        return {
            "reply": reply.reply_text,
            "suggestions": [self.suggestion_payload(r) for r in records],
        }

    def comment_message(self, provider: SuggestionProvider, cid: str, text: str) -> dict:
        prepared = self.comment_prepare(cid, text)
        reply, latency = self._call(provider, prepared["prompt"])
        return self.comment_merge(cid, reply, latency)

    def resolve_comment(self, cid: str) -> None:
        """Resolve a comment: dismiss its pending suggestions, hide its highlight."""
        self._require_edit_mode()
        thread = self._comment(cid)
        if thread.resolved:
            return
        self._emit(EventKind.CONVERSATION_MESSAGE, {"op": "resolve", "cid": cid})
        thread.resolved = True
        for record in self._pending():
            if record.thread_id == cid:
                self._transition(record, SuggestionStatus.DISMISSED, reason="resolved")

    def _comment(self, cid: str) -> CommentThread:
        try:
            return self.comments[cid]
        except KeyError:
            raise UnknownId(f"unknown comment {cid}") from None

    # ------------------------------------------------------------------
    # commands: brainstorm

    def brainstorm_prepare(self, start: int, end: int, prompt_text: str | None = None) -> dict:
        self._require_edit_mode()
        self._check_range(start, end)
        if start == end:
            raise RangeOutOfBounds("a brainstorm needs a non-empty selection")
        selected = self.content[start:end]
        prompt = assemble_prompt(
            self.library,
            "brainstorm",
            self.content,
            selected=prompt_text if prompt_text is not None else selected,
        )
        return {"prompt": prompt, "start": start, "end": end, "selected": selected}

    def brainstorm_merge(self, prepared: dict, reply) -> tuple[str, list[str]]:
        start, end, selected = prepared["start"], prepared["end"], prepared["selected"]
        if self.content[start:end] != selected:
            raise StaleSuggestion("the selected text changed while waiting for the provider")
        if not reply.edits:
            raise InvalidProviderOutput("brainstorm returned no paraphrase options")
        option_edits = list(reply.edits[:5])
        truths = tuple(reply.ground_truth[:5])
        bid = self._new_id("b")
        self.brainstorms[bid] = Brainstorm(bid, start, end, selected, option_edits, truths)
        return bid, [edit.replace_text for edit in option_edits]

    def start_brainstorm(
        self, provider: SuggestionProvider, start: int, end: int, prompt_text: str | None = None
    ) -> tuple[str, list[str]]:
        prepared = self.brainstorm_prepare(start, end, prompt_text)
        reply, _latency = self._call(provider, prepared["prompt"])
        return self.brainstorm_merge(prepared, reply)

    def accept_brainstorm(self, bid: str, option_index: int) -> SuggestionRecord:
        self._require_edit_mode()
        try:
            brainstorm = self.brainstorms[bid]
        except KeyError:
            raise UnknownId(f"unknown brainstorm {bid}") from None
        if not 0 <= option_index < len(brainstorm.option_edits):
            raise RangeOutOfBounds(f"option {option_index} outside 0..{len(brainstorm.option_edits) - 1}")
        if brainstorm.consumed or brainstorm.stale:
            raise StaleSuggestion(f"brainstorm {bid} no longer matches the draft")
        anchor_text = self.content[brainstorm.anchor_start : brainstorm.anchor_end]
        if anchor_text != brainstorm.selected:
            brainstorm.stale = True
            raise StaleSuggestion(f"brainstorm {bid} no longer matches the draft")
        edit = dc_replace(brainstorm.option_edits[option_index], original_text=brainstorm.selected)
        span = OccurrenceSpan(brainstorm.anchor_start, brainstorm.anchor_end, self.version_id)
        truth = brainstorm.ground_truth[option_index] if option_index < len(brainstorm.ground_truth) else None
        records = self._submit([edit], origin="brainstorm", ground_truth=(truth,), bind=span)
        brainstorm.consumed = True
        return self.accept(records[0].id)

    # ------------------------------------------------------------------
    # commands: bracket shortcuts

    def bracket_dispatch(self, provider: SuggestionProvider, start: int, end: int) -> dict:
        """Classify a bracketed passage and open a comment or brainstorm.

        The span covers the whole passage including the brackets. Empty
        brackets dispatch nothing; provider errors leave the bracket inert.
        """
        self._require_edit_mode()
        self._check_range(start, end)
        text = self.content[start:end]
        if len(text) < 2 or not (text.startswith("[") and text.endswith("]")):
            raise RangeOutOfBounds("span is not a bracketed passage")
        inner = text[1:-1]
        label = classify_bracket(provider, self.library, inner, self.content)
        if label is None:
            return {"kind": "none"}
        if label == "command":
            cid = self.create_comment(start, end)
            result = self.comment_message(provider, cid, inner)
            return {"kind": "command", "comment_id": cid, **result}
        bid, options = self.start_brainstorm(provider, start, end, prompt_text=inner)
        return {"kind": "content", "brainstorm_id": bid, "options": options}

    # ------------------------------------------------------------------
    # commands: markers

    def create_marker(
        self,
        name: str,
        underline_style: str = "solid",
        color: str = "#e91e63",
        description: str | None = None,
        visible: bool = True,
    ) -> MarkerDef:
        if any(m.name == name for m in self.markers.values()):
            raise DuplicateMarker(f"marker named {name!r} already exists")
        marker = MarkerDef(self._new_id("m"), name, UnderlineStyle(underline_style), color, description, visible)
        self.markers[marker.id] = marker
        self._emit(EventKind.MARKER_CRUD, {"action": "create", "marker": marker.dump()})
        return marker

    def update_marker(self, mid: str, **changes) -> MarkerDef:
        marker = self._marker(mid)
        if "name" in changes and changes["name"] != marker.name:
            if any(m.name == changes["name"] for m in self.markers.values()):
                raise DuplicateMarker(f"marker named {changes['name']!r} already exists")
            marker.name = changes["name"]
        if "underline_style" in changes:
            marker.underline_style = UnderlineStyle(changes["underline_style"])
        if "color" in changes:
            marker.color = changes["color"]
        if "description" in changes:
            marker.description = changes["description"]
        if "visible" in changes:
            marker.visible = bool(changes["visible"])
        self._emit(EventKind.MARKER_CRUD, {"action": "update", "marker": marker.dump()})
        return marker

    def delete_marker(self, mid: str) -> None:
        self._marker(mid)
        self._emit(EventKind.MARKER_CRUD, {"action": "delete", "marker": {"id": mid}})
        del self.markers[mid]

    def _marker(self, mid: str) -> MarkerDef:
        try:
            return self.markers[mid]
        except KeyError:
            raise UnknownId(f"unknown marker {mid}") from None

    def markers_prepare(self, marker_id: str | None = None) -> dict | None:
        """Prompt for the active markers; None when there is nothing to run."""
        self._require_edit_mode()
        if marker_id is not None:
            active = [self._marker(marker_id)]
        else:
            active = [m for m in self.markers.values() if m.visible]
        if not active:
            return None
        return {"prompt": assemble_prompt(self.library, "marker", self.content, markers=active)}

    def markers_merge(self, reply, latency_s: float) -> list[SuggestionRecord]:
        return self._submit(reply.edits, origin=None, ground_truth=reply.ground_truth, latency_s=latency_s)

    def run_markers(self, provider: SuggestionProvider, marker_id: str | None = None) -> list[SuggestionRecord]:
        """Run the active markers (or one specific marker) over the draft."""
        prepared = self.markers_prepare(marker_id)
        if prepared is None:
            return []
        reply, latency = self._call(provider, prepared["prompt"])
        return self.markers_merge(reply, latency)

    # ------------------------------------------------------------------
    # commands: verification

    def start_verification(self, provider: SuggestionProvider, sid: str) -> VerificationRecord:
        record = self._record(sid)
        existing = self._ver_by_sid.get(sid)
        if existing is not None:
            return self.verifications[existing]
        if record.status is SuggestionStatus.PENDING:
            require_new_info = True
        elif record.status is SuggestionStatus.ACCEPTED:
            require_new_info = False
        else:
            raise VerificationNotAllowed(f"suggestion {sid} is {record.status.value}")
        t0 = self._clock()
        queries = generate_verify_queries(
            provider, self.library, record.edit, self.content, require_new_info=require_new_info
        )
        latency = max(0.0, self._clock() - t0)
        vid = self._new_id("v")
        ts = self._next_ts()
        verification = VerificationRecord(vid, sid, ts, tuple(queries))
        self.verifications[vid] = verification
        self._ver_by_sid[sid] = vid
        self._emit_at(
            ts,
            EventKind.VERIFICATION_STARTED,
            {"vid": vid, "sid": sid, "queries": list(queries), "latency_s": latency},
        )
        return verification

    def visit_query(self, vid: str, index: int) -> VerificationRecord:
        verification = self._verification(vid)
        record_visit(verification, index)
        self._emit(EventKind.QUERY_VISITED, {"vid": vid, "index": index})
        return verification

    def label_verification(self, vid: str, label: str) -> VerificationRecord:
        verification = self._verification(vid)
        ts = self._next_ts()
        assign_label(verification, label, ts)
        self.records[verification.suggestion_id].verification = verification.label.value
        self._emit_at(
            ts,
            EventKind.LABEL_ASSIGNED,
            {"vid": vid, "sid": verification.suggestion_id, "label": verification.label.value},
        )
        return verification

    def label_suggestion(self, sid: str, label: str) -> VerificationRecord:
        """Assign a label directly to a suggestion, creating a bare
        verification record (no queries) when none was started."""
        self._record(sid)
        vid = self._ver_by_sid.get(sid)
        if vid is None:
            vid = self._new_id("v")
            ts = self._next_ts()
            verification = VerificationRecord(vid, sid, ts, ())
            self.verifications[vid] = verification
            self._ver_by_sid[sid] = vid
            assign_label(verification, label, ts)
            self.records[sid].verification = verification.label.value
            self._emit_at(
                ts, EventKind.LABEL_ASSIGNED, {"vid": vid, "sid": sid, "label": verification.label.value}
            )
            return verification
        return self.label_verification(vid, label)

    def _verification(self, vid: str) -> VerificationRecord:
        try:
            return self.verifications[vid]
        except KeyError:
            raise UnknownId(f"unknown verification {vid}") from None

    # ------------------------------------------------------------------
    # commands: mode

    def switch_mode(self, mode: str) -> None:
        """Switch between edit and audit views.

        Closing the audit (switching back to edit) assigns Not Enough Time
        to every traced edit the auditor left unlabeled.
        """
        if mode not in ("edit", "audit"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == self.mode:
            return
        closing_audit = self.mode == "audit"
        self._emit(EventKind.MODE_SWITCHED, {"mode": mode})
        self.mode = mode
        if closing_audit:
            seen = set()
            for trace in trace_spans(self.snapshot()):
                if trace.edit_id in seen:
                    continue
                seen.add(trace.edit_id)
                if self._label_for(trace.edit_id) is VerificationLabel.UNLABELED:
                    self.label_suggestion(trace.edit_id, VerificationLabel.NOT_ENOUGH_TIME.value)

    # ------------------------------------------------------------------
    # queries

    def snapshot(self) -> ProvenanceSnapshot:
        return ProvenanceSnapshot(self.version_id, self.content, self.tags)

    def _label_for(self, sid: str) -> VerificationLabel:
        vid = self._ver_by_sid.get(sid)
        if vid is None:
            return VerificationLabel.UNLABELED
        return self.verifications[vid].label

    def _labels(self) -> dict[str, VerificationLabel]:
        return {v.suggestion_id: v.label for v in self.verifications.values()}

    def suggestion_payload(self, record: SuggestionRecord) -> dict:
        visible = True
        tag = ComponentTag.parse(record.origin)
        if tag.base == "marker" and tag.sub is not None:
            for marker in self.markers.values():
                if marker.name == tag.sub:
                    visible = marker.visible
                    break
        vid = self._ver_by_sid.get(record.id)
        verification = None
        if vid is not None:
            verification = self.verifications[vid].dump()
            verification["query_urls"] = [
                search_url(self.config.search_url_template, q) for q in self.verifications[vid].queries
            ]
        return {
            "id": record.id,
            "origin": record.origin,
            "status": record.status.value,
            "original_text": record.edit.original_text,
            "replace_text": record.edit.replace_text,
            "new_info": record.edit.new_info,
            "replace_all": record.edit.replace_all,
            "span": None
            if record.span is None
            else {"start": record.span.start, "end": record.span.end, "version_id": record.span.version_id},
            "visible": visible,
            "display": [
                {"kind": step.kind, "text": step.text}
                for step in render_alignment(word_align(record.edit.original_text, record.edit.replace_text))
            ],
            "underline": underline_for(record.origin, self.markers.values()),
            "warning": warn_check(record),
            "menu": list(menu_actions(record)),
            "thread_id": record.thread_id,
            "verification": verification,
            "created_at_us": record.created_at_us,
            "resolved_at_us": record.resolved_at_us,
            "dismiss_reason": record.dismiss_reason,
        }

    def trace_payload(self) -> list[dict]:
        labels = self._labels()
        view = build_audit_view(self.snapshot(), labels)
        return [
            {
                "start": span.start,
                "end": span.end,
                "edit_id": span.edit_id,
                "new_info": span.new_info,
                "label": span.label.value,
                "highlight_class": span.highlight_class.value,
                "text": view.content[span.start : span.end],
            }
            for span in view.spans
        ]

    def document_payload(self) -> dict:
        return {
            "id": self.doc_id,
            "content": self.content,
            "version_id": self.version_id,
            "mode": self.mode,
            "created_at_us": self.created_at_us,
            "chat": {"messages": list(self.chat_messages)},
            "comments": [thread.dump() for thread in self.comments.values()],
            "markers": [marker.dump() for marker in self.markers.values()],
            "suggestions": [self.suggestion_payload(r) for r in self.records.values()],
            "trace": self.trace_payload(),
        }

    def metrics(self) -> dict:
        labels = self._labels()
        records = list(self.records.values())
        suggested_inaccurate = [
            r for r in records if r.ground_truth_inaccurate and r.status is not SuggestionStatus.DISCARDED
        ]
        counts: dict[str, int] = {status.value: 0 for status in SuggestionStatus}
        for record in records:
            counts[record.status.value] += 1
        from .verify import surviving_edit_ids

        surviving = surviving_edit_ids(self.tags)
        return {
            "prevented_pct": metric_prevented(records, self.tags),
            "detected_pct": metric_detected(records, self.tags, labels),
            "inaccurate_suggested": len(suggested_inaccurate),
            "inaccurate_in_draft": sum(1 for r in suggested_inaccurate if r.id in surviving),
            "false_positive_incorrect": false_positive_incorrect(records, self.tags, labels),
            "suggestions": counts,
            "verification": verification_stats(self.verifications.values()),
            "edit_distance_series": [[t, d] for t, d in edit_distance_series(self.events, self.config.series_period_s)],
        }

    def audit_export(self) -> dict:
        """The audit report: content, traced spans with classes, records, metrics."""
        verifications = []
        for verification in self.verifications.values():
            dump = verification.dump()
            dump["query_urls"] = [
                search_url(self.config.search_url_template, q) for q in verification.queries
            ]
            verifications.append(dump)
        return {
            "doc_id": self.doc_id,
            "mode": self.mode,
            "content": self.content,
            "spans": self.trace_payload(),
            "verifications": verifications,
            "metrics": self.metrics(),
        }

    # ------------------------------------------------------------------
    # persistence state

    def checkpoint(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "content": self.content,
            "version_id": self.version_id,
            "mode": self.mode,
            "tags_rle": encode_tags(self.tags),
            "created_at_us": self.created_at_us,
            "last_snapshot_us": self._last_snapshot_us,
            "chat_turns": self.chat_turns,
            "chat_messages": list(self.chat_messages),
            "comments": [thread.dump() for thread in self.comments.values()],
            "markers": [marker.dump() for marker in self.markers.values()],
            "suggestions": [record.dump() for record in self.records.values()],
            "verifications": [v.dump() for v in self.verifications.values()],
            "counters": {k: v for k, v in self._counters.items() if k != "b"},
            "seq": self._seq,
            "last_ts_us": self._last_ts_us,
        }

    # ------------------------------------------------------------------
    # replay

    @classmethod
    def replay(
        cls,
        events: Sequence[SessionEvent],
        config: EngineConfig | None = None,
        library: PromptLibrary | None = None,
    ) -> "DocumentSession":
        """Fold an event log into a session; providers are never consulted."""
        if not events:
            raise ReplayError("empty event log")
        if events[0].kind is not EventKind.SNAPSHOT:
            raise ReplayError("event log must start with a snapshot")
        session = cls(events[0].payload["doc_id"], config, library)
        expected_seq = 0
        for event in events:
            expected_seq += 1
            if event.seq != expected_seq:
                raise ReplayError(f"event sequence gap: expected {expected_seq}, got {event.seq}")
            session._replay_apply(event)
            session.events.append(event)
            session._seq = event.seq
            session._last_ts_us = max(session._last_ts_us, event.at_us)
        return session

    def _replay_apply(self, event: SessionEvent) -> None:
        kind = event.kind
        p = event.payload
        if kind is EventKind.SNAPSHOT:
            if self.created_at_us is None:
                self.content = p["content"]
                self.version_id = p["version_id"]
                self.tags = decode_tags(p["tags_rle"])
                self.created_at_us = event.at_us
            else:
                if p["content"] != self.content or p["version_id"] != self.version_id:
                    raise ReplayError(f"snapshot at seq {event.seq} disagrees with replayed content")
                if decode_tags(p["tags_rle"]) != self.tags:
                    raise ReplayError(f"snapshot at seq {event.seq} disagrees with replayed provenance")
            self._last_snapshot_us = event.at_us
        elif kind is EventKind.MANUAL_EDIT:
            self._splice(p["start"], p["end"], p["replacement"], (USER_TAG,) * len(p["replacement"]))
            self._apply_rebinding()
        elif kind is EventKind.SUGGESTIONS_SUBMITTED:
            for dump in p["records"]:
                record = SuggestionRecord.load(dump)
                self.records[record.id] = record
                self._counters["s"] = max(self._counters["s"], record.seq)
        elif kind is EventKind.ACCEPTED:
            record = self._replay_record(p["sid"], event.seq)
            if record.status is not SuggestionStatus.PENDING:
                raise ReplayError(f"accept of non-pending suggestion at seq {event.seq}")
            span = record.span
            if span is None or span.start != p["start"] or span.end != p["end"]:
                raise ReplayError(f"accepted span at seq {event.seq} disagrees with replayed binding")
            inserted_tag = system_tag(record.id, record.edit.new_info)
            new_tags = replacement_tags(
                self.tags, span.start, record.edit.original_text, p["replacement"], inserted_tag
            )
            record.status = SuggestionStatus.ACCEPTED
            record.resolved_at_us = event.at_us
            self._splice(span.start, span.end, p["replacement"], new_tags)
            self._apply_rebinding()
        elif kind is EventKind.DISMISSED:
            record = self._replay_record(p["sid"], event.seq)
            if record.status is not SuggestionStatus.PENDING:
                raise ReplayError(f"dismiss of non-pending suggestion at seq {event.seq}")
            record.status = SuggestionStatus.DISMISSED
            record.resolved_at_us = event.at_us
            record.dismiss_reason = p.get("reason")
        elif kind is EventKind.IMPLICITLY_DISMISSED:
            record = self._replay_record(p["sid"], event.seq)
            if record.status is not SuggestionStatus.PENDING:
                raise ReplayError(f"implicit dismissal of non-pending suggestion at seq {event.seq}")
            record.status = SuggestionStatus.IMPLICITLY_DISMISSED
            record.resolved_at_us = event.at_us
        elif kind is EventKind.DISCARDED:
            record = self._replay_record(p["sid"], event.seq)
            if record.status is not SuggestionStatus.DISCARDED:
                raise ReplayError(f"discard marker for non-discarded suggestion at seq {event.seq}")
        elif kind is EventKind.VERIFICATION_STARTED:
            verification = VerificationRecord(p["vid"], p["sid"], event.at_us, tuple(p["queries"]))
            self.verifications[p["vid"]] = verification
            self._ver_by_sid[p["sid"]] = p["vid"]
            self._counters["v"] = max(self._counters["v"], _id_number(p["vid"]))
        elif kind is EventKind.QUERY_VISITED:
            record_visit(self._verification(p["vid"]), p["index"])
        elif kind is EventKind.LABEL_ASSIGNED:
            verification = self.verifications.get(p["vid"])
            if verification is None:
                verification = VerificationRecord(p["vid"], p["sid"], event.at_us, ())
                self.verifications[p["vid"]] = verification
                self._ver_by_sid[p["sid"]] = p["vid"]
                self._counters["v"] = max(self._counters["v"], _id_number(p["vid"]))
            assign_label(verification, p["label"], event.at_us)
            self.records[p["sid"]].verification = p["label"]
        elif kind is EventKind.MODE_SWITCHED:
            self.mode = p["mode"]
        elif kind is EventKind.MARKER_CRUD:
            self._replay_marker(p)
        elif kind is EventKind.CONVERSATION_MESSAGE:
            self._replay_conversation(p)
        else:
            raise ReplayError(f"unknown event kind {kind}")

    def _replay_record(self, sid: str, seq: int) -> SuggestionRecord:
        try:
            return self.records[sid]
        except KeyError:
            raise ReplayError(f"event at seq {seq} references unknown suggestion {sid}") from None

    def _replay_marker(self, p: dict) -> None:
        action = p["action"]
        if action == "create":
            marker = MarkerDef.load(p["marker"])
            self.markers[marker.id] = marker
            self._counters["m"] = max(self._counters["m"], _id_number(marker.id))
        elif action == "update":
            marker = MarkerDef.load(p["marker"])
            self.markers[marker.id] = marker
        elif action == "delete":
            self.markers.pop(p["marker"]["id"], None)
        else:
            raise ReplayError(f"unknown marker action {action!r}")

    def _replay_conversation(self, p: dict) -> None:
        op = p["op"]
        if op == "open":
            cid = p["cid"]
            self.comments[cid] = CommentThread(cid, p["anchor"]["start"], p["anchor"]["end"])
            self._counters["c"] = max(self._counters["c"], _id_number(cid))
        elif op == "message":
            message = {"author": p["author"], "text": p["text"]}
            if p["scope"] == "chat":
                if p["author"] == "user":
                    self.chat_turns += 1
                self.chat_messages.append(message)
            else:
                self.comments[p["cid"]].messages.append(message)
        elif op == "resolve":
            self.comments[p["cid"]].resolved = True
        else:
            raise ReplayError(f"unknown conversation op {op!r}")


def _id_number(identifier: str) -> int:
    return int(identifier.rsplit(".", 1)[1][1:])
