"""HTTP API over the document store.

One writer per document: every mutating request takes that document's lock,
applies the session command, and flushes the store before answering.
Provider calls run outside the document lock (editing continues while a
component thinks) and at most one call per component per document is in
flight; later requests queue on the component lock. Provider and transport
failures map to 5xx responses whose body carries a retry message for the
user; validation problems map to 4xx.
"""

from __future__ import annotations

import logging
import threading
import time
from collections import defaultdict
from contextlib import contextmanager
from typing import Any, Callable

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse, Response

from .config import EngineConfig
from .edits import PayloadMalformed, SchemaViolation
from .providers import (
    InvalidProviderOutput,
    MissingSlot,
    NewInfoRequired,
    PromptLibrary,
    RemoteProvider,
    RETRY_MESSAGE,
    ScriptedProvider,
    SuggestionProvider,
    TransportFailure,
    call_provider,
)
from .provenance import LengthMismatch
from .session import (
    DocumentSession,
    DuplicateMarker,
    ThreadResolved,
    UnknownId,
    VerificationNotAllowed,
    WrongMode,
)
from .store import DocumentStore, StoreCorrupt, canonical_json_bytes
from .suggestions import NotPending, RangeOutOfBounds, StaleSuggestion
from .verify import IndexOutOfRange, InvalidLabel, search_url

log = logging.getLogger("edittrace.service")


def build_provider(config: EngineConfig) -> SuggestionProvider:
    if config.provider_kind == "remote":
        return RemoteProvider(
            config.provider_endpoint,
            config.provider_api_key,
            config.provider_model,
            config.provider_timeout_s,
        )
    return ScriptedProvider.from_dir(config.fixtures_dir) if config.fixtures_dir else ScriptedProvider()


class ServiceRuntime:
    """Shared state behind the app: store, provider, locks, counters."""

    def __init__(
        self,
        config: EngineConfig,
        provider: SuggestionProvider | None = None,
        store: DocumentStore | None = None,
        library: PromptLibrary | None = None,
        clock: Callable[[], float] | None = None,
    ) -> None:
        if store is None:
            if config.store_dir is None:
                raise ValueError("config.store_dir is required when no store is supplied")
            store = DocumentStore(config.store_dir, config=config, library=library, clock=clock)
        self.config = config
        self.store = store
        self.provider = provider if provider is not None else build_provider(config)
        self.clock = clock or time.time
        self.sessions: dict[str, DocumentSession] = {}
        self._doc_locks: dict[str, threading.RLock] = defaultdict(threading.RLock)
        self._component_locks: dict[tuple[str, str], threading.Lock] = defaultdict(threading.Lock)
        self.provider_calls = 0
        self.provider_invalid = 0
        self._stats_lock = threading.Lock()

    def session(self, doc_id: str) -> DocumentSession:
        if doc_id not in self.sessions:
            self.sessions[doc_id] = self.store.open(doc_id)
        return self.sessions[doc_id]

    @contextmanager
    def doc_lock(self, doc_id: str):
        with self._doc_locks[doc_id]:
            yield

    @contextmanager
    def component_lock(self, doc_id: str, component: str):
        with self._component_locks[(doc_id, component)]:
            yield

    def call_provider(self, prompt: str):
        start = self.clock()
        with self._stats_lock:
            self.provider_calls += 1
        try:
            reply = call_provider(self.provider, prompt)
        except InvalidProviderOutput:
            with self._stats_lock:
                self.provider_invalid += 1
            raise
        latency = max(0.0, self.clock() - start)
        log.info("provider call completed in %.3fs", latency)
        return reply, latency

    def provider_stats(self) -> dict:
        with self._stats_lock:
            calls, invalid = self.provider_calls, self.provider_invalid
        return {
            "calls": calls,
            "invalid_output": invalid,
            "invalid_rate": (invalid / calls) if calls else None,
        }


def _doc_of(entity_id: str) -> str:
    doc_id, _, _ = entity_id.rpartition(".")
    if not doc_id:
        raise UnknownId(f"malformed id {entity_id!r}")
    return doc_id


def _field(payload: dict, key: str, required: bool = True, default: Any = None) -> Any:
    if key not in payload:
        if required:
            raise SchemaViolation(f"missing field {key!r}")
        return default
    return payload[key]


def _span_field(payload: dict, key: str = "span") -> tuple[int, int]:
    span = _field(payload, key)
    if isinstance(span, dict):
        start, end = span.get("start"), span.get("end")
    elif isinstance(span, (list, tuple)) and len(span) == 2:
        start, end = span
    else:
        raise SchemaViolation(f"{key} must be [start, end] or {{start, end}}")
    if not isinstance(start, int) or not isinstance(end, int):
        raise SchemaViolation(f"{key} offsets must be integers")
    return start, end


_BAD_REQUEST = (
    PayloadMalformed,
    SchemaViolation,
    RangeOutOfBounds,
    IndexOutOfRange,
    InvalidLabel,
    MissingSlot,
    NewInfoRequired,
    LengthMismatch,
)
_CONFLICT = (NotPending, WrongMode, ThreadResolved, DuplicateMarker, VerificationNotAllowed)


def create_app(
    config: EngineConfig,
    provider: SuggestionProvider | None = None,
    store: DocumentStore | None = None,
    library: PromptLibrary | None = None,
    clock: Callable[[], float] | None = None,
) -> FastAPI:
    runtime = ServiceRuntime(config, provider=provider, store=store, library=library, clock=clock)
    app = FastAPI(title="edittrace", version="0.1.0")
    app.state.runtime = runtime

    # ------------------------------------------------------------------
    # error mapping

    @app.exception_handler(StaleSuggestion)
    async def _stale(request: Request, exc: StaleSuggestion):
        return JSONResponse(
            status_code=409,
            content={"error": "stale_suggestion", "status": "implicitly_dismissed", "detail": str(exc)},
        )

    @app.exception_handler(UnknownId)
    async def _unknown(request: Request, exc: UnknownId):
        return JSONResponse(status_code=404, content={"error": "not_found", "detail": str(exc)})

    @app.exception_handler(KeyError)
    async def _missing(request: Request, exc: KeyError):
        return JSONResponse(status_code=404, content={"error": "not_found", "detail": str(exc)})

    @app.exception_handler(InvalidProviderOutput)
    async def _invalid_output(request: Request, exc: InvalidProviderOutput):
        log.warning("invalid provider output: %s", exc)
        return JSONResponse(
            status_code=502,
            content={"error": "invalid_provider_output", "message": RETRY_MESSAGE, "detail": str(exc)},
        )

    @app.exception_handler(TransportFailure)
    async def _transport(request: Request, exc: TransportFailure):
        return JSONResponse(
            status_code=502,
            content={"error": "provider_unreachable", "message": RETRY_MESSAGE, "detail": str(exc)},
        )

    @app.exception_handler(StoreCorrupt)
    async def _corrupt(request: Request, exc: StoreCorrupt):
        return JSONResponse(status_code=500, content={"error": "store_corrupt", "detail": str(exc)})

    for exc_type in _BAD_REQUEST:

        @app.exception_handler(exc_type)
        async def _bad_request(request: Request, exc: Exception):
            return JSONResponse(status_code=400, content={"error": type(exc).__name__, "detail": str(exc)})

    for exc_type in _CONFLICT:

        @app.exception_handler(exc_type)
        async def _conflict(request: Request, exc: Exception):
            return JSONResponse(status_code=409, content={"error": type(exc).__name__, "detail": str(exc)})

    @app.middleware("http")
    async def _auth(request: Request, call_next):
        token = runtime.config.api_token
        if token:
            supplied = request.headers.get("authorization", "")
            if supplied != f"Bearer {token}":
                return JSONResponse(status_code=401, content={"error": "unauthorized"})
        return await call_next(request)

    # ------------------------------------------------------------------
    # helpers

    def mutate(doc_id: str, operation: Callable[[DocumentSession], Any]) -> Any:
        with runtime.doc_lock(doc_id):
            session = runtime.session(doc_id)
            result = operation(session)
            runtime.store.flush(session)
            return result

    def read(doc_id: str, operation: Callable[[DocumentSession], Any]) -> Any:
        with runtime.doc_lock(doc_id):
            return operation(runtime.session(doc_id))

    def provider_turn(doc_id: str, component: str, prepare, merge) -> Any:
        """Prepare under the doc lock, call the provider outside it, merge back."""
        with runtime.component_lock(doc_id, component):
            with runtime.doc_lock(doc_id):
                session = runtime.session(doc_id)
                prepared = prepare(session)
                runtime.store.flush(session)
            if prepared is None:
                return None
            reply, latency = runtime.call_provider(prepared["prompt"])
            with runtime.doc_lock(doc_id):
                session = runtime.session(doc_id)
                result = merge(session, prepared, reply, latency)
                runtime.store.flush(session)
                return result

    # ------------------------------------------------------------------
    # documents

    @app.post("/documents")
    def create_document(payload: dict = Body(...)):
        template = _field(payload, "template")
        if not isinstance(template, str):
            raise SchemaViolation("template must be a string")
        session = runtime.store.create(template)
        runtime.sessions[session.doc_id] = session
        return {"id": session.doc_id, "document": session.document_payload()}

    @app.get("/documents/{doc_id}")
    def get_document(doc_id: str):
        payload = read(doc_id, lambda s: s.document_payload())
        if runtime.config.study_mode:
            payload["study"] = runtime.store.read_meta(doc_id).get("study")
        return payload

    @app.get("/documents/{doc_id}/suggestions")
    def get_suggestions(doc_id: str):
        return {"suggestions": read(doc_id, lambda s: [s.suggestion_payload(r) for r in s.records.values()])}

    @app.post("/documents/{doc_id}/manual-edit")
    def manual_edit(doc_id: str, payload: dict = Body(...)):
        start, end = _span_field(payload, "range")
        replacement = _field(payload, "replacement")
        if not isinstance(replacement, str):
            raise SchemaViolation("replacement must be a string")

        def op(session: DocumentSession):
            session.manual_edit(start, end, replacement)
            return {"content": session.content, "version_id": session.version_id}

        return mutate(doc_id, op)

    @app.post("/documents/{doc_id}/suggestions/{sid}/accept")
    def accept_suggestion(doc_id: str, sid: str):
        def op(session: DocumentSession):
            record = session.accept(sid)
            return {
                "suggestion": session.suggestion_payload(record),
                "content": session.content,
                "version_id": session.version_id,
            }

        try:
            return mutate(doc_id, op)
        except StaleSuggestion:
            runtime.store.flush(runtime.session(doc_id))
            raise

    @app.post("/documents/{doc_id}/suggestions/{sid}/dismiss")
    def dismiss_suggestion(doc_id: str, sid: str, payload: dict = Body(default={})):
        reason = payload.get("reason")

        def op(session: DocumentSession):
            record = session.dismiss(sid, reason=reason)
            return {"suggestion": session.suggestion_payload(record)}

        return mutate(doc_id, op)

    @app.post("/documents/{doc_id}/suggestions/accept-all")
    def accept_all(doc_id: str, payload: dict = Body(default={})):
        origin = payload.get("origin")

        def op(session: DocumentSession):
            records = session.accept_all(origin)
            return {
                "accepted": [r.id for r in records],
                "content": session.content,
                "version_id": session.version_id,
            }

        return mutate(doc_id, op)

    @app.post("/documents/{doc_id}/suggestions/dismiss-all")
    def dismiss_all(doc_id: str, payload: dict = Body(default={})):
        origin = payload.get("origin")

        def op(session: DocumentSession):
            return {"dismissed": [r.id for r in session.dismiss_all(origin)]}

        return mutate(doc_id, op)

    # ------------------------------------------------------------------
    # conversations

    @app.post("/documents/{doc_id}/chat")
    def chat(doc_id: str, payload: dict = Body(...)):
        message = _field(payload, "message")
        if not isinstance(message, str) or not message:
            raise SchemaViolation("message must be a non-empty string")
        return provider_turn(
            doc_id,
            "chat",
            lambda session: session.chat_prepare(message),
            lambda session, prepared, reply, latency: session.chat_merge(reply, prepared["variant"], latency),
        )

    @app.post("/documents/{doc_id}/comments")
    def create_comment(doc_id: str, payload: dict = Body(...)):
        start, end = _span_field(payload)

        def op(session: DocumentSession):
            cid = session.create_comment(start, end)
            return {"id": cid, "comment": session.comments[cid].dump()}

        return mutate(doc_id, op)

    @app.post("/comments/{cid}/message")
    def comment_message(cid: str, payload: dict = Body(...)):
        message = _field(payload, "message")
        if not isinstance(message, str) or not message:
            raise SchemaViolation("message must be a non-empty string")
        doc_id = _doc_of(cid)
        return provider_turn(
            doc_id,
            "comment",
            lambda session: session.comment_prepare(cid, message),
            lambda session, prepared, reply, latency: session.comment_merge(cid, reply, latency),
        )

    @app.post("/comments/{cid}/resolve")
    def resolve_comment(cid: str):
        doc_id = _doc_of(cid)

        def op(session: DocumentSession):
            session.resolve_comment(cid)
            return {"comment": session.comments[cid].dump()}

        return mutate(doc_id, op)

    # ------------------------------------------------------------------
    # brainstorm

    @app.post("/documents/{doc_id}/brainstorm")
    def brainstorm(doc_id: str, payload: dict = Body(...)):
        start, end = _span_field(payload)

        def merge(session: DocumentSession, prepared, reply, latency):
            bid, options = session.brainstorm_merge(prepared, reply)
            return {"id": bid, "options": options}

        return provider_turn(
            doc_id,
            "brainstorm",
            lambda session: session.brainstorm_prepare(start, end),
            merge,
        )

    @app.post("/brainstorms/{bid}/accept")
    def accept_brainstorm(bid: str, payload: dict = Body(...)):
        option_index = _field(payload, "option_index")
        if not isinstance(option_index, int):
            raise SchemaViolation("option_index must be an integer")
        doc_id = _doc_of(bid)

        def op(session: DocumentSession):
            record = session.accept_brainstorm(bid, option_index)
            return {
                "suggestion": session.suggestion_payload(record),
                "content": session.content,
                "version_id": session.version_id,
            }

        return mutate(doc_id, op)

    # ------------------------------------------------------------------
    # bracket shortcuts

    @app.post("/documents/{doc_id}/bracket")
    def bracket(doc_id: str, payload: dict = Body(...)):
        start, end = _span_field(payload)
        with runtime.component_lock(doc_id, "bracket"):
            with runtime.doc_lock(doc_id):
                session = runtime.session(doc_id)
                result = session.bracket_dispatch(runtime.provider, start, end)
                runtime.store.flush(session)
                return result

    # ------------------------------------------------------------------
    # markers

    @app.get("/documents/{doc_id}/markers")
    def list_markers(doc_id: str):
        return {"markers": read(doc_id, lambda s: [m.dump() for m in s.markers.values()])}

    @app.post("/documents/{doc_id}/markers")
    def create_marker(doc_id: str, payload: dict = Body(...)):
        name = _field(payload, "name")

        def op(session: DocumentSession):
            marker = session.create_marker(
                name,
                underline_style=payload.get("underline_style", "solid"),
                color=payload.get("color", "#e91e63"),
                description=payload.get("description"),
                visible=bool(payload.get("visible", True)),
            )
            return {"marker": marker.dump()}

        return mutate(doc_id, op)

    @app.patch("/documents/{doc_id}/markers")
    def update_marker(doc_id: str, payload: dict = Body(...)):
        mid = _field(payload, "id")
        changes = {k: v for k, v in payload.items() if k != "id"}

        def op(session: DocumentSession):
            return {"marker": session.update_marker(mid, **changes).dump()}

        return mutate(doc_id, op)

    @app.delete("/documents/{doc_id}/markers")
    def delete_marker(doc_id: str, payload: dict = Body(...)):
        mid = _field(payload, "id")

        def op(session: DocumentSession):
            session.delete_marker(mid)
            return {"deleted": mid}

        return mutate(doc_id, op)

    @app.post("/markers/{mid}/refresh")
    def refresh_marker(mid: str):
        doc_id = _doc_of(mid)

        def merge(session: DocumentSession, prepared, reply, latency):
            records = session.markers_merge(reply, latency)
            return {"suggestions": [session.suggestion_payload(r) for r in records]}

        result = provider_turn(
            doc_id,
            "marker",
            lambda session: session.markers_prepare(mid),
            merge,
        )
        return result if result is not None else {"suggestions": []}

    @app.post("/documents/{doc_id}/markers/run")
    def run_markers(doc_id: str):
        def merge(session: DocumentSession, prepared, reply, latency):
            records = session.markers_merge(reply, latency)
            return {"suggestions": [session.suggestion_payload(r) for r in records]}

        result = provider_turn(
            doc_id,
            "marker",
            lambda session: session.markers_prepare(),
            merge,
        )
        return result if result is not None else {"suggestions": []}

    # ------------------------------------------------------------------
    # verification

    @app.post("/suggestions/{sid}/verify")
    def start_verification(sid: str):
        doc_id = _doc_of(sid)
        with runtime.component_lock(doc_id, "verify"):
            with runtime.doc_lock(doc_id):
                session = runtime.session(doc_id)
                verification = session.start_verification(runtime.provider, sid)
                runtime.store.flush(session)
                dump = verification.dump()
                dump["query_urls"] = [
                    search_url(runtime.config.search_url_template, q) for q in verification.queries
                ]
                return {"verification": dump}

    @app.post("/suggestions/{sid}/label")
    def label_suggestion(sid: str, payload: dict = Body(...)):
        label = _field(payload, "label")
        doc_id = _doc_of(sid)

        def op(session: DocumentSession):
            return {"verification": session.label_suggestion(sid, label).dump()}

        return mutate(doc_id, op)

    @app.post("/verifications/{vid}/visit")
    def visit_query(vid: str, payload: dict = Body(...)):
        index = _field(payload, "index")
        if not isinstance(index, int):
            raise SchemaViolation("index must be an integer")
        doc_id = _doc_of(vid)

        def op(session: DocumentSession):
            return {"verification": session.visit_query(vid, index).dump()}

        return mutate(doc_id, op)

    @app.post("/verifications/{vid}/label")
    def label_verification(vid: str, payload: dict = Body(...)):
        label = _field(payload, "label")
        doc_id = _doc_of(vid)

        def op(session: DocumentSession):
            return {"verification": session.label_verification(vid, label).dump()}

        return mutate(doc_id, op)

    # ------------------------------------------------------------------
    # audit, metrics, events, mode

    @app.get("/documents/{doc_id}/audit")
    def get_audit(doc_id: str):
        export = read(doc_id, lambda s: s.audit_export())
        return Response(content=canonical_json_bytes(export), media_type="application/json")

    @app.get("/documents/{doc_id}/metrics")
    def get_metrics(doc_id: str):
        metrics = read(doc_id, lambda s: s.metrics())
        metrics["provider"] = runtime.provider_stats()
        return metrics

    @app.get("/documents/{doc_id}/events")
    def get_events(doc_id: str):
        return {"events": read(doc_id, lambda s: [e.dump() for e in s.events])}

    @app.post("/documents/{doc_id}/mode")
    def switch_mode(doc_id: str, payload: dict = Body(...)):
        mode = _field(payload, "mode")
        if mode not in ("edit", "audit"):
            raise SchemaViolation("mode must be 'edit' or 'audit'")

        def op(session: DocumentSession):
            session.switch_mode(mode)
            return {"mode": session.mode}

        return mutate(doc_id, op)

    # ------------------------------------------------------------------
    # configuration and study mode

    @app.get("/config")
    def get_config():
        return {
            "study_mode": runtime.config.study_mode,
            "perturbed_mode": runtime.config.perturbed_mode,
            "search_url_template": runtime.config.search_url_template,
            "marker_period_s": runtime.config.marker_period_s,
            "paste_cap": runtime.config.paste_cap,
            "min_screen_inches": 13 if runtime.config.study_mode else None,
        }

    @app.post("/documents/{doc_id}/study-task")
    def assign_study_task(doc_id: str, payload: dict = Body(...)):
        if not runtime.config.study_mode:
            raise UnknownId("study mode is disabled")
        read(doc_id, lambda s: None)  # 404 on unknown documents
        meta = runtime.store.read_meta(doc_id)
        meta["study"] = {
            "destination": _field(payload, "destination"),
            "persona": _field(payload, "persona"),
            "recipient": payload.get("recipient"),
        }
        runtime.store.write_meta(doc_id, meta)
        return {"study": meta["study"]}

    @app.get("/documents/{doc_id}/study-task")
    def get_study_task(doc_id: str):
        if not runtime.config.study_mode:
            raise UnknownId("study mode is disabled")
        created = read(doc_id, lambda s: s.created_at_us)
        elapsed_s = max(0.0, runtime.clock() - created / 1_000_000)
        return {
            "study": runtime.store.read_meta(doc_id).get("study"),
            "elapsed_s": elapsed_s,
            "time_warning": elapsed_s > 300.0,
        }

    # ------------------------------------------------------------------
    # background marker runs

    if config.run_marker_scheduler:
        stop = threading.Event()

        def _tick():
            while not stop.wait(config.marker_period_s):
                for doc_id in runtime.store.list_ids():
                    try:
                        run_markers(doc_id)
                    except Exception:  # background loop must survive provider hiccups
                        log.exception("periodic marker run failed for %s", doc_id)

        thread = threading.Thread(target=_tick, name="marker-scheduler", daemon=True)

        @app.on_event("startup")
        def _start_scheduler():
            thread.start()

        @app.on_event("shutdown")
        def _stop_scheduler():
            stop.set()

    return app
