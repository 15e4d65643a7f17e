"""Executable text-edit engine with provenance tracing and verification."""

from .alignment import AlignmentSpan, AlignOp, char_align, render_alignment, word_align
from .config import EngineConfig
from .edits import (
    ComponentTag,
    DocumentText,
    ExecutableEdit,
    OccurrenceSpan,
    expand_edit,
    locate_occurrences,
    parse_edit_payload,
    serialize_edits,
)
from .provenance import CharProvenance, ProvenanceSnapshot, advance_snapshot, trace_spans
from .providers import PromptLibrary, ProviderReply, ScriptedProvider, assemble_prompt, choose_prompt_variant
from .session import DocumentSession
from .store import DocumentStore
from .suggestions import MarkerDef, SuggestionRecord, SuggestionStatus
from .verify import (
    AuditView,
    VerificationLabel,
    VerificationRecord,
    WARNING_TEXT,
    build_audit_view,
    metric_detected,
    metric_prevented,
)

__version__ = "0.1.0"

__all__ = [
    "AlignOp",
    "AlignmentSpan",
    "AuditView",
    "CharProvenance",
    "ComponentTag",
    "DocumentSession",
    "DocumentStore",
    "DocumentText",
    "EngineConfig",
    "ExecutableEdit",
    "MarkerDef",
    "OccurrenceSpan",
    "PromptLibrary",
    "ProviderReply",
    "ProvenanceSnapshot",
    "ScriptedProvider",
    "SuggestionRecord",
    "SuggestionStatus",
    "VerificationLabel",
    "VerificationRecord",
    "WARNING_TEXT",
    "advance_snapshot",
    "assemble_prompt",
    "build_audit_view",
    "char_align",
    "choose_prompt_variant",
    "expand_edit",
    "locate_occurrences",
    "metric_detected",
    "metric_prevented",
    "parse_edit_payload",
    "render_alignment",
    "serialize_edits",
    "trace_spans",
    "word_align",
]
