"""Headless operations over the same engine the service uses.

Exit codes: 0 success, 1 validation failure, 2 corrupt input.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .config import EngineConfig
from .edits import SchemaViolation, edit_from_obj
from .events import SessionEvent
from .session import DocumentSession, ReplayError
from .store import StoreCorrupt, canonical_json_bytes, load_document_dir
from .verify import LABEL_DISPLAY, VerificationLabel


@click.group()
def main() -> None:
    """Validate edit payloads, replay session logs, and emit audit reports."""


@main.command()
@click.argument("payload_file", type=click.Path(exists=True, dir_okay=False, path_type=Path))
def validate(payload_file: Path) -> None:
    """Check every edit in a payload file against the edit schema."""
    try:
        decoded = json.loads(payload_file.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        click.echo(f"malformed payload: {exc}")
        sys.exit(1)
    if isinstance(decoded, dict):
        decoded = [decoded]
    if not isinstance(decoded, list):
        click.echo(f"malformed payload: expected an array of edits, got {type(decoded).__name__}")
        sys.exit(1)
    failures = 0
    for index, obj in enumerate(decoded):
        try:
            edit = edit_from_obj(obj)
        except SchemaViolation as exc:
            failures += 1
            click.echo(f"{index}: SchemaViolation: {exc}")
        else:
            click.echo(f"{index}: OK {edit.component} {edit.original_text!r} -> {edit.replace_text!r}")
    click.echo(f"{len(decoded) - failures}/{len(decoded)} edits valid")
    sys.exit(0 if failures == 0 else 1)


def _load_events(log_file: Path) -> list[SessionEvent]:
    events = []
    for number, line in enumerate(log_file.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            events.append(SessionEvent.from_line(line))
        except (ValueError, KeyError) as exc:
            raise StoreCorrupt(f"bad event at line {number}: {exc}") from exc
    return events


def _pct(value: float | None) -> str:
    return "N/A" if value is None else f"{value:.1f}%"


def _print_session_report(session: DocumentSession, fmt: str) -> None:
    metrics = session.metrics()
    if fmt == "json":
        report = {
            "doc_id": session.doc_id,
            "content": session.content,
            "version_id": session.version_id,
            "spans": session.trace_payload(),
            "metrics": metrics,
        }
        sys.stdout.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
        return
    click.echo(f"document {session.doc_id} (version {session.version_id})")
    click.echo("--- content ---")
    click.echo(session.content)
    click.echo("--- provenance spans ---")
    spans = session.trace_payload()
    if not spans:
        click.echo("(none)")
    for span in spans:
        label = LABEL_DISPLAY[VerificationLabel(span["label"])]
        click.echo(
            f"[{span['start']:>4},{span['end']:>4}) {span['edit_id']}"
            f" new_info={'1' if span['new_info'] else '0'} {span['highlight_class']}"
            f" label={label} {span['text']!r}"
        )
    click.echo("--- metrics ---")
    click.echo(f"inaccurate edits prevented: {_pct(metrics['prevented_pct'])}")
    click.echo(f"inaccurate edits detected:  {_pct(metrics['detected_pct'])}")
    counts = metrics["suggestions"]
    click.echo(
        "suggestions: "
        + ", ".join(f"{k}={counts[k]}" for k in ("pending", "accepted", "dismissed", "implicitly_dismissed", "discarded"))
    )


@main.command()
@click.argument("event_log", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def replay(event_log: Path, fmt: str) -> None:
    """Fold an event log into its final document state and metrics."""
    try:
        events = _load_events(event_log)
        session = DocumentSession.replay(events)
    except (StoreCorrupt, ReplayError) as exc:
        click.echo(f"corrupt event log: {exc}", err=True)
        sys.exit(2)
    _print_session_report(session, fmt)


@main.command()
@click.argument("document_dir", type=click.Path(exists=True, file_okay=False, path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["json", "text"]), default="json")
def audit(document_dir: Path, fmt: str) -> None:
    """Emit the audit report for a stored document."""
    try:
        session = load_document_dir(document_dir)
    except (StoreCorrupt, ReplayError) as exc:
        click.echo(f"corrupt document store: {exc}", err=True)
        sys.exit(2)
    except KeyError as exc:
        click.echo(f"not a document directory: {exc}", err=True)
        sys.exit(2)
    export = session.audit_export()
    if fmt == "json":
        sys.stdout.buffer.write(canonical_json_bytes(export))
        return
    click.echo(f"audit of {export['doc_id']}")
    click.echo("--- content ---")
    click.echo(export["content"])
    click.echo("--- system-originated spans ---")
    if not export["spans"]:
        click.echo("(none)")
    for span in export["spans"]:
        click.echo(
            f"[{span['start']:>4},{span['end']:>4}) {span['highlight_class']:<18}"
            f" {span['edit_id']} {span['text']!r}"
        )
    metrics = export["metrics"]
    click.echo("--- metrics ---")
    click.echo(f"inaccurate edits prevented: {_pct(metrics['prevented_pct'])}")
    click.echo(f"inaccurate edits detected:  {_pct(metrics['detected_pct'])}")


@main.command()
@click.option("--store", "store_dir", required=True, type=click.Path(file_okay=False, path_type=Path))
@click.option("--provider", type=click.Choice(["scripted", "remote"]), default=None)
@click.option("--fixtures", type=click.Path(file_okay=False, path_type=Path), default=None)
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8040, type=int)
@click.option("--markers-every", default=None, type=float, help="Run visible markers every N seconds.")
def serve(store_dir: Path, provider: str | None, fixtures: Path | None, host: str, port: int, markers_every: float | None) -> None:
    """Run the HTTP service over a document store."""
    import uvicorn

    from .service import create_app

    config = EngineConfig.from_env()
    config.store_dir = store_dir
    if provider:
        config.provider_kind = provider
    if fixtures:
        config.fixtures_dir = fixtures
    if markers_every is not None:
        config.marker_period_s = markers_every
        config.run_marker_scheduler = True
    uvicorn.run(create_app(config), host=host, port=port)


if __name__ == "__main__":
    main()
