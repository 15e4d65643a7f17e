import json

from click.testing import CliRunner
from fastapi.testclient import TestClient

from edittrace.cli import main
from edittrace.config import EngineConfig
from edittrace.edits import ComponentTag, ExecutableEdit
from edittrace.service import create_app
from edittrace.store import DocumentStore

from conftest import FakeClock

PARIS_EDIT = {
    "original_text": "Lets plan a trip too Paris.",
    "replace_text": "Let's plan a trip to Paris.",
    "component": "marker_TYPO",
    "replace_all": "0",
    "new_info": "0",
}


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


# ---------------------------------------------------------------------------
# validate


def test_validate_paris_example(tmp_path):
    path = tmp_path / "payload.json"
    path.write_text(json.dumps([PARIS_EDIT]), encoding="utf-8")
    result = run("validate", path)
    assert result.exit_code == 0
    assert "0: OK" in result.output


def test_validate_empty_array(tmp_path):
    path = tmp_path / "payload.json"
    path.write_text("[]", encoding="utf-8")
    result = run("validate", path)
    assert result.exit_code == 0
    assert "0/0 edits valid" in result.output


def test_validate_missing_component_fails(tmp_path):
    bad = {k: v for k, v in PARIS_EDIT.items() if k != "component"}
    path = tmp_path / "payload.json"
    path.write_text(json.dumps([PARIS_EDIT, bad]), encoding="utf-8")
    result = run("validate", path)
    assert result.exit_code == 1
    assert "1: SchemaViolation" in result.output
    assert "0: OK" in result.output


def test_validate_malformed_file(tmp_path):
    path = tmp_path / "payload.json"
    path.write_text("{nope", encoding="utf-8")
    result = run("validate", path)
    assert result.exit_code == 1
    assert "malformed payload" in result.output


# ---------------------------------------------------------------------------
# replay


def edit(original, replace, new_info=False):
    return ExecutableEdit(original, replace, ComponentTag("chat"), new_info=new_info)


def build_prevented_60_store(tmp_path):
    """Five inaccurate suggestions; three dismissed, two accepted and kept."""
    store = DocumentStore(tmp_path, config=EngineConfig(), clock=FakeClock())
    session = store.create("one two three four five")
    words = ["one", "two", "three", "four", "five"]
    records = session.submit_suggestions(
        [edit(w, f"{w} plus{i}", new_info=True) for i, w in enumerate(words)],
        ground_truth=[True] * 5,
    )
    for record in records[:3]:
        session.dismiss(record.id)
    for record in records[3:]:
        session.accept(record.id)
    store.flush(session)
    return store, session


def test_replay_worked_example_prints_prevented_60(tmp_path):
    _store, session = build_prevented_60_store(tmp_path)
    log = tmp_path / session.doc_id / "events.log"
    result = run("replay", log)
    assert result.exit_code == 0
    assert "inaccurate edits prevented: 60.0%" in result.output


def test_replay_empty_session_keeps_template(tmp_path):
    store = DocumentStore(tmp_path, config=EngineConfig(), clock=FakeClock())
    session = store.create("untouched template")
    store.flush(session)
    result = run("replay", tmp_path / session.doc_id / "events.log")
    assert result.exit_code == 0
    assert "untouched template" in result.output
    assert "(none)" in result.output


def test_replay_corrupt_log_exits_2(tmp_path):
    path = tmp_path / "events.log"
    path.write_text('{"seq": 1, "at_us": 5, "kind": "snapshot", "payload"', encoding="utf-8")
    result = run("replay", path)
    assert result.exit_code == 2


def test_replay_json_format(tmp_path):
    _store, session = build_prevented_60_store(tmp_path)
    result = run("replay", tmp_path / session.doc_id / "events.log", "--format", "json")
    assert result.exit_code == 0
    report = json.loads(result.output)
    assert report["metrics"]["prevented_pct"] == 60.0
    assert report["content"] == session.content


# ---------------------------------------------------------------------------
# audit


def test_audit_empty_document(tmp_path):
    store = DocumentStore(tmp_path, config=EngineConfig(), clock=FakeClock())
    session = store.create("all human words")
    store.flush(session)
    result = run("audit", tmp_path / session.doc_id, "--format", "text")
    assert result.exit_code == 0
    assert "(none)" in result.output


def test_audit_shows_new_info_span(tmp_path):
    store = DocumentStore(tmp_path, config=EngineConfig(), clock=FakeClock())
    session = store.create("alpha beta")
    (record,) = session.submit_suggestions([edit("beta", "beta gamma", new_info=True)])
    session.accept(record.id)
    store.flush(session)
    result = run("audit", tmp_path / session.doc_id, "--format", "text")
    assert result.exit_code == 0
    assert "new_info_unlabeled" in result.output


def test_audit_matches_service_bytes(tmp_path):
    store_dir = tmp_path / "store"
    store, session = build_prevented_60_store(store_dir)
    session.label_suggestion(list(session.records)[3], "incorrect")
    store.flush(session)

    result = run("audit", store_dir / session.doc_id)
    assert result.exit_code == 0
    cli_bytes = result.stdout_bytes

    app = create_app(EngineConfig(store_dir=store_dir), provider=None, clock=FakeClock())
    client = TestClient(app, raise_server_exceptions=False)
    response = client.get(f"/documents/{session.doc_id}/audit")
    assert response.status_code == 200
    assert response.content == cli_bytes


def test_audit_corrupt_store_exits_2(tmp_path):
    store = DocumentStore(tmp_path, config=EngineConfig(), clock=FakeClock())
    session = store.create("x")
    store.flush(session)
    log = tmp_path / session.doc_id / "events.log"
    log.write_text(log.read_text(encoding="utf-8")[:-15], encoding="utf-8")
    result = run("audit", tmp_path / session.doc_id)
    assert result.exit_code == 2
