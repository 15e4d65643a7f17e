import random

import pytest

from edittrace.alignment import target_text, word_align
from edittrace.config import EngineConfig
from edittrace.edits import ComponentTag, ExecutableEdit
from edittrace.providers import ScriptedProvider, SuggestionProvider, assemble_prompt
from edittrace.session import DocumentSession
from edittrace.suggestions import (
    NotPending,
    PasteCapExceeded,
    RangeOutOfBounds,
    StaleSuggestion,
    SuggestionStatus,
    shift_span,
)

from conftest import FakeClock


def make_session(template: str, clock=None, **config_kwargs) -> DocumentSession:
    config = EngineConfig(**config_kwargs)
    return DocumentSession.create(template, config=config, clock=clock or FakeClock(), doc_id="doc1")


def edit(original, replace, component="chat", replace_all=False, new_info=False):
    return ExecutableEdit(original, replace, ComponentTag.parse(component), replace_all, new_info)


class ExplodingProvider(SuggestionProvider):
    def complete(self, prompt):
        raise AssertionError("provider must not be called")


# ---------------------------------------------------------------------------
# submission and overlap resolution


def test_submit_binds_and_stays_pending():
    session = make_session("the quick brown fox")
    records = session.submit_suggestions([edit("quick brown", "swift tawny")])
    assert len(records) == 1
    assert records[0].status is SuggestionStatus.PENDING
    assert (records[0].span.start, records[0].span.end) == (4, 15)


def test_newer_overlapping_suggestion_supersedes_older():
    session = make_session("the quick brown fox")
    (older,) = session.submit_suggestions([edit("quick brown", "swift tawny")])
    (newer,) = session.submit_suggestions([edit("brown fox", "tawny fox")])
    assert older.status is SuggestionStatus.DISMISSED
    assert older.dismiss_reason == "superseded"
    assert newer.status is SuggestionStatus.PENDING


def test_non_overlapping_suggestions_both_pending():
    session = make_session("the quick brown fox jumps")
    a, b = session.submit_suggestions([edit("quick", "swift"), edit("jumps", "leaps")])
    assert a.status is SuggestionStatus.PENDING
    assert b.status is SuggestionStatus.PENDING


def test_absent_original_is_discarded():
    session = make_session("hello")
    (record,) = session.submit_suggestions([edit("bye", "farewell")])
    assert record.status is SuggestionStatus.DISCARDED
    assert record.span is None
    assert record.resolved_at_us is not None


def test_replace_all_creates_one_instance_per_occurrence():
    session = make_session("go go go")
    records = session.submit_suggestions([edit("go", "run", replace_all=True)])
    assert [(r.span.start, r.span.end) for r in records] == [(0, 2), (3, 5), (6, 8)]


def test_pending_spans_pairwise_disjoint_after_overlapping_batch():
    session = make_session("aaaa")
    session.submit_suggestions([edit("aa", "bb", replace_all=True)])
    session.submit_suggestions([edit("aaa", "ccc")])
    pending = [r for r in session.records.values() if r.status is SuggestionStatus.PENDING]
    spans = sorted((r.span.start, r.span.end) for r in pending)
    for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
        assert e1 <= s2


# ---------------------------------------------------------------------------
# accept


def test_accept_paris_example():
    session = make_session("Lets plan a trip too Paris.")
    (record,) = session.submit_suggestions(
        [edit("Lets plan a trip too Paris.", "Let's plan a trip to Paris.", "marker_TYPO")]
    )
    session.accept(record.id)
    assert session.content == "Let's plan a trip to Paris."
    assert record.status is SuggestionStatus.ACCEPTED
    assert session.version_id == 2


def test_accept_reconstructs_via_word_alignment():
    session = make_session("the launch went good overall")
    (record,) = session.submit_suggestions([edit("went good", "went well")])
    before = session.content
    span = (record.span.start, record.span.end)
    session.accept(record.id)
    script = word_align(record.edit.original_text, record.edit.replace_text)
    rebuilt = before[: span[0]] + target_text(script) + before[span[1] :]
    assert session.content == rebuilt


def test_accept_noop_replacement_still_bumps_version():
    session = make_session("same old text")
    (record,) = session.submit_suggestions([edit("old", "old")])
    session.accept(record.id)
    assert session.content == "same old text"
    assert session.version_id == 2
    assert record.status is SuggestionStatus.ACCEPTED


def test_accept_after_original_deleted_is_stale():
    session = make_session("Lets plan a trip too Paris.")
    (record,) = session.submit_suggestions([edit("too", "to")])
    start = session.content.index("too")
    session.manual_edit(start, start + 4, "")
    assert record.status is SuggestionStatus.IMPLICITLY_DISMISSED
    with pytest.raises(StaleSuggestion):
        session.accept(record.id)
    assert record.status is SuggestionStatus.IMPLICITLY_DISMISSED


def test_accept_twice_is_rejected_without_double_apply():
    session = make_session("fix teh typo")
    (record,) = session.submit_suggestions([edit("teh", "the")])
    session.accept(record.id)
    content = session.content
    with pytest.raises(NotPending):
        session.accept(record.id)
    assert session.content == content


def test_accept_all_applies_in_document_order():
    session = make_session("one two three four")
    session.submit_suggestions([edit("three", "3"), edit("one", "1")])
    accepted = session.accept_all("chat")
    assert session.content == "1 two 3 four"
    starts = [r.span.start for r in accepted]
    assert starts == sorted(starts)


# ---------------------------------------------------------------------------
# dismiss


def test_dismiss_pending():
    session = make_session("hello world")
    (record,) = session.submit_suggestions([edit("world", "globe")])
    session.dismiss(record.id)
    assert record.status is SuggestionStatus.DISMISSED
    assert session.content == "hello world"


def test_dismiss_resolved_suggestion_rejected():
    session = make_session("hello world")
    (record,) = session.submit_suggestions([edit("world", "globe")])
    session.accept(record.id)
    with pytest.raises(NotPending):
        session.dismiss(record.id)


def test_dismiss_all_clears_chat_batch_only():
    session = make_session("alpha beta gamma")
    session.submit_suggestions([edit("alpha", "a"), edit("beta", "b")], origin="chat")
    session.submit_suggestions([edit("gamma", "g", component="marker_Typos")], origin="marker_Typos")
    dismissed = session.dismiss_all("chat")
    assert len(dismissed) == 2
    statuses = {r.origin: r.status for r in session.records.values()}
    assert statuses["marker_Typos"] is SuggestionStatus.PENDING


# ---------------------------------------------------------------------------
# manual edits and revalidation


def test_manual_edit_appends_user_characters():
    session = make_session("hi")
    session.manual_edit(2, 2, "!")
    assert session.content == "hi!"
    assert [t.origin for t in session.tags] == ["user"] * 3


def test_manual_edit_range_checked():
    session = make_session("abc")
    with pytest.raises(RangeOutOfBounds):
        session.manual_edit(2, 9, "x")


def test_paste_cap_enforced_in_study_mode():
    session = make_session("abc", study_mode=True)
    session.manual_edit(0, 0, "y" * 50)
    with pytest.raises(PasteCapExceeded):
        session.manual_edit(0, 0, "z" * 51)
    relaxed = make_session("abc")
    relaxed.manual_edit(0, 0, "z" * 51)
    assert relaxed.content.startswith("z" * 51)


def test_revalidate_unchanged_document_no_transitions():
    session = make_session("alpha beta gamma")
    records = session.submit_suggestions([edit("alpha", "a"), edit("gamma", "g")])
    spans_before = [(r.span.start, r.span.end) for r in records]
    session.manual_edit(len(session.content), len(session.content), "")
    assert all(r.status is SuggestionStatus.PENDING for r in records)
    assert [(r.span.start, r.span.end) for r in records] == spans_before


def test_revalidate_retires_exactly_the_deleted_originals():
    session = make_session("one two three four five")
    words = ["one", "two", "three", "four", "five"]
    records = session.submit_suggestions([edit(w, w.upper()) for w in words])
    start = session.content.index("two")
    session.manual_edit(start, start + len("two three "), "")
    by_word = {r.edit.original_text: r for r in records}
    assert by_word["two"].status is SuggestionStatus.IMPLICITLY_DISMISSED
    assert by_word["three"].status is SuggestionStatus.IMPLICITLY_DISMISSED
    for word in ("one", "four", "five"):
        assert by_word[word].status is SuggestionStatus.PENDING
        span = by_word[word].span
        assert session.content[span.start : span.end] == word


def test_revalidate_rebinds_moved_original():
    session = make_session("fix teh typo")
    (record,) = session.submit_suggestions([edit("teh", "the")])
    session.manual_edit(0, 0, "Please ")
    assert record.status is SuggestionStatus.PENDING
    assert session.content[record.span.start : record.span.end] == "teh"
    assert record.span.start == "Please fix teh typo".index("teh")


def test_replace_all_instances_survive_deleting_one_occurrence():
    session = make_session("go go go")
    records = session.submit_suggestions([edit("go", "run", replace_all=True)])
    session.manual_edit(3, 6, "")  # drop the middle occurrence
    statuses = [r.status for r in records]
    assert statuses.count(SuggestionStatus.PENDING) == 2
    assert statuses.count(SuggestionStatus.IMPLICITLY_DISMISSED) == 1
    pending_spans = sorted(
        (r.span.start, r.span.end) for r in records if r.status is SuggestionStatus.PENDING
    )
    assert pending_spans == [(0, 2), (3, 5)]


# ---------------------------------------------------------------------------
# markers


def test_study_mode_seeds_default_marker_trio():
    session = make_session("hello", study_mode=True)
    assert [m.name for m in session.markers.values()] == ["Typos", "Professional", "Formal"]


def test_run_markers_with_no_visible_marker_skips_provider():
    session = make_session("hello")
    assert session.run_markers(ExplodingProvider()) == []
    marker = session.create_marker("Typos", "wavy", "#d32f2f", "Fix typos.")
    session.update_marker(marker.id, visible=False)
    assert session.run_markers(ExplodingProvider()) == []


def test_run_markers_submits_with_marker_origin():
    session = make_session("I recieved your note")
    session.create_marker("Typos", "wavy", "#d32f2f", "Fix typos.")
    provider = ScriptedProvider()
    prompt = assemble_prompt(
        session.library, "marker", session.content, markers=list(session.markers.values())
    )
    provider.script(
        prompt,
        {
            "reply": "Typos: 1 fix.",
            "edits": [
                {
                    "original_text": "recieved",
                    "replace_text": "received",
                    "component": "marker_Typos",
                    "replace_all": "0",
                    "new_info": "0",
                }
            ],
        },
    )
    (record,) = session.run_markers(provider)
    assert record.origin == "marker_Typos"
    assert record.status is SuggestionStatus.PENDING
    payload = session.suggestion_payload(record)
    assert payload["underline"] == {"style": "wavy", "color": "#d32f2f"}
    assert payload["visible"] is True


def test_hidden_marker_suggestions_withheld_from_render_but_retained():
    session = make_session("I recieved your note")
    marker = session.create_marker("Typos", "wavy", "#d32f2f", "Fix typos.")
    (record,) = session.submit_suggestions(
        [edit("recieved", "received", component="marker_Typos")], origin="marker_Typos"
    )
    session.update_marker(marker.id, visible=False)
    payload = session.suggestion_payload(record)
    assert payload["visible"] is False
    assert record.status is SuggestionStatus.PENDING


def test_duplicate_marker_name_rejected():
    session = make_session("hello")
    session.create_marker("Typos")
    from edittrace.session import DuplicateMarker

    with pytest.raises(DuplicateMarker):
        session.create_marker("Typos")


# ---------------------------------------------------------------------------
# randomized invariants


WORDS = ["asm", "bold", "cat", "dog", "echo", "fig", "gap", "hat", "ink", "jet"]


def random_invariant_run(seed: int) -> None:
    rng = random.Random(seed)
    template = " ".join(rng.choice(WORDS) for _ in range(rng.randrange(4, 12)))
    session = make_session(template, clock=FakeClock(step=0.25))
    for _ in range(30):
        action = rng.random()
        if action < 0.45:
            original = rng.choice(WORDS)
            replace = rng.choice(WORDS + [""])
            session.submit_suggestions(
                [edit(original, replace, replace_all=rng.random() < 0.3)]
            )
        elif action < 0.65 and session.content:
            start = rng.randrange(0, len(session.content) + 1)
            end = min(len(session.content), start + rng.randrange(0, 6))
            session.manual_edit(start, end, rng.choice(["", " ", rng.choice(WORDS)]))
        else:
            pending = [r for r in session.records.values() if r.status is SuggestionStatus.PENDING]
            if pending:
                target = rng.choice(pending)
                if rng.random() < 0.5:
                    session.accept(target.id)
                else:
                    session.dismiss(target.id)
        pending = [r for r in session.records.values() if r.status is SuggestionStatus.PENDING]
        spans = sorted((r.span.start, r.span.end) for r in pending)
        for (s1, e1), (s2, e2) in zip(spans, spans[1:]):
            assert e1 <= s2, f"overlap with seed {seed}"
        for record in pending:
            span = record.span
            assert span.version_id == session.version_id
            assert session.content[span.start : span.end] == record.edit.original_text
    for record in session.records.values():
        if record.status is not SuggestionStatus.PENDING:
            assert record.resolved_at_us is not None


@pytest.mark.parametrize("seed", range(12))
def test_random_sessions_keep_invariants(seed):
    random_invariant_run(seed)


# ---------------------------------------------------------------------------
# anchor shifting


@pytest.mark.parametrize(
    "anchor,change,expected",
    [
        ((5, 10), (0, 2, 5), (8, 13)),    # replacement before the anchor shifts it
        ((5, 10), (12, 14, 0), (5, 10)),  # change after the anchor leaves it alone
        ((5, 10), (5, 5, 3), (8, 13)),    # insertion at the start pushes it right
        ((5, 10), (10, 10, 3), (5, 10)),  # insertion at the end stays outside
        ((5, 10), (6, 8, 0), (5, 8)),     # inner deletion shrinks it
        ((5, 10), (4, 11, 2), (4, 4)),    # covering replacement empties it
    ],
)
def test_shift_span_cases(anchor, change, expected):
    start, end = anchor
    edit_start, edit_end, inserted = change
    assert shift_span(start, end, edit_start, edit_end, inserted) == expected
