import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from edittrace.provenance import (
    CharProvenance,
    LengthMismatch,
    ProvenanceSnapshot,
    USER_TAG,
    advance_snapshot,
    decode_tags,
    encode_tags,
    replacement_tags,
    splice_tags,
    system_tag,
    trace_spans,
)


def user_snapshot(content: str, version: int = 1) -> ProvenanceSnapshot:
    return ProvenanceSnapshot(version, content, (USER_TAG,) * len(content))


def test_snapshot_length_invariant_enforced():
    with pytest.raises(LengthMismatch):
        ProvenanceSnapshot(1, "abc", (USER_TAG,))


def test_replacement_tags_insertion_only():
    # "trip" -> "trip to": the three introduced characters are system-tagged.
    tags = (USER_TAG,) * 10
    tag = system_tag("s1", False)
    out = replacement_tags(tags, 3, "trip", "trip to", tag)
    assert len(out) == len("trip to")
    assert out[:4] == tags[3:7]
    assert all(t == tag for t in out[4:])


def test_replacement_tags_pure_deletion_leaves_no_trace():
    tags = (USER_TAG,) * 9
    out = replacement_tags(tags, 0, "very nice", "nice", system_tag("s1", False))
    assert out == tags[5:9]
    assert all(t.origin == "user" for t in out)


def test_replacement_tags_substituted_character_is_system():
    tags = (USER_TAG,) * 3
    tag = system_tag("s9", True)
    out = replacement_tags(tags, 0, "cat", "bat", tag)
    assert out[0] == tag
    assert out[1:] == tags[1:3]


def test_manual_typing_is_user_origin():
    snapshot = user_snapshot("hi")
    tags = splice_tags(snapshot.tags, 2, 2, (USER_TAG,))
    assert tags == (USER_TAG,) * 3


def test_advance_snapshot_no_change():
    base = ProvenanceSnapshot(3, "abc", (USER_TAG, system_tag("s1", True), USER_TAG))
    advanced = advance_snapshot(base, "abc")
    assert advanced.version_id == 4
    assert advanced.tags == base.tags


def test_advance_snapshot_shifts_system_text():
    content = "Visit the Eiffel Tower today."
    start = content.index("Eiffel Tower")
    tag = system_tag("s7", True)
    tags = tuple(
        tag if start <= i < start + len("Eiffel Tower") else USER_TAG for i in range(len(content))
    )
    base = ProvenanceSnapshot(1, content, tags)
    new_content = "It is lovely in spring. " + content
    advanced = advance_snapshot(base, new_content)
    new_start = new_content.index("Eiffel Tower")
    expected = [(new_start, new_start + len("Eiffel Tower"), "s7", True)]
    assert [(s.start, s.end, s.edit_id, s.new_info) for s in trace_spans(advanced)] == expected


def test_advance_snapshot_retyped_character_becomes_user():
    tag = system_tag("s2", False)
    base = ProvenanceSnapshot(1, "Tower", (tag,) * 5)
    advanced = advance_snapshot(base, "ToXer")
    assert [t.origin for t in advanced.tags] == ["system", "system", "user", "system", "system"]
    spans = trace_spans(advanced)
    assert [(s.start, s.end) for s in spans] == [(0, 2), (3, 5)]
    assert {s.edit_id for s in spans} == {"s2"}


@given(a=st.text(max_size=30), b=st.text(max_size=30))
@settings(max_examples=200)
def test_advance_snapshot_length_invariant(a, b):
    advanced = advance_snapshot(user_snapshot(a), b)
    assert len(advanced.tags) == len(b)
    assert advanced.content == b


def test_trace_spans_all_user():
    assert trace_spans(user_snapshot("entirely human text")) == []


def test_trace_spans_two_edits_with_user_gap():
    t1, t2 = system_tag("s1", True), system_tag("s2", False)
    tags = (t1, t1, USER_TAG, t2, t2, t2)
    snapshot = ProvenanceSnapshot(1, "abcdef", tags)
    assert [(s.start, s.end, s.edit_id, s.new_info) for s in trace_spans(snapshot)] == [
        (0, 2, "s1", True),
        (3, 6, "s2", False),
    ]


def test_trace_spans_split_edit_shares_id():
    t1 = system_tag("s1", True)
    tags = (t1, t1, USER_TAG, USER_TAG, t1)
    snapshot = ProvenanceSnapshot(1, "abcde", tags)
    spans = trace_spans(snapshot)
    assert [(s.start, s.end) for s in spans] == [(0, 2), (4, 5)]
    assert all(s.edit_id == "s1" for s in spans)


def test_trace_spans_adjacent_edits_stay_separate():
    t1, t2 = system_tag("s1", False), system_tag("s2", False)
    snapshot = ProvenanceSnapshot(1, "abcd", (t1, t1, t2, t2))
    assert [(s.start, s.end, s.edit_id) for s in trace_spans(snapshot)] == [
        (0, 2, "s1"),
        (2, 4, "s2"),
    ]


tag_strategy = st.one_of(
    st.just(USER_TAG),
    st.builds(
        CharProvenance,
        origin=st.just("system"),
        edit_id=st.sampled_from(["s1", "s2", "s3"]),
        new_info=st.booleans(),
    ),
)


@given(tags=st.lists(tag_strategy, max_size=40))
@settings(max_examples=200)
def test_rle_round_trip(tags):
    assert decode_tags(encode_tags(tuple(tags))) == tuple(tags)
