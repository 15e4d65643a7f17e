import random

from hypothesis import given, settings
from hypothesis import strategies as st

from edittrace.alignment import (
    char_align,
    levenshtein_distance,
    render_alignment,
    script_cost,
    source_text,
    target_text,
    tokenize,
    word_align,
)

from oracles import indel_distance

PARIS_SOURCE = "Lets plan a trip too Paris."
PARIS_TARGET = "Let's plan a trip to Paris."

# Deleted and inserted words exactly as the visualization shows them; the
# equal spans carry the joining whitespace so both sides reconstruct.
PARIS_SPANS = [
    ("delete", "Lets"),
    ("insert", "Let's"),
    ("equal", " plan a trip "),
    ("delete", "too"),
    ("insert", "to"),
    ("equal", " Paris."),
]


def spans_as_tuples(spans):
    return [(span.op.value, span.text) for span in spans]


def test_word_align_paris_golden():
    assert spans_as_tuples(word_align(PARIS_SOURCE, PARIS_TARGET)) == PARIS_SPANS


def test_word_align_identity():
    assert spans_as_tuples(word_align("same text", "same text")) == [("equal", "same text")]


def test_word_align_substituted_word():
    assert spans_as_tuples(word_align("big red dog", "big blue dog")) == [
        ("equal", "big "),
        ("delete", "red"),
        ("insert", "blue"),
        ("equal", " dog"),
    ]


def test_char_align_identity():
    assert spans_as_tuples(char_align("abc", "abc")) == [("equal", "abc")]


def test_char_align_inner_insert():
    assert spans_as_tuples(char_align("abc", "abXc")) == [
        ("equal", "ab"),
        ("insert", "X"),
        ("equal", "c"),
    ]


def test_char_align_empty_source():
    assert spans_as_tuples(char_align("", "hi")) == [("insert", "hi")]


def test_char_align_empty_target():
    assert spans_as_tuples(char_align("hi", "")) == [("delete", "hi")]


def test_tie_break_is_frozen():
    # Repeated characters: the kept copy is the leftmost, extras trail.
    assert spans_as_tuples(char_align("aa", "a")) == [("equal", "a"), ("delete", "a")]
    assert spans_as_tuples(char_align("a", "aa")) == [("equal", "a"), ("insert", "a")]


def test_substitution_is_delete_plus_insert():
    spans = spans_as_tuples(char_align("cat", "bat"))
    assert spans == [("delete", "c"), ("insert", "b"), ("equal", "at")]


def test_delete_precedes_insert_in_changed_regions():
    ops = [op for op, _ in spans_as_tuples(word_align("the red dog", "the blue dog"))]
    assert ops == ["equal", "delete", "insert", "equal"]


def test_tokenize_preserves_everything():
    text = "Hello  world,\n\tthis is  Paris. "
    tokens = tokenize(text)
    assert "".join(tokens) == text
    assert "Paris." in tokens


def test_determinism():
    pairs = [("abcab", "bacba"), ("x y z", "z y x"), (PARIS_SOURCE, PARIS_TARGET)]
    for a, b in pairs:
        assert char_align(a, b) == char_align(a, b)
        assert word_align(a, b) == word_align(a, b)


@given(a=st.text(max_size=25), b=st.text(max_size=25))
@settings(max_examples=250)
def test_char_reconstruction(a, b):
    spans = char_align(a, b)
    assert source_text(spans) == a
    assert target_text(spans) == b


@given(a=st.text(alphabet="ab \t", max_size=30), b=st.text(alphabet="ab \t", max_size=30))
@settings(max_examples=250)
def test_word_reconstruction(a, b):
    spans = word_align(a, b)
    assert source_text(spans) == a
    assert target_text(spans) == b


@given(a=st.text(max_size=25), b=st.text(max_size=25))
@settings(max_examples=250)
def test_spans_are_maximal_runs(a, b):
    for spans in (char_align(a, b), word_align(a, b)):
        for left, right in zip(spans, spans[1:]):
            assert left.op != right.op


@given(a=st.text(alphabet="abcd", max_size=30), b=st.text(alphabet="abcd", max_size=30))
@settings(max_examples=250)
def test_char_cost_is_minimal(a, b):
    assert script_cost(char_align(a, b)) == indel_distance(a, b)


def test_char_cost_minimal_seeded_sample():
    rng = random.Random(2024)
    alphabet = "abcde "
    for _ in range(300):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 31)))
        b = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 31)))
        assert script_cost(char_align(a, b)) == indel_distance(a, b)


def test_levenshtein_known_values():
    assert levenshtein_distance("kitten", "sitting") == 3
    assert levenshtein_distance("abc", "abcd") == 1
    assert levenshtein_distance("", "abc") == 3
    assert levenshtein_distance("same", "same") == 0


@given(a=st.text(alphabet="abc", max_size=8), b=st.text(alphabet="abc", max_size=8))
@settings(max_examples=100)
def test_levenshtein_against_recursive_definition(a, b):
    def slow(x, y):
        if not x:
            return len(y)
        if not y:
            return len(x)
        return min(
            slow(x[1:], y) + 1,
            slow(x, y[1:]) + 1,
            slow(x[1:], y[1:]) + (x[0] != y[0]),
        )

    assert levenshtein_distance(a, b) == slow(a, b)


def test_render_alignment_paris():
    steps = render_alignment(word_align(PARIS_SOURCE, PARIS_TARGET))
    assert [(s.kind, s.text) for s in steps] == [
        ("strike", "Lets"),
        ("insert", "Let's"),
        ("plain", " plan a trip "),
        ("strike", "too"),
        ("insert", "to"),
        ("plain", " Paris."),
    ]


def test_render_alignment_trivial_cases():
    assert [(s.kind, s.text) for s in render_alignment(word_align("x", "x"))] == [("plain", "x")]
    assert [(s.kind, s.text) for s in render_alignment(word_align("", "new"))] == [("insert", "new")]
