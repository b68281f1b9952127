"""Golden verdicts for the bag-matching, shape and extends examples."""

import pytest

from conftest import A, M24, M24A, M24A_Q, M246, M2A, SETS, TAU, TWO, load_schema
from shexi import Typing, sat_set, sat_te, split_matching
from shexi.semantics import Evaluator

EXAMPLE3 = load_schema("example3.shexi")
SHAPES = load_schema("shapes.shexi")
EXTENDS = load_schema("extends.shexi")


@pytest.mark.parametrize(
    "name, expected",
    [("M24", True), ("M246", True), ("M2a", True), ("M24a", False)],
)
def test_bag_matching_table(name, expected):
    e = EXAMPLE3.definitions["E"].expr
    assert sat_te(SETS[name], TAU, e) is expected


@pytest.mark.parametrize(
    "label, m, expected",
    [
        ("Open", M24, True),
        ("Open", M2A, False),
        ("Open", M246, False),
        ("Extra", M24A, True),
        ("Extra", M246, False),
        ("Extra", M24A_Q, True),
        ("ClosedExtra", M24A_Q, False),
    ],
)
def test_shape_table(label, m, expected):
    assert sat_set(SHAPES, m, TAU, SHAPES.definitions[label]) is expected


def test_split_of_open_shape():
    e = SHAPES.definitions["Open"].expr
    matched, unmatched = split_matching(M24A, TAU, e)
    assert matched == M24A - {t for t in M24A if t.object == A}
    assert {t.object for t in unmatched} == {A}
    matched, unmatched = split_matching(M246, TAU, e)
    assert matched == M246 and unmatched == frozenset()
    assert split_matching(frozenset(), TAU, e) == (frozenset(), frozenset())


EXTENDS_TABLE = {
    ("x1", "M24"): True,
    ("x2", "M246"): True,
    ("x2", "M24"): False,
    ("x1", "M24a"): False,
    ("x5", "M2a"): True,
    ("x6", "M24a"): False,
}
for _label in ("x3", "x4"):
    for _name in SETS:
        EXTENDS_TABLE[(_label, _name)] = False


@pytest.mark.parametrize("label, name", sorted(EXTENDS_TABLE))
def test_extends_table(label, name):
    expected = EXTENDS_TABLE[(label, name)]
    assert sat_set(EXTENDS, SETS[name], TAU, EXTENDS.definitions[label]) is expected


def test_empty_set_and_epsilon():
    from shexi.schema import Epsilon, Star, TripleConstraint

    assert sat_te(frozenset(), TAU, Epsilon())
    assert not sat_te(M24, TAU, Epsilon())
    assert sat_te(frozenset(), Typing(), Star(TripleConstraint("urn:p:p", "T_even")))


def test_memo_does_not_change_verdicts():
    e = EXAMPLE3.definitions["E"].expr
    for m in SETS.values():
        assert sat_te(m, TAU, e, use_memo=True) == sat_te(m, TAU, e, use_memo=False)
    for label in sorted(EXTENDS.labels):
        for m in SETS.values():
            with_memo = Evaluator(None, EXTENDS, use_memo=True).sat_set(m, TAU, EXTENDS.definitions[label])
            without = Evaluator(None, EXTENDS, use_memo=False).sat_set(m, TAU, EXTENDS.definitions[label])
            assert with_memo == without


def test_monotone_split():
    e = EXAMPLE3.definitions["E"].expr
    small = Typing({(TWO, "T_even")})
    big = Typing(TAU)
    assert split_matching(M24, small, e)[0] <= split_matching(M24, big, e)[0]
