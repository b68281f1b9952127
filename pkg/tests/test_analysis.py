import random

import pytest

import gen
from conftest import load_schema
from shexi import (
    AnalysisError,
    DepKind,
    ancestors,
    build_dependency_graph,
    build_hierarchy,
    check_well_defined,
    descendants,
    parse_schema,
    restrict_schema,
    stratify,
)
from shexi.analysis import dependency_dot, hierarchy_dot, strongly_connected_components

FIG3_EDGES = {
    ("Colour", "Attribute"),
    ("Radius", "Attribute"),
    ("Circle", "Figure"),
    ("ColouredFigure", "Figure"),
    ("ColouredCircle", "Circle"),
    ("ColouredCircle", "ColouredFigure"),
}


def test_running_example_hierarchy(fig_schema):
    h = build_hierarchy(fig_schema)
    assert set(h.edges) == FIG3_EDGES
    assert ancestors(h, "ColouredCircle") == {"ColouredCircle", "Circle", "ColouredFigure", "Figure"}
    assert descendants(h, "Figure") == {"Figure", "Circle", "ColouredFigure", "ColouredCircle"}
    assert descendants(h, "Attribute") == {"Attribute", "Colour", "Radius"}


def test_nested_extends_are_not_ancestors():
    s = load_schema("example2.shexi")
    anc = ancestors(build_hierarchy(s), "x")
    assert anc == {"x", "x1", "x2"}
    assert not {"x3", "x4"} & anc


def edges_of(name):
    return build_dependency_graph(load_schema(name))


def test_dependency_facts_s1():
    dg = edges_of("s1.shexi")
    for a, b in [("y1", "y2"), ("y1", "y3"), ("y2", "y1"), ("y3", "y1")]:
        assert dg.has(a, b, DepKind.DEP)
    assert dg.negative_edges() == []


def test_dependency_facts_s2():
    dg = edges_of("s2.shexi")
    assert dg.has("y4", "y5", DepKind.DEP) and dg.has("y4", "y6", DepKind.DEP)
    assert dg.has("y5", "y4", DepKind.SHAPE_NEG)
    assert dg.has("y6", "y4", DepKind.EXTRA_NEG)
    assert {(a, b) for a, b, _ in dg.negative_edges()} == {("y5", "y4"), ("y6", "y4")}


def test_dependency_facts_s3():
    dg = edges_of("s3.shexi")
    assert dg.has("x1", "y7", DepKind.DEP) and dg.has("x2", "y8", DepKind.DEP)
    assert dg.has("y7", "x2", DepKind.SHAPE_NEG)
    assert dg.has("x1", "x2", DepKind.EXTENDS) and dg.has("x2", "x1", DepKind.EXTENDS)


def test_well_definedness_verdicts():
    assert check_well_defined(load_schema("s1.shexi")).verdict == "ok"
    v2 = check_well_defined(load_schema("s2.shexi"))
    assert v2.verdict == "negative_cycle"
    assert {"y4", "y5"} <= {u for step in v2.witness for u in (step[0], step[2])}
    v3 = check_well_defined(load_schema("s3.shexi"))
    assert v3.verdict == "negative_cycle"
    assert set(v3.witness) == {("y7", "dep-shape-neg", "x2"), ("x2", "dep-extends", "x1"), ("x1", "dep", "y7")}


def test_witness_is_a_closed_walk():
    for name in ("s2.shexi", "s3.shexi"):
        steps = check_well_defined(load_schema(name)).witness
        assert steps[0][1] in ("dep-shape-neg", "dep-extra-neg")
        for (a, _, b), (c, _, _) in zip(steps, steps[1:] + steps[:1]):
            assert b == c


def test_cyclic_hierarchy_detected():
    v = check_well_defined(load_schema("cyclic_guard.shexi"))
    assert v.verdict == "cyclic_hierarchy" and {"x1", "x2"} <= set(v.witness)
    with pytest.raises(AnalysisError):
        ancestors(build_hierarchy(load_schema("cyclic_guard.shexi")), "x1")


def test_extends_in_restriction_back_to_self_is_rejected():
    s = parse_schema("x -> EXTENDS [] {} AND EXTENDS [y] {}\ny -> EXTENDS [x] {}")
    assert check_well_defined(s).verdict == "cyclic_hierarchy"


def test_self_negation_is_ill_defined():
    assert check_well_defined(parse_schema("a -> NOT @a")).verdict == "negative_cycle"
    assert check_well_defined(parse_schema("a -> NOT { p @a }")).verdict == "negative_cycle"


def test_running_example_single_stratum(fig_schema):
    sigma = stratify(fig_schema)
    assert sigma.stratum_count == 1
    assert sigma.violations(build_dependency_graph(fig_schema)) == []


def test_negation_forces_two_strata():
    s = parse_schema("a -> NOT { p @b }\nb -> { q @b }")
    sigma = stratify(s)
    assert (sigma["a"], sigma["b"]) == (2, 1)
    sub = restrict_schema(s, sigma, 1)
    assert sub.labels == {"b"}
    with pytest.raises(AnalysisError):
        restrict_schema(s, sigma, 3)


def test_stratify_rejects_ill_defined():
    with pytest.raises(AnalysisError):
        stratify(load_schema("s2.shexi"))


@pytest.mark.parametrize("strategy", ["compact", "finest"])
def test_random_stratifications_are_valid(strategy):
    rng = random.Random(11)
    for _ in range(150):
        s = gen.random_schema(rng, max_strata=9)
        sigma = stratify(s, strategy)
        assert sigma.violations(build_dependency_graph(s)) == []


def test_scc_reverse_topological():
    succ = {1: {2}, 2: {1, 3}, 3: {4}, 4: set()}
    comps = strongly_connected_components([1, 2, 3, 4], succ)
    assert [set(c) for c in comps] == [{4}, {3}, {1, 2}]


def test_dot_output(fig_schema):
    h = hierarchy_dot(build_hierarchy(fig_schema))
    for c, p in FIG3_EDGES:
        assert f'"{c}" -> "{p}";' in h
    d = dependency_dot(build_dependency_graph(load_schema("s2.shexi")))
    assert '"y5" -> "y4" [color=red, label="shape-neg"]' in d
    assert d.startswith("digraph dependencies {")
