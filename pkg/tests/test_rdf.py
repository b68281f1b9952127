import pytest
from hypothesis import given, strategies as st

from conftest import fixture_text
from shexi import Blank, Graph, GraphSyntaxError, Iri, Literal, Triple, neighbourhood, parse_graph, parse_node
from shexi.rdf import XSD_DECIMAL, XSD_INTEGER, XSD_STRING, NeighbourhoodSet, number_literal, props_of_set


def test_running_example_graph_counts():
    g = parse_graph(fixture_text("fig2.nt"))
    assert len(g) == 16
    # 7 resources plus 10 distinct literals ("radius" occurs twice)
    literals = {n for n in g.nodes() if isinstance(n, Literal)}
    assert Literal("radius") in literals
    assert number_literal("-2.3") in literals


def test_running_example_node_total_is_frozen():
    g = parse_graph(fixture_text("fig2.nt"))
    assert len(g.nodes()) == 17
    assert len({n for n in g.nodes() if isinstance(n, Iri)}) == 7


def test_neighbourhood_of_f1():
    g = parse_graph(fixture_text("fig2.nt"))
    m = neighbourhood(g, Iri("f1"))
    assert len(m) == 3
    assert m.subject == Iri("f1")
    assert m.props() == {"urn:p:coord", "urn:p:attr"}
    empty = neighbourhood(g, Literal("fill"))
    assert len(empty) == 0 and empty.subject == Literal("fill")


def test_empty_graph():
    g = parse_graph("# nothing\n\n")
    assert len(g) == 0 and g.nodes() == frozenset()


@pytest.mark.parametrize(
    "line",
    [
        "<a> <p> .",
        '"lit" <p> <b> .',
        "<a> <p> <b>",
        "<a> _:x <b> .",
        "<a b> <p> <c> .",
        "<> <p> <c> .",
        '<a> <p> "unterminated .',
    ],
)
def test_malformed_lines_report_line_number(line):
    with pytest.raises(GraphSyntaxError) as info:
        parse_graph("<a> <p> <b> .\n" + line + "\n")
    assert info.value.line == 2


def test_literal_forms():
    g = parse_graph('<s> <p> "x"^^<http://www.w3.org/2001/XMLSchema#integer> .\n<s> <p> 3 .\n<s> <p> 3.5 .\n<s> <p> _:b .\n')
    objs = {t.object for t in g}
    assert Literal("x", XSD_INTEGER) in objs
    assert Literal("3", XSD_INTEGER) in objs
    assert Literal("3.5", XSD_DECIMAL) in objs
    assert Blank("b") in objs


def test_literal_subject_rejected_by_model():
    with pytest.raises(ValueError):
        Triple(Literal("x"), "p", Iri("o"))


def test_neighbourhood_set_requires_one_subject():
    with pytest.raises(ValueError):
        NeighbourhoodSet([Triple(Iri("a"), "p", Iri("o")), Triple(Iri("b"), "p", Iri("o"))])
    assert props_of_set([Triple(Iri("a"), "p", Iri("o"))]) == {"p"}


def test_parse_node_forms():
    assert parse_node("f1") == Iri("f1")
    assert parse_node("<urn:x>") == Iri("urn:x")
    assert parse_node('"colour"') == Literal("colour")
    assert parse_node("10.1") == Literal("10.1", XSD_DECIMAL)
    assert parse_node("_:b1") == Blank("b1")


iri = st.builds(Iri, st.from_regex(r"[a-z][a-z0-9:/#._-]{0,8}", fullmatch=True))
blank = st.builds(Blank, st.from_regex(r"[a-z][a-z0-9]{0,4}", fullmatch=True))
text = st.text(st.characters(blacklist_categories=("Cs", "Cc")), max_size=8)
literal = st.one_of(
    st.builds(Literal, text),
    st.integers(-999, 999).map(lambda i: Literal(str(i), XSD_INTEGER)),
    st.builds(lambda a, b: Literal(f"{a}.{b}", XSD_DECIMAL), st.integers(0, 99), st.integers(0, 99)),
    st.builds(lambda t: Literal(t, "http://example.org/dt"), text),
)
triple = st.builds(Triple, st.one_of(iri, blank), st.from_regex(r"urn:p:[a-z]{1,3}", fullmatch=True), st.one_of(iri, blank, literal))


@given(st.frozensets(triple, max_size=8))
def test_serialize_round_trip(ts):
    g = Graph(ts)
    assert parse_graph(g.serialize()) == g


@given(st.one_of(iri, blank, literal))
def test_node_text_round_trip(n):
    assert parse_node(str(n)) == n
