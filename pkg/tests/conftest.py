import pathlib

import pytest

from shexi import Iri, Literal, Triple, parse_graph, parse_schema
from shexi.rdf import XSD_STRING, number_literal

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def load_schema(name: str):
    return parse_schema(fixture_text(name))


def load_graph(name: str):
    return parse_graph(fixture_text(name))


# Sets of triples and the typing shared by the bag-matching, shape and extends examples.
N = Iri("n")
P = "urn:p:p"
Q = "urn:p:q"
TWO, FOUR, SIX = (number_literal(v) for v in ("2", "4", "6"))
A = Literal("a", XSD_STRING)


def triples(*objs, pred=P):
    return frozenset(Triple(N, pred, o) for o in objs)


M24 = triples(TWO, FOUR)
M246 = triples(TWO, FOUR, SIX)
M2A = triples(TWO, A)
M24A = triples(TWO, FOUR, A)
M24A_Q = M24A | {Triple(N, Q, TWO)}
SETS = {"M24": M24, "M246": M246, "M2a": M2A, "M24a": M24A}

TAU = frozenset(
    {
        (TWO, "T_even"),
        (TWO, "T_lt5"),
        (FOUR, "T_even"),
        (FOUR, "T_lt5"),
        (SIX, "T_even"),
        (SIX, "T_gt5"),
        (A, "T_str"),
    }
)


@pytest.fixture(scope="session")
def fig_schema():
    return load_schema("fig1.shexi")


@pytest.fixture(scope="session")
def fig_graph():
    return load_graph("fig2.nt")


# One summary line per acceptance criterion.
_CRITERIA = {}


def _criterion(nodeid: str):
    name = nodeid.rpartition("::")[2]
    if "test_acceptance.py" not in nodeid or not name.startswith("test_criterion_"):
        return None
    return int(name.split("_")[2])


def pytest_runtest_logreport(report):
    number = _criterion(report.nodeid)
    if number is None:
        return
    if report.failed:
        _CRITERIA[number] = False
    elif report.when == "call" and report.passed:
        _CRITERIA.setdefault(number, True)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if _CRITERIA[number] else 'FAIL'}")
