"""RDF data model: nodes, triples, graphs and a small N-Triples style loader."""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional, Union

XSD = "http://www.w3.org/2001/XMLSchema#"
XSD_STRING = XSD + "string"
XSD_INTEGER = XSD + "integer"
XSD_DECIMAL = XSD + "decimal"
XSD_BOOLEAN = XSD + "boolean"

_IRI_FORBIDDEN = re.compile(r'[\s<>"{}|^`\\]')


class GraphSyntaxError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Iri:
    value: str

    def __post_init__(self):
        if not self.value:
            raise ValueError("IRI must be non-empty")

    def __str__(self):
        return f"<{self.value}>"


@dataclass(frozen=True)
class Blank:
    label: str

    def __post_init__(self):
        if not self.label:
            raise ValueError("blank node label must be non-empty")

    def __str__(self):
        return f"_:{self.label}"


@dataclass(frozen=True)
class Literal:
    lexical: str
    datatype: str = XSD_STRING

    def __str__(self):
        if self.datatype in (XSD_INTEGER, XSD_DECIMAL) and _NUMBER.fullmatch(self.lexical):
            if (self.datatype == XSD_INTEGER) == ("." not in self.lexical):
                return self.lexical
        text = '"' + _escape(self.lexical) + '"'
        if self.datatype != XSD_STRING:
            text += f"^^<{self.datatype}>"
        return text


RdfNode = Union[Iri, Blank, Literal]


@dataclass(frozen=True)
class Triple:
    subject: RdfNode
    predicate: str
    object: RdfNode

    def __post_init__(self):
        if isinstance(self.subject, Literal):
            raise ValueError("a literal cannot be the subject of a triple")

    def __str__(self):
        return f"{self.subject} <{self.predicate}> {self.object} ."


class NeighbourhoodSet(frozenset):
    """A frozenset of triples that all share one subject.

    The subject may be given explicitly so that an empty set still knows
    which node it belongs to.
    """

    def __new__(cls, triples: Iterable[Triple] = (), subject: Optional[RdfNode] = None):
        self = super().__new__(cls, triples)
        subjects = {t.subject for t in self}
        if len(subjects) > 1:
            raise ValueError(f"triples with different subjects: {sorted(map(str, subjects))}")
        if subjects:
            (found,) = subjects
            if subject is not None and subject != found:
                raise ValueError(f"subject {subject} does not match triples of {found}")
            subject = found
        self.subject = subject
        return self

    def props(self) -> frozenset:
        return frozenset(t.predicate for t in self)


class Graph:
    """An immutable finite set of triples indexed by subject."""

    def __init__(self, triples: Iterable[Triple] = ()):
        self.triples = frozenset(triples)
        index = defaultdict(set)
        for t in self.triples:
            index[t.subject].add(t)
        self.index = {s: frozenset(ts) for s, ts in index.items()}

    def __len__(self):
        return len(self.triples)

    def __iter__(self) -> Iterator[Triple]:
        return iter(self.triples)

    def __contains__(self, triple):
        return triple in self.triples

    def __eq__(self, other):
        return isinstance(other, Graph) and self.triples == other.triples

    def __hash__(self):
        return hash(self.triples)

    def __repr__(self):
        return f"Graph({len(self.triples)} triples)"

    def nodes(self) -> frozenset:
        found = set()
        for t in self.triples:
            found.add(t.subject)
            found.add(t.object)
        return frozenset(found)

    def subjects(self) -> frozenset:
        return frozenset(self.index)

    def serialize(self) -> str:
        return "".join(str(t) + "\n" for t in sorted(self.triples, key=str))


def neighbourhood(g: Graph, n: RdfNode) -> NeighbourhoodSet:
    """All triples of ``g`` with subject ``n`` (empty if ``n`` is not a subject)."""
    return NeighbourhoodSet(g.index.get(n, ()), subject=n)


def props_of_set(m: Iterable[Triple]) -> frozenset:
    return frozenset(t.predicate for t in m)


# --- parsing -------------------------------------------------------------

_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)")
_TOKEN = re.compile(
    r"""
    \s*(?:
      (?P<iri><[^>]*>)
    | (?P<bnode>_:[A-Za-z0-9_\-.]*)
    | (?P<literal>"(?:[^"\\]|\\.)*")(?:\^\^(?P<dt><[^>]*>))?
    | (?P<number>[+-]?(?:\d+(?:\.\d*)?|\.\d+))
    | (?P<dot>\.)
    )""",
    re.VERBOSE,
)
_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t").replace("\r", "\\r")


def _unescape(body: str, line: int) -> str:
    out = []
    chars = iter(body)
    for c in chars:
        if c == "\\":
            nxt = next(chars, "")
            if nxt not in _ESCAPES:
                raise GraphSyntaxError(f"unknown escape \\{nxt}", line)
            out.append(_ESCAPES[nxt])
        else:
            out.append(c)
    return "".join(out)


def _iri(token: str, line: int) -> str:
    value = token[1:-1]
    if not value or _IRI_FORBIDDEN.search(value):
        raise GraphSyntaxError(f"malformed IRI {token}", line)
    return value


def number_literal(token: str) -> Literal:
    """Bare numeric token: integer if it has no dot, decimal otherwise."""
    return Literal(token, XSD_DECIMAL if "." in token else XSD_INTEGER)


def _tokens(text: str, line: int) -> list:
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise GraphSyntaxError(f"unexpected input at column {pos + 1}: {text[pos:].strip()[:20]!r}", line)
        out.append(m)
        pos = m.end()
    return out


def _term(m, line: int, position: str) -> RdfNode:
    kind = m.lastgroup if m.lastgroup != "dt" else "literal"
    if kind == "iri":
        return Iri(_iri(m.group("iri"), line))
    if kind == "bnode":
        label = m.group("bnode")[2:]
        if not label:
            raise GraphSyntaxError("empty blank node label", line)
        return Blank(label)
    if position == "subject" and kind in ("literal", "number"):
        raise GraphSyntaxError("a literal cannot be a subject", line)
    if kind == "literal":
        lexical = _unescape(m.group("literal")[1:-1], line)
        dt = m.group("dt")
        return Literal(lexical, _iri(dt, line) if dt else XSD_STRING)
    if kind == "number":
        return number_literal(m.group("number"))
    raise GraphSyntaxError(f"unexpected {m.group(0).strip()!r} as {position}", line)


def parse_graph(text: str) -> Graph:
    """Parse the line-oriented triple format (one ``s p o .`` statement per line)."""
    triples = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = _tokens(line, lineno)
        if len(toks) != 4 or toks[3].lastgroup != "dot":
            raise GraphSyntaxError("expected '<subject> <predicate> <object> .'", lineno)
        subject = _term(toks[0], lineno, "subject")
        if toks[1].lastgroup != "iri":
            raise GraphSyntaxError("predicate must be an IRI", lineno)
        predicate = _iri(toks[1].group("iri"), lineno)
        obj = _term(toks[2], lineno, "object")
        triples.append(Triple(subject, predicate, obj))
    return Graph(triples)


def parse_node(text: str) -> RdfNode:
    """Parse a single node term; a bare name ``f1`` is read as the IRI ``<f1>``."""
    text = text.strip()
    if re.fullmatch(r"[A-Za-z_][\w\-.:/#]*", text) and not text.startswith("_:"):
        return Iri(text)
    toks = _tokens(text, 1)
    if len(toks) != 1:
        raise GraphSyntaxError(f"cannot parse node {text!r}", 1)
    return _term(toks[0], 1, "object")
