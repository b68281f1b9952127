"""Text syntax for schemas (``.shexi``) and shape maps (``.smap``).

A schema is a sequence of definitions ``[abstract] Name -> SE``.  Operator
precedence is ``NOT`` > ``AND`` > ``OR`` for shape expressions and
postfix ``*`` > ``;`` > ``|`` for triple expressions.  Bare predicate
names ``p`` stand for the IRI ``<urn:p:p>``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal

from .rdf import XSD_BOOLEAN, XSD_DECIMAL, XSD_INTEGER, XSD_STRING, Literal, RdfNode, number_literal, parse_node
from .schema import (
    And,
    AnyNode,
    Constraint,
    DatatypeIs,
    EachOf,
    Epsilon,
    KindIs,
    NodeConstraint,
    Not,
    NumRange,
    OneOf,
    Or,
    Ref,
    Schema,
    Shape,
    ShapeWithExtends,
    Star,
    TripleConstraint,
    ValueEq,
    ValueIn,
    check_schema_form,
)

PREDICATE_PREFIX = "urn:p:"
DATATYPE_NAMES = {"string": XSD_STRING, "integer": XSD_INTEGER, "decimal": XSD_DECIMAL, "boolean": XSD_BOOLEAN}
_RANGE_KEYWORDS = {"MININC": ">=", "MINEXC": ">", "MAXINC": "<=", "MAXEXC": "<"}
_NC_KEYWORDS = {".", "IRI", "BNODE", "LITERAL", "VALUE", "IN", "DATATYPE", *_RANGE_KEYWORDS}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")


class SchemaSyntaxError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(where + message)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Token:
    kind: str  # ident, iri, string, number, punct, eof
    text: str
    line: int
    column: int
    datatype: str = ""


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[ \t\r\f]+)
    | (?P<newline>\n)
    | (?P<comment>\#[^\n]*)
    | (?P<arrow>->)
    | (?P<iri><[^<>"\s]*>)
    | (?P<string>"(?:[^"\\\n]|\\.)*")(?:\^\^(?P<dt><[^<>"\s]*>))?
    | (?P<number>[+-]?(?:\d+(?:\.\d*)?|\.\d+))
    | (?P<ident>[A-Za-z_][A-Za-z0-9_\-]*)
    | (?P<punct>[@{}()\[\],;|*?+.])
    """,
    re.VERBOSE,
)


_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\"}


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", lambda m: _ESCAPES.get(m.group(1), m.group(1)), body)


def tokenize(text: str) -> list:
    tokens, pos, line, line_start = [], 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        column = pos - line_start + 1
        if not m:
            raise SchemaSyntaxError(f"unexpected character {text[pos]!r}", line, column)
        kind = m.lastgroup
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind == "string" or kind == "dt":
            body = _unescape(m.group("string")[1:-1])
            dt = m.group("dt")
            tokens.append(Token("string", body, line, column, dt[1:-1] if dt else XSD_STRING))
        elif kind == "iri":
            tokens.append(Token("iri", m.group(0)[1:-1], line, column))
        elif kind == "arrow":
            tokens.append(Token("punct", "->", line, column))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(0), line, column))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def at(self, text: str, kind: str = None) -> bool:
        t = self.tok
        return t.text == text and t.kind in ((kind,) if kind else ("punct", "ident"))

    def advance(self) -> Token:
        t = self.tok
        self.pos += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.advance()

    def fail(self, message: str):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise SchemaSyntaxError(f"{message}, found {found}", t.line, t.column)

    def name(self) -> str:
        if self.tok.kind != "ident":
            self.fail("expected a label name")
        return self.advance().text

    # schema
    def schema(self):
        definitions, abstract = {}, set()
        while self.tok.kind != "eof":
            start = self.tok
            is_abstract = False
            if self.tok.kind == "ident" and self.tok.text.lower() == "abstract" and self.peek().kind == "ident":
                self.advance()
                is_abstract = True
            label = self.name()
            self.expect("->")
            if label in definitions:
                raise SchemaSyntaxError(f"duplicate definition of {label!r}", start.line, start.column)
            definitions[label] = self.shape_expr()
            if is_abstract:
                abstract.add(label)
        return definitions, abstract

    def shape_expr(self):
        parts = [self.and_expr()]
        while self.at("OR"):
            self.advance()
            parts.append(self.and_expr())
        return _fold_right(Or, parts)

    def and_expr(self):
        parts = [self.not_expr()]
        while self.at("AND"):
            self.advance()
            parts.append(self.not_expr())
        return _fold_right(And, parts)

    def not_expr(self):
        if self.at("NOT"):
            self.advance()
            return Not(self.not_expr())
        return self.primary()

    def primary(self):
        t = self.tok
        if self.at("("):
            self.advance()
            inner = self.shape_expr()
            self.expect(")")
            return inner
        if self.at("@"):
            self.advance()
            return Ref(self.name())
        if self.at("EXTENDS"):
            self.advance()
            self.expect("[")
            parents = []
            if not self.at("]"):
                parents.append(self.name())
                while self.at(","):
                    self.advance()
                    parents.append(self.name())
            self.expect("]")
            return ShapeWithExtends(tuple(parents), self.shape())
        if self.at("CLOSED") or self.at("EXTRA") or self.at("{"):
            return self.shape()
        if t.text in _NC_KEYWORDS and t.kind in ("ident", "punct"):
            return Constraint(self.node_constraint())
        self.fail("expected a shape expression")

    def shape(self) -> Shape:
        closed = False
        extra = set()
        if self.at("CLOSED"):
            self.advance()
            closed = True
        if self.at("EXTRA"):
            self.advance()
            while not self.at("{"):
                extra.add(self.predicate())
        self.expect("{")
        expr = Epsilon() if self.at("}") else self.triple_expr()
        self.expect("}")
        return Shape(expr, closed, frozenset(extra))

    def node_constraint(self) -> NodeConstraint:
        facets = []
        while self.tok.text in _NC_KEYWORDS and self.tok.kind in ("ident", "punct"):
            word = self.advance().text
            if word == ".":
                facets.append(AnyNode())
            elif word == "IRI":
                facets.append(KindIs("iri"))
            elif word == "BNODE":
                facets.append(KindIs("blank"))
            elif word == "LITERAL":
                facets.append(KindIs("literal"))
                if self.tok.kind == "ident" and self.tok.text in DATATYPE_NAMES:
                    facets.append(DatatypeIs(DATATYPE_NAMES[self.advance().text]))
                elif self.tok.kind == "iri":
                    facets.append(DatatypeIs(self.advance().text))
            elif word == "DATATYPE":
                facets.append(DatatypeIs(self.datatype()))
            elif word == "VALUE":
                facets.append(ValueEq(self.literal()))
            elif word == "IN":
                self.expect("(")
                values = []
                while not self.at(")"):
                    values.append(self.literal())
                self.advance()
                facets.append(ValueIn(frozenset(values)))
            else:
                if self.tok.kind != "number":
                    self.fail(f"{word} needs a numeric bound")
                facets.append(NumRange(_RANGE_KEYWORDS[word], Decimal(self.advance().text)))
        return NodeConstraint(tuple(facets))

    def datatype(self) -> str:
        if self.tok.kind == "ident" and self.tok.text in DATATYPE_NAMES:
            return DATATYPE_NAMES[self.advance().text]
        if self.tok.kind == "iri":
            return self.advance().text
        self.fail("expected a datatype")

    def literal(self) -> Literal:
        t = self.tok
        if t.kind == "string":
            self.advance()
            return Literal(t.text, t.datatype)
        if t.kind == "number":
            self.advance()
            return number_literal(t.text)
        if t.kind == "ident" and t.text in ("true", "false"):
            self.advance()
            return Literal(t.text, XSD_BOOLEAN)
        self.fail("expected a literal")

    def predicate(self) -> str:
        t = self.tok
        if t.kind == "iri":
            if not t.text:
                self.fail("empty IRI")
            self.advance()
            return t.text
        if t.kind == "ident":
            self.advance()
            return PREDICATE_PREFIX + t.text
        self.fail("expected a predicate")

    # triple expressions
    def triple_expr(self):
        parts = [self.each_of()]
        while self.at("|"):
            self.advance()
            parts.append(self.each_of())
        return _fold_right(OneOf, parts)

    def each_of(self):
        parts = [self.postfix()]
        while self.at(";"):
            self.advance()
            if self.at("}") or self.at(")") or self.at("|"):
                break  # trailing ';'
            parts.append(self.postfix())
        return _fold_right(EachOf, parts)

    def postfix(self):
        e = self.triple_atom()
        while self.tok.kind == "punct" and self.tok.text in "*?+":
            op = self.advance().text
            if op == "*":
                e = Star(e)
            elif op == "?":
                e = OneOf(e, Epsilon())
            else:
                e = EachOf(e, Star(e))
        return e

    def triple_atom(self):
        if self.at("EPSILON"):
            self.advance()
            return Epsilon()
        if self.at("("):
            self.advance()
            e = self.triple_expr()
            self.expect(")")
            return e
        p = self.predicate()
        self.expect("@")
        return TripleConstraint(p, self.name())


def _fold_right(ctor, parts):
    result = parts[-1]
    for part in reversed(parts[:-1]):
        result = ctor(part, result)
    return result


def parse_schema(text: str) -> Schema:
    """Parse schema text; raises :class:`SchemaSyntaxError` on any problem."""
    definitions, abstract = _Parser(text).schema()
    if not definitions:
        raise SchemaSyntaxError("empty schema (no definitions)")
    schema = Schema.build(definitions, abstract)
    problems = check_schema_form(schema)
    if problems:
        raise SchemaSyntaxError("; ".join(problems))
    return schema


# --- serialization -------------------------------------------------------


def _predicate_text(p: str) -> str:
    if p.startswith(PREDICATE_PREFIX) and _IDENT.fullmatch(p[len(PREDICATE_PREFIX):]):
        name = p[len(PREDICATE_PREFIX):]
        if name not in ("EPSILON",):
            return name
    return f"<{p}>"


def _literal_text(lit: RdfNode) -> str:
    if isinstance(lit, Literal) and lit.datatype == XSD_BOOLEAN and lit.lexical in ("true", "false"):
        return lit.lexical
    return str(lit)


def _datatype_text(dt: str) -> str:
    for name, iri in DATATYPE_NAMES.items():
        if iri == dt:
            return name
    return f"<{dt}>"


def serialize_node_constraint(c: NodeConstraint) -> str:
    words = []
    facets = list(c.facets)
    i = 0
    while i < len(facets):
        f = facets[i]
        if isinstance(f, AnyNode):
            words.append(".")
        elif isinstance(f, KindIs):
            if f.kind == "literal":
                if i + 1 < len(facets) and isinstance(facets[i + 1], DatatypeIs):
                    words.append("LITERAL " + _datatype_text(facets[i + 1].datatype))
                    i += 1
                else:
                    words.append("LITERAL")
            else:
                words.append({"iri": "IRI", "blank": "BNODE"}[f.kind])
        elif isinstance(f, DatatypeIs):
            words.append("DATATYPE " + _datatype_text(f.datatype))
        elif isinstance(f, ValueEq):
            words.append("VALUE " + _literal_text(f.value))
        elif isinstance(f, ValueIn):
            words.append("IN (" + " ".join(sorted(_literal_text(v) for v in f.values)) + ")")
        elif isinstance(f, NumRange):
            keyword = {v: k for k, v in _RANGE_KEYWORDS.items()}[f.op]
            words.append(f"{keyword} {f.bound}")
        i += 1
    return " ".join(words)


def serialize_triple_expr(e) -> str:
    if isinstance(e, Epsilon):
        return "EPSILON"
    if isinstance(e, TripleConstraint):
        return f"{_predicate_text(e.predicate)} @{e.ref}"
    if isinstance(e, Star):
        inner = serialize_triple_expr(e.expr)
        return f"({inner})*" if isinstance(e.expr, (OneOf, EachOf, Star)) else f"{inner}*"
    op = " ; " if isinstance(e, EachOf) else " | "
    return _wrap_te(e.left) + op + _wrap_te(e.right)


def _wrap_te(e) -> str:
    text = serialize_triple_expr(e)
    return f"({text})" if isinstance(e, (OneOf, EachOf)) else text


def _shape_text(h: Shape) -> str:
    words = []
    if h.closed:
        words.append("CLOSED")
    if h.extra:
        words.append("EXTRA " + " ".join(sorted(_predicate_text(p) for p in h.extra)))
    body = "{ }" if isinstance(h.expr, Epsilon) else "{ " + serialize_triple_expr(h.expr) + " }"
    words.append(body)
    return " ".join(words)


def serialize_shape_expr(s) -> str:
    if isinstance(s, Constraint):
        return serialize_node_constraint(s.constraint)
    if isinstance(s, Ref):
        return f"@{s.label}"
    if isinstance(s, Shape):
        return _shape_text(s)
    if isinstance(s, ShapeWithExtends):
        return f"EXTENDS [{', '.join(s.parents)}] " + _shape_text(s.shape)
    if isinstance(s, Not):
        return "NOT " + _wrap_se(s.expr)
    op = " AND " if isinstance(s, And) else " OR "
    return _wrap_se(s.left) + op + _wrap_se(s.right)


def _wrap_se(s) -> str:
    text = serialize_shape_expr(s)
    return f"({text})" if isinstance(s, (And, Or, Constraint)) else text


def serialize_schema(schema: Schema) -> str:
    lines = []
    for label in sorted(schema.definitions):
        prefix = "abstract " if label in schema.abstract else ""
        lines.append(f"{prefix}{label} -> {serialize_shape_expr(schema.definitions[label])}")
    return "\n".join(lines) + "\n"


# --- shape maps ----------------------------------------------------------


class _All:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ALL"


ALL = _All()


@dataclass(frozen=True)
class ShapeMapRequest:
    node: RdfNode
    label: object  # label name or ALL


def parse_shape_map(text: str, schema: Schema) -> list:
    """One ``node @ Label`` (or ``node @ ALL``) entry per line; ``#`` starts a comment."""
    requests = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "@" not in line:
            raise SchemaSyntaxError("expected 'node @ Label'", lineno, 1)
        node_text, label = (part.strip() for part in line.rsplit("@", 1))
        try:
            node = parse_node(node_text)
        except ValueError as exc:
            raise SchemaSyntaxError(f"unparseable node {node_text!r} ({exc})", lineno, 1) from None
        if label == "ALL":
            requests.append(ShapeMapRequest(node, ALL))
        elif label in schema.labels:
            requests.append(ShapeMapRequest(node, label))
        else:
            raise SchemaSyntaxError(f"unknown label {label!r}", lineno, 1)
    return requests


def expand_requests(requests, schema: Schema) -> list:
    """Replace ``ALL`` requests by one request per declared label."""
    out = []
    for r in requests:
        if r.label is ALL:
            out.extend(ShapeMapRequest(r.node, label) for label in sorted(schema.labels))
        else:
            out.append(r)
    return out
