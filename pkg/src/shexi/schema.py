"""Abstract syntax of shape expressions and schemas with inheritance.

Labels are plain strings; whether a label is simple or extendable is a
property of the :class:`Schema` that declares it.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Iterator, Mapping, Optional, Union

from .rdf import XSD_DECIMAL, XSD_INTEGER, Blank, Iri, Literal, RdfNode

# --- node constraints ----------------------------------------------------


@dataclass(frozen=True)
class AnyNode:
    def __call__(self, n: RdfNode) -> bool:
        return True


@dataclass(frozen=True)
class KindIs:
    kind: str  # "iri" | "blank" | "literal"

    def __post_init__(self):
        if self.kind not in ("iri", "blank", "literal"):
            raise ValueError(f"unknown node kind {self.kind!r}")

    def __call__(self, n: RdfNode) -> bool:
        return isinstance(n, {"iri": Iri, "blank": Blank, "literal": Literal}[self.kind])


@dataclass(frozen=True)
class DatatypeIs:
    datatype: str

    def __call__(self, n: RdfNode) -> bool:
        return isinstance(n, Literal) and n.datatype == self.datatype


@dataclass(frozen=True)
class ValueEq:
    value: RdfNode

    def __call__(self, n: RdfNode) -> bool:
        return n == self.value


@dataclass(frozen=True)
class ValueIn:
    values: frozenset

    def __call__(self, n: RdfNode) -> bool:
        return n in self.values


_COMPARE = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def numeric_value(n: RdfNode) -> Optional[Decimal]:
    if not isinstance(n, Literal) or n.datatype not in (XSD_INTEGER, XSD_DECIMAL):
        return None
    try:
        value = Decimal(n.lexical)
    except InvalidOperation:
        return None
    return value if value.is_finite() else None


@dataclass(frozen=True)
class NumRange:
    op: str
    bound: Decimal

    def __post_init__(self):
        if self.op not in _COMPARE:
            raise ValueError(f"unknown comparison {self.op!r}")
        object.__setattr__(self, "bound", Decimal(self.bound))

    def __call__(self, n: RdfNode) -> bool:
        value = numeric_value(n)
        return value is not None and _COMPARE[self.op](value, self.bound)


Facet = Union[AnyNode, KindIs, DatatypeIs, ValueEq, ValueIn, NumRange]


@dataclass(frozen=True)
class NodeConstraint:
    """A non-empty conjunction of facets."""

    facets: tuple

    def __post_init__(self):
        if not self.facets:
            raise ValueError("a node constraint needs at least one facet")
        object.__setattr__(self, "facets", tuple(self.facets))

    def __call__(self, n: RdfNode) -> bool:
        return all(f(n) for f in self.facets)


def eval_node_constraint(c: NodeConstraint, n: RdfNode) -> bool:
    return c(n)


# --- triple expressions --------------------------------------------------


@dataclass(frozen=True, eq=True)
class Epsilon:
    pass


@dataclass(frozen=True)
class TripleConstraint:
    predicate: str
    ref: str


@dataclass(frozen=True)
class OneOf:
    left: "TripleExpr"
    right: "TripleExpr"


@dataclass(frozen=True)
class EachOf:
    left: "TripleExpr"
    right: "TripleExpr"


@dataclass(frozen=True)
class Star:
    expr: "TripleExpr"


TripleExpr = Union[Epsilon, TripleConstraint, OneOf, EachOf, Star]

# --- shape expressions ---------------------------------------------------


@dataclass(frozen=True)
class Constraint:
    constraint: NodeConstraint


@dataclass(frozen=True)
class Ref:
    label: str


@dataclass(frozen=True)
class And:
    left: "ShapeExpr"
    right: "ShapeExpr"


@dataclass(frozen=True)
class Or:
    left: "ShapeExpr"
    right: "ShapeExpr"


@dataclass(frozen=True)
class Not:
    expr: "ShapeExpr"


@dataclass(frozen=True)
class Shape:
    expr: TripleExpr = Epsilon()
    closed: bool = False
    extra: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "extra", frozenset(self.extra))


@dataclass(frozen=True)
class ShapeWithExtends:
    parents: tuple
    shape: Shape

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))


ShapeExpr = Union[Constraint, Ref, And, Or, Not, Shape, ShapeWithExtends]


def triple_sub_exprs(e: TripleExpr) -> Iterator[TripleExpr]:
    yield e
    if isinstance(e, (OneOf, EachOf)):
        yield from triple_sub_exprs(e.left)
        yield from triple_sub_exprs(e.right)
    elif isinstance(e, Star):
        yield from triple_sub_exprs(e.expr)


def tcs(e: TripleExpr) -> frozenset:
    """All triple constraints occurring in ``e``."""
    return frozenset(x for x in triple_sub_exprs(e) if isinstance(x, TripleConstraint))


def props_of_expr(e: TripleExpr) -> frozenset:
    return frozenset(tc.predicate for tc in tcs(e))


def sub_exprs(s: ShapeExpr) -> Iterator[ShapeExpr]:
    """Shape sub-expressions of ``s`` in pre-order, ``s`` included."""
    yield s
    if isinstance(s, (And, Or)):
        yield from sub_exprs(s.left)
        yield from sub_exprs(s.right)
    elif isinstance(s, Not):
        yield from sub_exprs(s.expr)
    elif isinstance(s, ShapeWithExtends):
        yield from sub_exprs(s.shape)


def sub_exprs_with_parity(s: ShapeExpr, negated: bool = False) -> Iterator[tuple]:
    """Pairs ``(sub_expr, under_odd_negation)``."""
    yield s, negated
    if isinstance(s, (And, Or)):
        yield from sub_exprs_with_parity(s.left, negated)
        yield from sub_exprs_with_parity(s.right, negated)
    elif isinstance(s, Not):
        yield from sub_exprs_with_parity(s.expr, not negated)
    elif isinstance(s, ShapeWithExtends):
        yield from sub_exprs_with_parity(s.shape, negated)


def references(s: ShapeExpr) -> frozenset:
    """Labels referenced by ``s``: in triple constraints and as ``@label`` conjuncts."""
    found = set()
    for sub in sub_exprs(s):
        if isinstance(sub, Ref):
            found.add(sub.label)
        elif isinstance(sub, Shape):
            found.update(tc.ref for tc in tcs(sub.expr))
    return frozenset(found)


# --- schema --------------------------------------------------------------


class SchemaError(ValueError):
    """Raised when a schema is malformed or used outside its contract."""


@dataclass(frozen=True)
class Schema:
    simple: frozenset
    extendable: frozenset
    definitions: Mapping[str, ShapeExpr]
    abstract: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "simple", frozenset(self.simple))
        object.__setattr__(self, "extendable", frozenset(self.extendable))
        object.__setattr__(self, "abstract", frozenset(self.abstract))
        object.__setattr__(self, "definitions", dict(self.definitions))

    @property
    def labels(self) -> frozenset:
        return self.simple | self.extendable

    def definition(self, label: str) -> ShapeExpr:
        try:
            return self.definitions[label]
        except KeyError:
            raise SchemaError(f"undeclared label {label!r}") from None

    def leading_extends(self, x: str) -> ShapeWithExtends:
        if x not in self.extendable:
            raise SchemaError(f"{x!r} is not an extendable label")
        d = self.definition(x)
        if isinstance(d, And):
            d = d.left
        if not isinstance(d, ShapeWithExtends):
            raise SchemaError(f"definition of {x!r} is not an extendable shape expression")
        return d

    def ext_te(self, x: str) -> TripleExpr:
        return self.leading_extends(x).shape.expr

    def restr(self, x: str) -> Optional[ShapeExpr]:
        self.leading_extends(x)
        d = self.definition(x)
        return d.right if isinstance(d, And) else None

    def parents(self, x: str) -> tuple:
        return self.leading_extends(x).parents

    @classmethod
    def build(cls, definitions: Mapping[str, ShapeExpr], abstract=()) -> "Schema":
        """Infer extendable labels from leading ``EXTENDS``; everything else is simple."""
        extendable = {name for name, d in definitions.items() if _is_extendable_form(d)}
        return cls(frozenset(definitions) - extendable, extendable, definitions, frozenset(abstract))


def _is_extendable_form(d: ShapeExpr) -> bool:
    if isinstance(d, And):
        d = d.left
    return isinstance(d, ShapeWithExtends)


def ext_te(s: Schema, x: str) -> TripleExpr:
    return s.ext_te(x)


def restr(s: Schema, x: str) -> Optional[ShapeExpr]:
    return s.restr(x)


def check_schema_form(s: Schema) -> list:
    """Diagnostics for violations of the schema structure rules (empty when fine)."""
    out = []
    overlap = s.simple & s.extendable
    if overlap:
        out.append(f"labels declared both simple and extendable: {sorted(overlap)}")
    for label in sorted(s.labels - set(s.definitions)):
        out.append(f"label {label!r} has no definition")
    for label in sorted(set(s.definitions) - s.labels):
        out.append(f"definition for undeclared label {label!r}")
    for label in sorted(s.abstract - s.extendable):
        out.append(f"abstract label {label!r} is not extendable")
    for label in sorted(s.extendable & set(s.definitions)):
        if not _is_extendable_form(s.definitions[label]):
            out.append(f"extendable label {label!r} must be defined as EXTENDS [..] {{..}} [AND ..]")
    for label in sorted(s.definitions):
        d = s.definitions[label]
        for ref in sorted(references(d)):
            if ref not in s.labels:
                out.append(f"definition of {label!r} references undeclared label {ref!r}")
        for sub in sub_exprs(d):
            if isinstance(sub, ShapeWithExtends):
                for parent in sub.parents:
                    if parent not in s.extendable:
                        out.append(f"definition of {label!r} extends non-extendable label {parent!r}")
    return out
