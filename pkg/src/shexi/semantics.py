"""Satisfiability of triple expressions and shape expressions under a typing.

Three mutually recursive relations are implemented:

* ``sat_te(M, typing, e)``   -- a set of triples against a triple expression,
* ``sat_node(n, typing, s)`` -- a node against a shape expression,
* ``sat_set(M, typing, s)``  -- a neighbourhood set against a shape expression.

Matching a set of triples against ``;`` and ``*`` is a search over subsets.
All searches work on bitmasks over the triples of one neighbourhood and are
memoized per :class:`MatchArena`; the worst case is exponential.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Optional

from .rdf import Graph, NeighbourhoodSet, RdfNode, Triple, neighbourhood
from .schema import (
    And,
    Constraint,
    EachOf,
    Epsilon,
    Not,
    OneOf,
    Or,
    Ref,
    Schema,
    SchemaError,
    Shape,
    ShapeWithExtends,
    Star,
    TripleConstraint,
    props_of_expr,
    tcs,
)


class EvaluationCycleError(RuntimeError):
    """The same EXTENDS expression was re-entered for the same node.

    Only happens on schemas that are not well-defined.
    """


class Typing:
    """An immutable set of ``(node, label)`` pairs."""

    __slots__ = ("pairs", "_by_node", "_by_label")

    def __init__(self, pairs: Iterable = ()):
        self.pairs = frozenset(pairs)
        self._by_node = None
        self._by_label = None

    def __contains__(self, pair) -> bool:
        return pair in self.pairs

    def __iter__(self):
        return iter(self.pairs)

    def __len__(self):
        return len(self.pairs)

    def __eq__(self, other):
        if isinstance(other, Typing):
            return self.pairs == other.pairs
        if isinstance(other, (set, frozenset)):
            return self.pairs == other
        return NotImplemented

    def __hash__(self):
        return hash(self.pairs)

    def __le__(self, other):
        return self.pairs <= Typing(other).pairs

    def __or__(self, other):
        return Typing(self.pairs | Typing(other).pairs)

    def __sub__(self, other):
        return Typing(self.pairs - Typing(other).pairs)

    def __repr__(self):
        return f"Typing({len(self.pairs)} pairs)"

    def by_node(self) -> dict:
        if self._by_node is None:
            index = {}
            for n, z in self.pairs:
                index.setdefault(n, set()).add(z)
            self._by_node = {n: frozenset(zs) for n, zs in index.items()}
        return self._by_node

    def by_label(self) -> dict:
        if self._by_label is None:
            index = {}
            for n, z in self.pairs:
                index.setdefault(z, set()).add(n)
            self._by_label = {z: frozenset(ns) for z, ns in index.items()}
        return self._by_label

    def labels_of(self, n) -> frozenset:
        return self.by_node().get(n, frozenset())

    def nodes_of(self, z) -> frozenset:
        return self.by_label().get(z, frozenset())

    def restrict(self, labels) -> "Typing":
        labels = frozenset(labels)
        return Typing(p for p in self.pairs if p[1] in labels)


# After this many restriction checks in one partition search, list the
# unions that satisfy the restriction once and enumerate only those.
_GOOD_UNION_THRESHOLD = 256


def _or(masks) -> int:
    out = 0
    for m in masks:
        out |= m
    return out


def min_size(e) -> int:
    """Fewest triples any set matching ``e`` can have."""
    if isinstance(e, TripleConstraint):
        return 1
    if isinstance(e, OneOf):
        return min(min_size(e.left), min_size(e.right))
    if isinstance(e, EachOf):
        return min_size(e.left) + min_size(e.right)
    return 0  # Epsilon, Star


def _as_typing(t) -> Typing:
    return t if isinstance(t, Typing) else Typing(t)


def submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask``, largest first, ending with 0."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def _bits(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


class MatchArena:
    """Triples of one neighbourhood, indexed ``0..m-1``, with a memo table.

    ``memo`` maps ``(mask, id(expr))`` to a boolean.  Expressions are
    expected to stay alive for the arena's lifetime (they belong to the
    schema), so their ids are stable keys.
    """

    def __init__(self, triples: Iterable[Triple], typing: Typing, subject=None, use_memo: bool = True):
        self.triples = sorted(triples, key=str)
        subjects = {t.subject for t in self.triples}
        if len(subjects) > 1:
            raise ValueError("triples of a neighbourhood must share their subject")
        self.subject = next(iter(subjects)) if subjects else subject
        self.typing = typing
        self.full = (1 << len(self.triples)) - 1
        self.use_memo = use_memo
        self.memo = {}
        self._cand = {}
        self._props = {}
        self._expr_props = {}

    def mask_of(self, triples: Iterable[Triple]) -> int:
        pos = {t: i for i, t in enumerate(self.triples)}
        mask = 0
        for t in triples:
            mask |= 1 << pos[t]
        return mask

    def triples_of(self, mask: int) -> frozenset:
        return frozenset(self.triples[i] for i in _bits(mask))

    def tc_matches(self, i: int, tc: TripleConstraint) -> bool:
        t = self.triples[i]
        return t.predicate == tc.predicate and (t.object, tc.ref) in self.typing

    def cand(self, e) -> int:
        """Triples matching at least one triple constraint of ``e``."""
        key = id(e)
        found = self._cand.get(key)
        if found is None:
            found = 0
            constraints = tcs(e)
            for i in range(len(self.triples)):
                if any(self.tc_matches(i, tc) for tc in constraints):
                    found |= 1 << i
            self._cand[key] = found
        return found

    def expr_props(self, e) -> frozenset:
        found = self._expr_props.get(id(e))
        if found is None:
            found = self._expr_props[id(e)] = props_of_expr(e)
        return found

    def props_mask(self, props: frozenset) -> int:
        key = props
        found = self._props.get(key)
        if found is None:
            found = 0
            for i, t in enumerate(self.triples):
                if t.predicate in props:
                    found |= 1 << i
            self._props[key] = found
        return found

    # -- triple expressions

    def match(self, mask: int, e) -> bool:
        if isinstance(e, Epsilon):
            return mask == 0
        if isinstance(e, TripleConstraint):
            if mask == 0 or mask & (mask - 1):
                return False
            return self.tc_matches(mask.bit_length() - 1, e)
        if mask & ~self.cand(e):
            return False  # some triple can reach no triple constraint
        key = (mask, id(e))
        if self.use_memo:
            found = self.memo.get(key)
            if found is not None:
                return found
        if isinstance(e, OneOf):
            result = self.match(mask, e.left) or self.match(mask, e.right)
        elif isinstance(e, EachOf):
            result = self._match_each_of(mask, e)
        elif isinstance(e, Star):
            result = self._match_star(mask, e)
        else:
            raise TypeError(f"not a triple expression: {e!r}")
        if self.use_memo:
            self.memo[key] = result
        return result

    def _match_each_of(self, mask: int, e: EachOf) -> bool:
        left_ok, right_ok = self.cand(e.left), self.cand(e.right)
        forced_left = mask & ~right_ok
        forced_right = mask & ~left_ok
        if forced_left & forced_right:
            return False
        free = mask & ~(forced_left | forced_right)
        for sub in submasks(free):
            left = forced_left | sub
            if self.match(left, e.left) and self.match(mask ^ left, e.right):
                return True
        return False

    def _match_star(self, mask: int, e: Star) -> bool:
        if mask == 0:
            return True
        # Every block of the partition is non-empty; the block holding the
        # lowest remaining triple is chosen first so each partition is
        # generated once.
        low = mask & -mask
        rest = mask ^ low
        for sub in submasks(rest):
            block = sub | low
            if self.match(block, e.expr) and self.match(mask ^ block, e):
                return True
        return False

    # -- shapes

    def split(self, mask: int, e) -> tuple:
        """``(M^e, M^not-e)`` as masks."""
        matched = mask & self.cand(e)
        unmatched = mask & self.props_mask(self.expr_props(e)) & ~matched
        return matched, unmatched

    def local_ok(self, h: Shape) -> int:
        """Triples that may sit in the local part of a shape without
        breaking its extra/closed conditions."""
        in_e = self.props_mask(self.expr_props(h.expr))
        in_extra = self.props_mask(h.extra)
        ok = self.cand(h.expr) | in_extra
        if not h.closed:
            ok |= self.full & ~in_e
        return ok

    def shape_ok(self, mask: int, h: Shape) -> bool:
        key = ("shape", mask, id(h))
        if self.use_memo and key in self.memo:
            return self.memo[key]
        matched, unmatched = self.split(mask, h.expr)
        extra = self.props_mask(h.extra)
        if unmatched & ~extra:
            result = False
        elif h.closed and mask & ~(self.props_mask(self.expr_props(h.expr)) | extra):
            result = False
        else:
            result = self.match(matched, h.expr)
        if self.use_memo:
            self.memo[key] = result
        return result


class Evaluator:
    """Evaluates the satisfiability relations for one graph and schema.

    ``ancestors`` is computed from the leading ``EXTENDS`` of each
    extendable definition.  Cyclic hierarchies are tolerated here; a
    cycle that makes evaluation re-enter itself raises
    :class:`EvaluationCycleError`.
    """

    def __init__(self, graph: Optional[Graph], schema: Schema, use_memo: bool = True):
        self.graph = graph if graph is not None else Graph()
        self.schema = schema
        self.use_memo = use_memo
        self._anc = {}
        self._active = set()
        self._arenas = {}

    # -- hierarchy helpers

    def anc(self, x) -> frozenset:
        found = self._anc.get(x)
        if found is None:
            seen, todo = {x}, [x]
            while todo:
                for p in self.schema.parents(todo.pop()):
                    if p not in seen:
                        seen.add(p)
                        todo.append(p)
            found = self._anc[x] = frozenset(seen)
        return found

    def anc_of_set(self, xs) -> frozenset:
        out = frozenset()
        for x in xs:
            out |= self.anc(x)
        return out

    def _slot_order(self, labels) -> list:
        """Ancestors before descendants, so restrictions can be checked as
        soon as every slot they read is filled."""
        order, seen = [], set()

        def visit(x):
            if x in seen:
                return
            seen.add(x)
            for p in sorted(self.schema.parents(x)):
                if p in labels:
                    visit(p)
            order.append(x)

        restricted = sorted(x for x in labels if self.schema.restr(x) is not None)
        for x in restricted + sorted(labels):
            visit(x)
        return order

    # -- public relations

    def arena(self, n: RdfNode, typing: Typing) -> MatchArena:
        entry = self._arenas.get(n)
        if entry is None or entry[0] is not typing:
            entry = self._arenas[n] = (typing, MatchArena(neighbourhood(self.graph, n), typing, n, self.use_memo))
        return entry[1]

    def sat_node(self, n: RdfNode, typing, s) -> bool:
        typing = _as_typing(typing)
        if isinstance(s, Constraint):
            return s.constraint(n)
        if isinstance(s, Ref):
            return (n, s.label) in typing
        if isinstance(s, And):
            return self.sat_node(n, typing, s.left) and self.sat_node(n, typing, s.right)
        if isinstance(s, Or):
            return self.sat_node(n, typing, s.left) or self.sat_node(n, typing, s.right)
        if isinstance(s, Not):
            return not self.sat_node(n, typing, s.expr)
        if isinstance(s, (Shape, ShapeWithExtends)):
            a = self.arena(n, typing)
            return self._sat_set(a, a.full, s)
        raise TypeError(f"not a shape expression: {s!r}")

    def sat_set(self, m: Iterable[Triple], typing, s, subject: Optional[RdfNode] = None) -> bool:
        typing = _as_typing(typing)
        m = NeighbourhoodSet(m, subject=subject if subject is not None else getattr(m, "subject", None))
        a = MatchArena(m, typing, m.subject, self.use_memo)
        return self._sat_set(a, a.full, s)

    def sat_te(self, m: Iterable[Triple], typing, e) -> bool:
        a = MatchArena(m, _as_typing(typing), use_memo=self.use_memo)
        return a.match(a.full, e)

    def split_matching(self, m: Iterable[Triple], typing, e) -> tuple:
        a = MatchArena(m, _as_typing(typing), use_memo=self.use_memo)
        matched, unmatched = a.split(a.full, e)
        return a.triples_of(matched), a.triples_of(unmatched)

    # -- sets of triples

    def _sat_set(self, a: MatchArena, mask: int, s) -> bool:
        if isinstance(s, Constraint):
            if a.subject is None:
                raise ValueError("node constraint on an empty triple set with unknown subject")
            return s.constraint(a.subject)
        if isinstance(s, Ref):
            if a.subject is None:
                raise ValueError("reference on an empty triple set with unknown subject")
            return (a.subject, s.label) in a.typing
        if isinstance(s, And):
            return self._sat_set(a, mask, s.left) and self._sat_set(a, mask, s.right)
        if isinstance(s, Or):
            return self._sat_set(a, mask, s.left) or self._sat_set(a, mask, s.right)
        if isinstance(s, Not):
            return not self._sat_set(a, mask, s.expr)
        if isinstance(s, Shape):
            return a.shape_ok(mask, s)
        if isinstance(s, ShapeWithExtends):
            return self._sat_extends(a, mask, s)
        raise TypeError(f"not a shape expression: {s!r}")

    def _sat_extends(self, a: MatchArena, mask: int, t: ShapeWithExtends) -> bool:
        key = (id(t), a.subject)
        if key in self._active:
            raise EvaluationCycleError(
                f"EXTENDS [{', '.join(t.parents)}] re-entered for node {a.subject}; the schema is not well-defined"
            )
        memo_key = ("extends", mask, id(t))
        if self.use_memo and memo_key in a.memo:
            return a.memo[memo_key]
        self._active.add(key)
        try:
            result = self._partition(a, mask, t)
        finally:
            self._active.discard(key)
        if self.use_memo:
            a.memo[memo_key] = result
        return result

    def _partition(self, a: MatchArena, mask: int, t: ShapeWithExtends) -> bool:
        schema = self.schema
        for x in t.parents:
            if x not in schema.extendable:
                raise SchemaError(f"EXTENDS of non-extendable label {x!r}")
        slots = self._slot_order(self.anc_of_set(t.parents))
        position = {x: i for i, x in enumerate(slots)}
        ext = [schema.ext_te(x) for x in slots]
        restrictions = [schema.restr(x) for x in slots]
        cands = [a.cand(e) for e in ext]
        # Slots whose masks a restriction at index >= i still needs.
        needed = []
        for i in range(len(slots) + 1):
            keep = set()
            for j in range(i, len(slots)):
                if restrictions[j] is not None:
                    keep.update(position[z] for z in self.anc(slots[j]) if position.get(z, len(slots)) < i)
            needed.append(sorted(keep))
        local = a.local_ok(t.shape)
        # The local shape matches its candidate triples among whatever is
        # left at the end, so fewer than its minimum size is a dead end.
        local_cand = a.cand(t.shape.expr)
        local_min = min_size(t.shape.expr)
        fits = [{} for _ in slots]
        reach = [0] * (len(slots) + 1)
        reach[len(slots)] = local
        for i in range(len(slots) - 1, -1, -1):
            reach[i] = reach[i + 1] | cands[i]
        # For a restricted slot: the other slots its restriction reads, and
        # every triple those slots together could hold.
        readers = [[position[z] for z in self.anc(x) if z in position and z != x] for x in slots]
        span = [cands[i] | _or(cands[j] for j in readers[i]) for i in range(len(slots))]
        probes = [0] * len(slots)
        good = [None] * len(slots)  # unions known to satisfy the restriction
        assigned = [0] * len(slots)
        failed = set()
        restr_cache = {}

        def holds(i: int, union: int) -> bool:
            ck = (i, union)
            if ck not in restr_cache:
                restr_cache[ck] = self._sat_set(a, union, restrictions[i])
            return restr_cache[ck]

        def options(i: int, remaining: int):
            """Masks slot ``i`` may take, restriction included."""
            pool = remaining & cands[i]
            fit = fits[i]
            if restrictions[i] is None:
                for sub in submasks(pool):
                    ok = fit.get(sub)
                    if ok is None:
                        ok = fit[sub] = a.match(sub, ext[i])
                    if ok:
                        yield sub
                return
            base = _or(assigned[j] for j in readers[i])
            if good[i] is None and probes[i] > _GOOD_UNION_THRESHOLD:
                good[i] = [u for u in submasks(mask & span[i]) if holds(i, u)]
            if good[i] is not None and len(good[i]) < (1 << pool.bit_count()):
                candidates = (u & ~base for u in good[i] if u & base == base and not (u & ~base) & ~pool)
                checked = True
            else:
                candidates = submasks(pool)
                checked = False
            for sub in candidates:
                ok = fit.get(sub)
                if ok is None:
                    ok = fit[sub] = a.match(sub, ext[i])
                if not ok:
                    continue
                if not checked:
                    probes[i] += 1
                    if not holds(i, base | sub):
                        continue
                yield sub

        def search(i: int, remaining: int) -> bool:
            if remaining & ~reach[i]:
                return False
            if (remaining & local_cand).bit_count() < local_min:
                return False
            if i == len(slots):
                return a.shape_ok(remaining, t.shape)
            state = (i, remaining, tuple(assigned[j] for j in needed[i]))
            if state in failed:
                return False
            for sub in options(i, remaining):
                assigned[i] = sub
                if search(i + 1, remaining ^ sub):
                    return True
            assigned[i] = 0
            failed.add(state)
            return False

        return search(0, mask)


# -- module-level convenience functions -----------------------------------


def sat_te(m: Iterable[Triple], typing, e, use_memo: bool = True) -> bool:
    a = MatchArena(m, _as_typing(typing), use_memo=use_memo)
    return a.match(a.full, e)


def split_matching(m: Iterable[Triple], typing, e) -> tuple:
    a = MatchArena(m, _as_typing(typing))
    matched, unmatched = a.split(a.full, e)
    return a.triples_of(matched), a.triples_of(unmatched)


def sat_node(graph: Graph, schema: Schema, n: RdfNode, typing, s) -> bool:
    return Evaluator(graph, schema).sat_node(n, typing, s)


def sat_set(schema: Schema, m: Iterable[Triple], typing, s, subject: Optional[RdfNode] = None) -> bool:
    return Evaluator(None, schema).sat_set(m, typing, s, subject)
