"""Static analysis of schemas: extension hierarchy, dependency graph,
well-definedness and stratification."""

from __future__ import annotations

import enum
from collections import defaultdict, deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .schema import (
    Ref,
    Schema,
    SchemaError,
    Shape,
    ShapeWithExtends,
    references,
    sub_exprs,
    sub_exprs_with_parity,
    tcs,
)


class AnalysisError(SchemaError):
    pass


class DepKind(enum.Enum):
    EXTENDS = "dep-extends"
    DEP = "dep"
    SHAPE_NEG = "dep-shape-neg"
    EXTRA_NEG = "dep-extra-neg"

    @property
    def negative(self) -> bool:
        return self in (DepKind.SHAPE_NEG, DepKind.EXTRA_NEG)


# --- extension hierarchy -------------------------------------------------


@dataclass(frozen=True)
class ExtensionHierarchy:
    nodes: frozenset
    edges: frozenset  # (child, parent)

    def parents(self, x) -> list:
        return sorted(p for c, p in self.edges if c == x)

    def children(self, x) -> list:
        return sorted(c for c, p in self.edges if p == x)

    def find_cycle(self) -> Optional[list]:
        succ = defaultdict(list)
        for c, p in self.edges:
            succ[c].append(p)
        return _find_cycle(sorted(self.nodes), succ)


def build_hierarchy(s: Schema) -> ExtensionHierarchy:
    """Edges from each extendable label to the labels of its leading ``EXTENDS``."""
    edges = set()
    for x in s.extendable:
        for parent in s.parents(x):
            edges.add((x, parent))
    return ExtensionHierarchy(frozenset(s.extendable), frozenset(edges))


def _closure(h: ExtensionHierarchy, x, forward: bool) -> frozenset:
    if x not in h.nodes:
        raise AnalysisError(f"{x!r} is not an extendable label")
    cycle = h.find_cycle()
    if cycle:
        raise AnalysisError("extension hierarchy is cyclic: " + " -> ".join(cycle))
    step = h.parents if forward else h.children
    seen, todo = {x}, [x]
    while todo:
        for y in step(todo.pop()):
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return frozenset(seen)


def ancestors(h: ExtensionHierarchy, x) -> frozenset:
    """Reflexive-transitive ancestors of ``x``."""
    return _closure(h, x, forward=True)


def descendants(h: ExtensionHierarchy, x) -> frozenset:
    return _closure(h, x, forward=False)


def ancestors_of_set(h: ExtensionHierarchy, xs: Iterable) -> frozenset:
    out = frozenset()
    for x in xs:
        out |= ancestors(h, x)
    return out


# --- dependency graph ----------------------------------------------------


def neg_sub_expr(s) -> frozenset:
    """Sub-expressions of ``s`` under an odd number of negations."""
    return frozenset(sub for sub, negated in sub_exprs_with_parity(s) if negated)


@dataclass(frozen=True)
class DependencyGraph:
    nodes: frozenset
    edges: frozenset  # (source, target, DepKind)

    def has(self, source, target, kind: DepKind) -> bool:
        return (source, target, kind) in self.edges

    def successors(self) -> Mapping:
        succ = defaultdict(set)
        for a, b, _ in self.edges:
            succ[a].add(b)
        return succ

    def negative_edges(self) -> list:
        return sorted(((a, b, k) for a, b, k in self.edges if k.negative), key=lambda e: (e[0], e[1], e[2].value))


def _nested_reads(s: Schema, parents, seen) -> set:
    """Labels whose typing may be read while checking ancestors' parts of a
    nested ``EXTENDS parents``."""
    out = set()
    todo = [p for p in parents if p in s.extendable]
    while todo:
        x = todo.pop()
        if x in seen:
            continue
        seen.add(x)
        todo.extend(s.parents(x))
        out.update(tc.ref for tc in tcs(s.ext_te(x)))
        r = s.restr(x)
        if r is not None:
            out.update(references(r))
            for sub in sub_exprs(r):
                if isinstance(sub, ShapeWithExtends):
                    out.update(_nested_reads(s, sub.parents, seen))
    return out


def build_dependency_graph(s: Schema) -> DependencyGraph:
    edges = set()
    h = build_hierarchy(s)
    for child, parent in h.edges:
        edges.add((child, parent, DepKind.EXTENDS))
        edges.add((parent, child, DepKind.EXTENDS))
    for z, d in s.definitions.items():
        for ref in references(d):
            edges.add((z, ref, DepKind.DEP))
        leading = s.leading_extends(z) if z in s.extendable else None
        for sub, negated in sub_exprs_with_parity(d):
            if isinstance(sub, Shape):
                for tc in tcs(sub.expr):
                    if negated:
                        edges.add((z, tc.ref, DepKind.SHAPE_NEG))
                    if tc.predicate in sub.extra:
                        edges.add((z, tc.ref, DepKind.EXTRA_NEG))
            elif isinstance(sub, Ref) and negated:
                edges.add((z, sub.label, DepKind.SHAPE_NEG))
            elif isinstance(sub, ShapeWithExtends) and sub is not leading:
                for parent in sub.parents:
                    if parent != z:
                        edges.add((z, parent, DepKind.EXTENDS))
                        edges.add((parent, z, DepKind.EXTENDS))
                if negated:
                    for ref in _nested_reads(s, sub.parents, set()):
                        edges.add((z, ref, DepKind.DEP))
                        edges.add((z, ref, DepKind.SHAPE_NEG))
    return DependencyGraph(frozenset(s.labels), frozenset(edges))


# --- strongly connected components ---------------------------------------


def strongly_connected_components(nodes: Iterable, succ: Mapping) -> list:
    """Tarjan's algorithm, iterative.  Components come out in reverse
    topological order: every edge leaves a component towards one listed
    earlier (or itself)."""
    index, low, on_stack, stack, result = {}, {}, set(), [], []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(sorted(succ.get(root, ()))))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(succ.get(w, ())))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                result.append(sorted(comp))
    return result


def _find_cycle(nodes, succ) -> Optional[list]:
    for comp in strongly_connected_components(nodes, succ):
        members = set(comp)
        start = comp[0]
        if len(comp) > 1 or start in succ.get(start, ()):
            path = _path_within(start, start, succ, members, nonempty=True)
            return path
    return None


def _path_within(source, target, succ, members, nonempty=False) -> list:
    """Shortest path ``[source, ..., target]`` inside ``members`` (BFS).

    With ``nonempty`` the path has at least one edge, so ``source == target``
    yields a cycle.
    """
    if source == target and not nonempty:
        return [source]
    queue = deque([[source]])
    visited = set()
    while queue:
        path = queue.popleft()
        for w in sorted(succ.get(path[-1], ())):
            if w not in members:
                continue
            if w == target:
                return path + [w]
            if w not in visited:
                visited.add(w)
                queue.append(path + [w])
    raise AnalysisError(f"no path from {source!r} to {target!r}")


# --- well-definedness ----------------------------------------------------


@dataclass(frozen=True)
class WellDefinedness:
    verdict: str  # "ok" | "cyclic_hierarchy" | "negative_cycle"
    witness: tuple = ()  # labels, or (source, kind, target) steps for negative cycles
    message: str = ""

    @property
    def ok(self) -> bool:
        return self.verdict == "ok"

    def __bool__(self):
        return self.ok


def _extension_evaluation_graph(s: Schema) -> dict:
    """x -> y when evaluating def(x) visits the ancestors of y: leading
    parents plus parents of EXTENDS nested in the restriction."""
    succ = defaultdict(set)
    for x in s.extendable:
        succ[x].update(s.parents(x))
        r = s.restr(x)
        if r is not None:
            for sub in sub_exprs(r):
                if isinstance(sub, ShapeWithExtends):
                    succ[x].update(p for p in sub.parents if p in s.extendable)
    return succ


def check_well_defined(s: Schema) -> WellDefinedness:
    h = build_hierarchy(s)
    cycle = h.find_cycle()
    if cycle:
        return WellDefinedness("cyclic_hierarchy", tuple(cycle), "extension hierarchy has a cycle: " + " -> ".join(cycle))
    cycle = _find_cycle(sorted(s.extendable), _extension_evaluation_graph(s))
    if cycle:
        return WellDefinedness(
            "cyclic_hierarchy",
            tuple(cycle),
            "EXTENDS nested in a restriction leads back to the label: " + " -> ".join(cycle),
        )
    dg = build_dependency_graph(s)
    succ = dg.successors()
    comp_of = {}
    for i, comp in enumerate(strongly_connected_components(sorted(dg.nodes), succ)):
        for z in comp:
            comp_of[z] = i
    for a, b, kind in dg.negative_edges():
        if comp_of[a] == comp_of[b]:
            members = {z for z in dg.nodes if comp_of[z] == comp_of[a]}
            back = _path_within(b, a, succ, members) if a != b else [a]
            steps = [(a, kind.value, b)]
            for u, v in zip(back, back[1:]):
                kinds = sorted(k.value for x, y, k in dg.edges if x == u and y == v)
                steps.append((u, kinds[0] if DepKind.DEP.value not in kinds else DepKind.DEP.value, v))
            text = ", ".join(f"{k}({u}, {v})" for u, k, v in steps)
            return WellDefinedness("negative_cycle", tuple(steps), "cycle through a negative dependency: " + text)
    return WellDefinedness("ok")


# --- stratification ------------------------------------------------------


@dataclass(frozen=True)
class Stratification:
    assignment: Mapping = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "assignment", dict(self.assignment))

    @property
    def stratum_count(self) -> int:
        return max(self.assignment.values(), default=0)

    def __getitem__(self, label) -> int:
        return self.assignment[label]

    def labels_on(self, i: int) -> frozenset:
        return frozenset(z for z, k in self.assignment.items() if k == i)

    def labels_up_to(self, i: int) -> frozenset:
        return frozenset(z for z, k in self.assignment.items() if k <= i)

    def violations(self, dg: DependencyGraph) -> list:
        """Edges breaking the stratification conditions, plus range problems."""
        out = []
        k = self.stratum_count
        if set(self.assignment) != set(dg.nodes):
            out.append("assignment does not cover exactly the schema labels")
        if dg.nodes and set(self.assignment.values()) != set(range(1, k + 1)):
            out.append(f"strata {sorted(set(self.assignment.values()))} are not the range 1..{k}")
        for a, b, kind in sorted(dg.edges, key=lambda e: (e[0], e[1], e[2].value)):
            sa, sb = self.assignment.get(a), self.assignment.get(b)
            if sa is None or sb is None:
                continue
            if sa < sb or (kind.negative and sa == sb):
                out.append(f"{kind.value}({a}, {b}) with strata {sa}, {sb}")
        return out


def _condensation(dg: DependencyGraph):
    succ = dg.successors()
    comps = strongly_connected_components(sorted(dg.nodes), succ)
    comp_of = {z: i for i, comp in enumerate(comps) for z in comp}
    comp_edges = defaultdict(dict)  # i -> {j: negative?}
    for a, b, kind in dg.edges:
        i, j = comp_of[a], comp_of[b]
        if i != j:
            comp_edges[i][j] = comp_edges[i].get(j, False) or kind.negative
    return comps, comp_edges


def stratify(s: Schema, strategy: str = "compact") -> Stratification:
    """Stratify a well-defined schema.

    ``compact`` puts each component on the lowest stratum its dependencies
    allow; ``finest`` gives every strongly connected component its own
    stratum (in topological order).
    """
    verdict = check_well_defined(s)
    if not verdict:
        raise AnalysisError(f"schema is not well-defined: {verdict.message}")
    dg = build_dependency_graph(s)
    comps, comp_edges = _condensation(dg)
    level = {}
    if strategy == "compact":
        for i in range(len(comps)):  # reverse topological: targets come first
            level[i] = max([1] + [level[j] + (1 if neg else 0) for j, neg in comp_edges[i].items()])
    elif strategy == "finest":
        for i in range(len(comps)):
            level[i] = i + 1
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return Stratification({z: level[i] for i, comp in enumerate(comps) for z in comp})


def restrict_schema(s: Schema, sigma: Stratification, i: int) -> Schema:
    """The schema restricted to labels on strata at most ``i``."""
    if not 1 <= i <= sigma.stratum_count:
        raise AnalysisError(f"stratum {i} outside 1..{sigma.stratum_count}")
    keep = sigma.labels_up_to(i)
    return Schema(
        s.simple & keep,
        s.extendable & keep,
        {z: d for z, d in s.definitions.items() if z in keep},
        s.abstract & keep,
    )


# --- DOT output ----------------------------------------------------------


def _q(name) -> str:
    return '"' + str(name).replace('"', '\\"') + '"'


def hierarchy_dot(h: ExtensionHierarchy) -> str:
    lines = ["digraph hierarchy {", "  rankdir=BT;"]
    for x in sorted(h.nodes):
        lines.append(f"  {_q(x)};")
    for c, p in sorted(h.edges):
        lines.append(f"  {_q(c)} -> {_q(p)};")
    lines.append("}")
    return "\n".join(lines) + "\n"


_EDGE_STYLE = {
    DepKind.EXTENDS: 'style=dotted, label="extends"',
    DepKind.DEP: 'label="dep"',
    DepKind.SHAPE_NEG: 'color=red, label="shape-neg"',
    DepKind.EXTRA_NEG: 'color=red, style=dashed, label="extra-neg"',
}


def dependency_dot(dg: DependencyGraph, sigma: Optional[Stratification] = None) -> str:
    lines = ["digraph dependencies {"]
    for z in sorted(dg.nodes):
        attrs = f' [label="{z} ({sigma[z]})"]' if sigma is not None else ""
        lines.append(f"  {_q(z)}{attrs};")
    for a, b, k in sorted(dg.edges, key=lambda e: (e[0], e[1], e[2].value)):
        lines.append(f"  {_q(a)} -> {_q(b)} [{_EDGE_STYLE[k]}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
