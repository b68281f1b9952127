"""Correct typings, the maximal typing and validation reports."""

from __future__ import annotations

import enum
import itertools
import json
import time
from dataclasses import dataclass, field
from typing import Optional

from .analysis import Stratification, check_well_defined, restrict_schema, stratify
from .rdf import Graph, neighbourhood
from .schema import Schema, SchemaError, ShapeWithExtends, references, sub_exprs, tcs
from .semantics import Evaluator, Typing
from .syntax import expand_requests


class ConformanceMode(enum.Enum):
    """How a pair ``(n, x)`` with extendable ``x`` is justified.

    ``DESCENDANT_CLOSURE``: some non-abstract descendant of ``x`` (``x``
    itself included) is satisfied by ``n``.  ``LITERAL_DEF4``: only
    abstract labels may be justified through descendants; other labels
    must be satisfied directly.
    """

    DESCENDANT_CLOSURE = "descendant-closure"
    LITERAL_DEF4 = "literal-def4"


class OracleBoundError(ValueError):
    pass


class ValidationError(SchemaError):
    pass


def _descendants(schema: Schema, z) -> frozenset:
    children = {}
    for x in schema.extendable:
        for p in schema.parents(x):
            children.setdefault(p, set()).add(x)
    seen, todo = {z}, [z]
    while todo:
        for c in children.get(todo.pop(), ()):
            if c not in seen:
                seen.add(c)
                todo.append(c)
    return frozenset(seen)


class _Checker:
    """Evaluates the correctness condition of single pairs for one schema."""

    def __init__(self, graph: Graph, schema: Schema, mode: ConformanceMode):
        self.schema = schema
        self.mode = ConformanceMode(mode)
        self.evaluator = Evaluator(graph, schema)
        self.justifiers = {}
        for z in schema.labels:
            if z in schema.simple:
                self.justifiers[z] = (z,)
            elif self.mode is ConformanceMode.LITERAL_DEF4 and z not in schema.abstract:
                self.justifiers[z] = (z,)
            else:
                self.justifiers[z] = tuple(sorted(_descendants(schema, z) - schema.abstract))

    def conforms(self, n, z, typing: Typing, cache: Optional[dict] = None) -> bool:
        """Does ``(n, z)`` meet its correctness condition under ``typing``?"""
        for x in self.justifiers[z]:
            key = (n, x)
            if cache is not None and key in cache:
                ok = cache[key]
            else:
                ok = self.evaluator.sat_node(n, typing, self.schema.definitions[x])
                if cache is not None:
                    cache[key] = ok
            if ok:
                return True
        return False

    def conforms_tracked(self, n, z, pairs: frozenset, state: dict) -> bool:
        """Like ``conforms`` for a typing that only shrinks between calls.

        ``state`` keeps, per node, a recording typing and the results
        computed with it.  They stay valid while ``pairs`` answers every
        membership query recorded so far the same way; the node's arena only
        ever reads through that typing.
        """
        entry = state.get(n)
        if entry is not None:
            recording, results = entry
            if recording.pairs is not pairs:
                if all((q in pairs) == b for q, b in recording.reads.items()):
                    recording.rebase(pairs)
                else:
                    entry = None
        if entry is None:
            recording, results = _RecordingTyping(pairs), {}
            state[n] = (recording, results)
        for x in self.justifiers[z]:
            ok = results.get(x)
            if ok is None:
                ok = results[x] = self.evaluator.sat_node(n, recording, self.schema.definitions[x])
            if ok:
                return True
        return False


def _check_labels(schema: Schema, typing) -> None:
    unknown = sorted({z for _, z in typing} - schema.labels)
    if unknown:
        raise ValidationError(f"typing uses undeclared labels {unknown}")


def is_correct_typing(g: Graph, s: Schema, typing, mode=ConformanceMode.DESCENDANT_CLOSURE) -> bool:
    typing = typing if isinstance(typing, Typing) else Typing(typing)
    _check_labels(s, typing)
    checker = _Checker(g, s, mode)
    cache = {}
    return all(checker.conforms(n, z, typing, cache) for n, z in sorted(typing, key=str))


def _require_well_defined(s: Schema) -> None:
    verdict = check_well_defined(s)
    if not verdict:
        raise ValidationError(f"schema is not well-defined: {verdict.message}")


def maximal_typing(
    g: Graph,
    s: Schema,
    mode=ConformanceMode.DESCENDANT_CLOSURE,
    stratification: Optional[Stratification] = None,
    trace: Optional[list] = None,
) -> Typing:
    """Refinement: per stratum, start from every pair and delete the pairs
    that fail their condition until nothing changes.

    All pairs of a round are judged against the typing the round started
    with; an evaluation is reused in later rounds while none of the pairs
    it read has been deleted.  If ``trace`` is a list, ``(stratum, round, size)`` tuples are
    appended to it, one per round.
    """
    _require_well_defined(s)
    sigma = stratification if stratification is not None else stratify(s)
    checker = _Checker(g, s, mode)
    nodes = sorted(g.nodes(), key=str)
    current = set()
    for i in range(1, sigma.stratum_count + 1):
        layer = sorted(sigma.labels_on(i))
        candidates = {(n, z) for n in nodes for z in layer}
        current |= candidates
        state = {}
        for round_no in itertools.count(1):
            snapshot = frozenset(current)
            if trace is not None:
                trace.append((i, round_no, len(snapshot)))
            rejected = {p for p in candidates if not checker.conforms_tracked(p[0], p[1], snapshot, state)}
            if not rejected:
                break
            current -= rejected
            candidates -= rejected
    return Typing(current)


class _RecordingTyping(Typing):
    __slots__ = ("reads",)

    def __init__(self, pairs):
        super().__init__(pairs)
        self.reads = {}

    def rebase(self, pairs: frozenset) -> None:
        self.pairs = pairs
        self._by_node = self._by_label = None

    def __contains__(self, pair) -> bool:
        found = pair in self.pairs
        self.reads[pair] = found
        return found


class _ReadSetCache:
    """Memoizes ``conforms`` by the answers it read from the typing.

    A result depends on the typing only through the membership queries the
    evaluation made, so an earlier evaluation can be reused whenever the new
    typing answers all of its recorded queries the same way.
    """

    def __init__(self, checker: _Checker):
        self.checker = checker
        self.entries = {}

    def conforms(self, pair, pairs: frozenset) -> bool:
        entries = self.entries.setdefault(pair, [])
        for reads, result in entries:
            if all((q in pairs) == b for q, b in reads):
                return result
        recording = _RecordingTyping(pairs)
        result = self.checker.conforms(pair[0], pair[1], recording)
        entries.append((tuple(recording.reads.items()), result))
        return result

    def constant_false(self, pair) -> bool:
        self.conforms(pair, frozenset())
        return any(not reads and not result for reads, result in self.entries[pair])


def _labels_read(schema: Schema, d, seen=None) -> set:
    """Labels whose membership evaluating ``d`` may query, including the
    parts of ancestors visited by ``EXTENDS``."""
    seen = set() if seen is None else seen
    out = set(references(d))
    for sub in sub_exprs(d):
        if isinstance(sub, ShapeWithExtends):
            todo = list(sub.parents)
            while todo:
                x = todo.pop()
                if x in seen or x not in schema.extendable:
                    continue
                seen.add(x)
                todo.extend(schema.parents(x))
                out |= {tc.ref for tc in tcs(schema.ext_te(x))}
                r = schema.restr(x)
                if r is not None:
                    out |= _labels_read(schema, r, seen)
    return out


def _components(candidates: list, checker: _Checker, graph: Graph) -> list:
    """Group candidate pairs so that no pair's check can read a pair of
    another group."""
    schema = checker.schema
    reads = {z: set().union(*(_labels_read(schema, schema.definitions[x]) for x in checker.justifiers[z])) for z in schema.labels}
    index = {p: i for i, p in enumerate(candidates)}
    parent = list(range(len(candidates)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, (n, z) in enumerate(candidates):
        around = {n} | {t.object for t in neighbourhood(graph, n)}
        for m in around:
            for z2 in reads[z]:
                j = index.get((m, z2))
                if j is not None:
                    parent[find(i)] = find(j)
    groups = {}
    for i, p in enumerate(candidates):
        groups.setdefault(find(i), []).append(p)
    return list(groups.values())


def brute_force_maximal_typing(
    g: Graph,
    s: Schema,
    mode=ConformanceMode.DESCENDANT_CLOSURE,
    bound: int = 20,
    stratification: Optional[Stratification] = None,
) -> Typing:
    """Union, stratum by stratum, of all correct typings that extend the
    previous stratum's result, found by enumerating candidate typings.

    Candidates are split into groups that cannot read each other's pairs; a
    typing is correct exactly when its part in every group is, so each
    group is enumerated on its own.
    """
    _require_well_defined(s)
    nodes = sorted(g.nodes(), key=str)
    if len(nodes) * len(s.labels) > bound:
        raise OracleBoundError(f"{len(nodes)} nodes x {len(s.labels)} labels exceeds the oracle bound {bound}")
    sigma = stratification if stratification is not None else stratify(s)
    previous = frozenset()
    for i in range(1, sigma.stratum_count + 1):
        sub = restrict_schema(s, sigma, i)
        checker = _Checker(g, sub, mode)
        cache = _ReadSetCache(checker)
        if not all(cache.conforms(p, previous) for p in previous):
            return Typing()
        candidates = [(n, z) for n in nodes for z in sorted(sigma.labels_on(i))]
        # A pair false under every typing belongs to no correct typing.
        candidates = [p for p in candidates if not cache.constant_false(p)]
        union = set(previous)
        for group in _components(candidates, checker, g):
            for r in range(1, len(group) + 1):
                for chosen in itertools.combinations(group, r):
                    pairs = previous | frozenset(chosen)
                    if all(cache.conforms(p, pairs) for p in chosen):
                        union |= pairs
        previous = frozenset(union)
    return Typing(previous)


def enumerate_correct_typings(g: Graph, s: Schema, mode=ConformanceMode.DESCENDANT_CLOSURE, base=frozenset(), labels=None):
    """Every correct typing ``base | T`` with ``T`` ranging over pairs of
    ``labels`` (all schema labels by default).  Exponential."""
    checker = _Checker(g, s, mode)
    cache = _ReadSetCache(checker)
    nodes = sorted(g.nodes(), key=str)
    labels = sorted(s.labels if labels is None else labels)
    candidates = [(n, z) for n in nodes for z in labels if (n, z) not in base]
    candidates = [p for p in candidates if not cache.constant_false(p)]
    base = frozenset(base)
    for r in range(len(candidates) + 1):
        for chosen in itertools.combinations(candidates, r):
            pairs = base | frozenset(chosen)
            if all(cache.conforms(p, pairs) for p in pairs):
                yield Typing(pairs)


# --- validation ----------------------------------------------------------


@dataclass
class Verdict:
    node: object
    label: str
    conformant: bool

    def to_dict(self) -> dict:
        return {"node": str(self.node), "label": self.label, "conformant": self.conformant}


@dataclass
class ValidationReport:
    mode: ConformanceMode
    verdicts: list = field(default_factory=list)
    strata: dict = field(default_factory=dict)
    diagnostics: list = field(default_factory=list)
    typing: Optional[Typing] = None
    elapsed_ms: float = 0.0

    @property
    def all_conformant(self) -> bool:
        return all(v.conformant for v in self.verdicts)

    def to_dict(self) -> dict:
        out = {
            "mode": self.mode.value,
            "strata": dict(sorted(self.strata.items())),
            "verdicts": [v.to_dict() for v in self.verdicts],
            "diagnostics": list(self.diagnostics),
            "elapsed_ms": round(self.elapsed_ms, 3),
        }
        if self.typing is not None:
            out["typing"] = sorted(([str(n), z] for n, z in self.typing), key=lambda p: (p[0], p[1]))
        return out

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def validate(g: Graph, s: Schema, requests, mode=ConformanceMode.DESCENDANT_CLOSURE, include_typing: bool = False) -> ValidationReport:
    """Answer every request by membership in the maximal typing."""
    start = time.perf_counter()
    mode = ConformanceMode(mode)
    verdict = check_well_defined(s)
    if not verdict:
        raise ValidationError(f"schema is not well-defined: {verdict.message}")
    requests = expand_requests(requests, s)
    unknown = sorted({r.label for r in requests} - s.labels)
    if unknown:
        raise ValidationError(f"requests use undeclared labels {unknown}")
    sigma = stratify(s)
    typing = maximal_typing(g, s, mode, sigma)
    verdicts = [Verdict(r.node, r.label, (r.node, r.label) in typing) for r in requests]
    return ValidationReport(
        mode=mode,
        verdicts=verdicts,
        strata=dict(sigma.assignment),
        diagnostics=[],
        typing=typing if include_typing else None,
        elapsed_ms=(time.perf_counter() - start) * 1000,
    )
