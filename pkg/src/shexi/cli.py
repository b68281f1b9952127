"""Command-line entry point: ``shexi check | stratify | validate``."""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

from .analysis import (
    build_dependency_graph,
    build_hierarchy,
    check_well_defined,
    dependency_dot,
    hierarchy_dot,
    strongly_connected_components,
    stratify,
)
from .engine import ConformanceMode, OracleBoundError, brute_force_maximal_typing, maximal_typing, validate
from .rdf import GraphSyntaxError, parse_graph
from .schema import SchemaError, check_schema_form
from .syntax import SchemaSyntaxError, parse_schema, parse_shape_map

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_ILL_DEFINED = 2
EXIT_NON_CONFORMANT = 3
EXIT_ORACLE_MISMATCH = 4


@dataclass(frozen=True)
class RunConfig:
    command: str
    schema: str
    data: Optional[str] = None
    shape_map: Optional[str] = None
    mode: ConformanceMode = ConformanceMode.DESCENDANT_CLOSURE
    dump_typing: bool = False
    oracle_check: bool = False
    oracle_bound: int = 20
    output: Optional[str] = None

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        return cls(
            command=ns.command,
            schema=ns.schema,
            data=getattr(ns, "data", None),
            shape_map=getattr(ns, "map", None),
            mode=ConformanceMode(getattr(ns, "mode", ConformanceMode.DESCENDANT_CLOSURE.value)),
            dump_typing=getattr(ns, "dump_typing", False),
            oracle_check=getattr(ns, "oracle_check", False),
            oracle_bound=getattr(ns, "oracle_bound", 20),
            output=getattr(ns, "output", None),
        )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shexi", description="Shape expressions with inheritance: analysis and validation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="report schema diagnostics and well-definedness")
    p.add_argument("schema")

    p = sub.add_parser("stratify", help="print strata, components and DOT graphs")
    p.add_argument("schema")

    p = sub.add_parser("validate", help="validate a shape map against a graph")
    p.add_argument("--schema", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--map", required=True, help="shape map file, or inline text such as 'f1 @ Circle'")
    p.add_argument("--mode", choices=[m.value for m in ConformanceMode], default=ConformanceMode.DESCENDANT_CLOSURE.value)
    p.add_argument("--dump-typing", action="store_true", help="include the full maximal typing in the report")
    p.add_argument("--oracle-check", action="store_true", help="cross-check with the brute-force oracle when small enough")
    p.add_argument("--oracle-bound", type=int, default=20)
    p.add_argument("--output", help="write the JSON report here instead of standard output")
    return parser


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_schema(path: str):
    return parse_schema(_read(path))


def _cmd_check(cfg: RunConfig) -> int:
    schema = _load_schema(cfg.schema)
    for d in check_schema_form(schema):
        print(f"diagnostic: {d}")
    verdict = check_well_defined(schema)
    print(f"verdict: {verdict.verdict}")
    if verdict.ok:
        return EXIT_OK
    print(verdict.message)
    for step in verdict.witness:
        print("  " + (f"{step[1]}({step[0]}, {step[2]})" if isinstance(step, tuple) else str(step)))
    return EXIT_ILL_DEFINED


def _cmd_stratify(cfg: RunConfig) -> int:
    schema = _load_schema(cfg.schema)
    verdict = check_well_defined(schema)
    if not verdict:
        _err(f"schema is not well-defined: {verdict.message}")
        return EXIT_ILL_DEFINED
    sigma = stratify(schema)
    dg = build_dependency_graph(schema)
    h = build_hierarchy(schema)
    print(f"strata: {sigma.stratum_count}")
    for i in range(1, sigma.stratum_count + 1):
        print(f"  {i}: {', '.join(sorted(sigma.labels_on(i)))}")
    print("components:")
    for comp in strongly_connected_components(sorted(dg.nodes), dg.successors()):
        print("  {" + ", ".join(sorted(comp)) + "}")
    print("hierarchy edges:")
    for child, parent in sorted(h.edges):
        print(f"  {child} -> {parent}")
    print()
    print(hierarchy_dot(h), end="")
    print()
    print(dependency_dot(dg, sigma), end="")
    return EXIT_OK


def _cmd_validate(cfg: RunConfig) -> int:
    schema = _load_schema(cfg.schema)
    verdict = check_well_defined(schema)
    if not verdict:
        _err(f"schema is not well-defined: {verdict.message}")
        return EXIT_ILL_DEFINED
    graph = parse_graph(_read(cfg.data))
    map_text = _read(cfg.shape_map) if os.path.isfile(cfg.shape_map) else cfg.shape_map
    requests = parse_shape_map(map_text, schema)
    report = validate(graph, schema, requests, cfg.mode, include_typing=cfg.dump_typing)
    code = EXIT_OK if report.all_conformant else EXIT_NON_CONFORMANT

    doc = report.to_dict()
    del doc["elapsed_ms"]  # keep output byte-identical across runs
    if cfg.oracle_check:
        try:
            oracle = brute_force_maximal_typing(graph, schema, cfg.mode, bound=cfg.oracle_bound)
        except OracleBoundError as exc:
            doc["oracle"] = {"status": "skipped", "reason": str(exc)}
        else:
            agrees = oracle == maximal_typing(graph, schema, cfg.mode)
            doc["oracle"] = {"status": "agree" if agrees else "disagree"}
            if not agrees:
                _err("maximal typing disagrees with the brute-force oracle")
                code = EXIT_ORACLE_MISMATCH
    text = json.dumps(doc, indent=2) + "\n"
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    _err(f"elapsed: {report.elapsed_ms:.1f} ms")
    return code


_COMMANDS = {"check": _cmd_check, "stratify": _cmd_stratify, "validate": _cmd_validate}


def run(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = RunConfig.from_args(ns)
    try:
        return _COMMANDS[cfg.command](cfg)
    except (SchemaSyntaxError, GraphSyntaxError, OSError) as exc:
        _err(f"error: {exc}")
        return EXIT_PARSE
    except SchemaError as exc:
        _err(f"error: {exc}")
        return EXIT_PARSE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
