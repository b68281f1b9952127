"""Validation of RDF graphs against shape expression schemas with inheritance."""

from .analysis import (
    AnalysisError,
    DepKind,
    DependencyGraph,
    ExtensionHierarchy,
    Stratification,
    WellDefinedness,
    ancestors,
    build_dependency_graph,
    build_hierarchy,
    check_well_defined,
    descendants,
    restrict_schema,
    stratify,
)
from .engine import (
    ConformanceMode,
    OracleBoundError,
    ValidationError,
    ValidationReport,
    brute_force_maximal_typing,
    is_correct_typing,
    maximal_typing,
    validate,
)
from .rdf import Blank, Graph, GraphSyntaxError, Iri, Literal, Triple, neighbourhood, parse_graph, parse_node
from .schema import Schema, SchemaError, check_schema_form
from .semantics import EvaluationCycleError, Evaluator, Typing, sat_node, sat_set, sat_te, split_matching
from .syntax import ALL, SchemaSyntaxError, ShapeMapRequest, parse_schema, parse_shape_map, serialize_schema

__all__ = [name for name in dir() if not name.startswith("_")]
