"""Taint queries, rulesets, flow-summary validation and reporting."""

from .ablate import ABLATION_HEADER, AblationRow, ablate, render_ablation
from .catalog import barrier_nodes, base_sinks, base_sources
from .groundtruth import CATEGORIES, DETECTING, Annotation, AnnotationUnbindable, best_match, load_annotations, match_ground_truth
from .query import MAX_FLOWS_PER_SINK, Alert, QueryResult, ThreadFlow, UnboundSpecs, build_query_graph, endpoints, run_query
from .rulesets import RULESET_ORDER, RULESETS, Ruleset, get_ruleset
from .sarif import dumps_sarif, emit_sarif
from .summaries import SummaryOutcome, candidate_edges, ignore_edges, summary_task, validate_summaries

__all__ = [
    "ABLATION_HEADER", "AblationRow", "ablate", "render_ablation", "barrier_nodes", "base_sinks", "base_sources",
    "CATEGORIES", "DETECTING", "Annotation", "AnnotationUnbindable", "best_match", "load_annotations",
    "match_ground_truth", "MAX_FLOWS_PER_SINK", "Alert", "QueryResult", "ThreadFlow", "UnboundSpecs",
    "build_query_graph", "endpoints", "run_query", "RULESET_ORDER", "RULESETS", "Ruleset", "get_ruleset",
    "dumps_sarif", "emit_sarif", "SummaryOutcome", "candidate_edges", "ignore_edges", "summary_task",
    "validate_summaries",
]
