"""Taint-flow graph: edges, precision-0 resolution, reachability."""

from .build import ALL_RULES, DanglingEdge, GraphOptions, build_flow_graph
from .catalog import SummaryEntry, catalog_rows
from .graph import DEFAULT_ACCESS_PATH_LIMIT, EXTENDED_LABELS, LABELS, FlowEdge, FlowGraph
from .resolve import UnresolvedCallSet, resolve_callees_p0, summary_entry, unresolved_calls


def reachable(graph: FlowGraph, seeds, direction: str = "forward", barriers=()) -> set[int]:
    return graph.reachable(seeds, direction, barriers)


__all__ = [
    "ALL_RULES",
    "DEFAULT_ACCESS_PATH_LIMIT",
    "EXTENDED_LABELS",
    "LABELS",
    "DanglingEdge",
    "FlowEdge",
    "FlowGraph",
    "GraphOptions",
    "SummaryEntry",
    "UnresolvedCallSet",
    "build_flow_graph",
    "catalog_rows",
    "reachable",
    "resolve_callees_p0",
    "summary_entry",
    "unresolved_calls",
]
