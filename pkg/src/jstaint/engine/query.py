"""Taint query execution and alert construction."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from ..cwe import normalize_cwe
from ..flowgraph import DEFAULT_ACCESS_PATH_LIMIT, FlowGraph, GraphOptions, build_flow_graph
from ..index import ProgramIndex
from ..specs import ValidatedSpecs
from .catalog import barrier_nodes, base_sinks, base_sources
from .rulesets import Ruleset, get_ruleset

MAX_FLOWS_PER_SINK = 8


class UnboundSpecs(ValueError):
    """A ruleset needs validated specifications that were not supplied."""


@dataclass
class ThreadFlow:
    nodes: list[int]
    summaries: tuple[int, ...] = ()  # edge fact ids of candidate summaries used
    status: str = "active"


@dataclass
class Alert:
    cwe: str
    sink: int
    flows: list[ThreadFlow]
    status: str = "active"

    @property
    def summaries_used(self) -> tuple[int, ...]:
        return tuple(sorted({e for f in self.flows for e in f.summaries}))

    @property
    def active_flows(self) -> list[ThreadFlow]:
        return [f for f in self.flows if f.status == "active"]

    def to_record(self, index: ProgramIndex) -> dict:
        def loc(n: int) -> dict:
            node = index.node(n)
            return {"file": node.file, "span": list(node.span), "snippet": node.label, "kind": node.kind}

        return {
            "cwe": self.cwe,
            "status": self.status,
            "sink": loc(self.sink),
            "summaries_used": list(self.summaries_used),
            "thread_flows": [
                {"status": f.status, "summaries": list(f.summaries), "locations": [loc(n) for n in f.nodes]}
                for f in self.flows
            ],
        }


@dataclass
class QueryResult:
    ruleset: Ruleset
    cwe: str
    alerts: list[Alert]
    graph: FlowGraph
    sources: set[int] = field(default_factory=set)
    sinks: set[int] = field(default_factory=set)
    barriers: set[int] = field(default_factory=set)

    @property
    def active(self) -> list[Alert]:
        return [a for a in self.alerts if a.status == "active"]


def endpoints(index: ProgramIndex, cwe: str, ruleset: Ruleset, specs: Optional[ValidatedSpecs]) -> tuple[set[int], set[int]]:
    sources: set[int] = set()
    sinks: set[int] = set()
    if ruleset.uses_base:
        sources |= base_sources(index)
        sinks |= base_sinks(index, cwe)
    if ruleset.uses_custom:
        if specs is None:
            raise UnboundSpecs(f"{ruleset.name} uses custom endpoints but no validated specs were given")
        sources |= specs.S_bound
        sinks |= specs.K_bound
    return sources, sinks


def build_query_graph(
    index: ProgramIndex,
    ruleset: Ruleset,
    specs: Optional[ValidatedSpecs],
    access_path_limit: int = DEFAULT_ACCESS_PATH_LIMIT,
    ignored_summaries: Iterable[int] = (),
) -> FlowGraph:
    if not ruleset.enhanced:
        return build_flow_graph(index, GraphOptions(access_path_limit=access_path_limit))
    if specs is None:
        raise UnboundSpecs(f"{ruleset.name} needs validated call edges")
    return build_flow_graph(
        index,
        GraphOptions(
            asserted_edges=specs.active_first_pairs(),
            summaries=specs.active_third_calls() - set(ignored_summaries),
            access_path_limit=access_path_limit,
        ),
    )


def _summary_edges(specs: Optional[ValidatedSpecs]) -> dict[int, int]:
    """invocation id -> edge fact id, for active third-party edges."""
    if specs is None:
        return {}
    out: dict[int, int] = {}
    for fid in sorted(specs.third):
        if specs.edge_facts[fid].status == "active":
            out.setdefault(specs.third[fid], fid)
    return out


def run_query(
    index: ProgramIndex,
    cwe: str | int,
    ruleset: Ruleset | str,
    specs: Optional[ValidatedSpecs] = None,
    access_path_limit: int = DEFAULT_ACCESS_PATH_LIMIT,
) -> QueryResult:
    cwe = normalize_cwe(cwe)
    if isinstance(ruleset, str):
        ruleset = get_ruleset(ruleset)
    sources, sinks = endpoints(index, cwe, ruleset, specs)
    graph = build_query_graph(index, ruleset, specs, access_path_limit)
    barriers = barrier_nodes(index, cwe) if ruleset.barriers else set()
    sources -= barriers
    by_invocation = _summary_edges(specs) if ruleset.enhanced else {}

    flows_by_sink: dict[int, list[list[int]]] = {}
    for src in sorted(sources):
        states = graph.reachable_states([src], "forward", barriers)
        for k in sorted(sinks):
            if (k, 0) in states and k not in barriers:
                path = graph.shortest_path(src, k, barriers)
                if path is not None:
                    flows_by_sink.setdefault(k, []).append(path)

    alerts = []
    for k in sorted(flows_by_sink):
        unique = sorted({tuple(p) for p in flows_by_sink[k]}, key=lambda p: (len(p), p))[:MAX_FLOWS_PER_SINK]
        flows = []
        for p in unique:
            used = sorted(
                {
                    by_invocation[b]
                    for a, b in zip(p, p[1:])
                    if b in by_invocation and graph.step_label(a, b) == "candidate-summary"
                }
            )
            flows.append(ThreadFlow(list(p), tuple(used)))
        alerts.append(Alert(cwe, k, flows))
    return QueryResult(ruleset, cwe, alerts, graph, sources, sinks, barriers)
