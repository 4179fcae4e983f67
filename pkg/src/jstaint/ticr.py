"""Taint-informed callee resolution.

Only unresolved calls that taint can reach from a source, or that can reach
a sink, are sent to the call-graph oracle.  Each repaired edge can expose
further calls, so selection and repair repeat until nothing new appears.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .flowgraph import DEFAULT_ACCESS_PATH_LIMIT, FlowGraph, GraphOptions, build_flow_graph, unresolved_calls
from .index import ProgramIndex
from .oracle import Oracle, OracleFailure, ResolutionTask
from .specs import SENTINEL_SPAN, CallEdgeFact, SpanLocation, ValidatedSpecs

log = logging.getLogger(__name__)

DEFAULT_MAX_ITERATIONS = 5
DIRECTIONS = frozenset({"forward", "backward"})
AUTO_THIRD_CONFIDENCE = 5


@dataclass(frozen=True)
class CandidateSets:
    src_to_brk: frozenset[int]
    brk_to_snk: frozenset[int]

    @property
    def union(self) -> frozenset[int]:
        return self.src_to_brk | self.brk_to_snk


@dataclass
class TicrState:
    iteration: int = 0
    resolved_edges: list[CallEdgeFact] = field(default_factory=list)
    ignored: dict[int, str] = field(default_factory=dict)  # invocation -> reason
    candidates_history: list[list[int]] = field(default_factory=list)
    log: list[dict] = field(default_factory=list)
    oracle_tasks: int = 0
    auto_third: int = 0
    asserted: set[tuple[int, int]] = field(default_factory=set)
    summaries: set[int] = field(default_factory=set)

    @property
    def processed(self) -> set[int]:
        return {inv for batch in self.candidates_history for inv in batch}


def select_candidates(
    M: Iterable[int],
    S_bound: Iterable[int],
    K_bound: Iterable[int],
    graph: FlowGraph,
    directions: Iterable[str] = DIRECTIONS,
) -> CandidateSets:
    directions = frozenset(directions)
    if directions - DIRECTIONS:
        raise ValueError(f"unknown directions {sorted(directions - DIRECTIONS)}")
    M = frozenset(M)
    fwd = graph.reachable(S_bound, "forward") if "forward" in directions else set()
    bwd = graph.reachable(K_bound, "backward") if "backward" in directions else set()
    return CandidateSets(frozenset(M & fwd), frozenset(M & bwd))


def _order(index: ProgramIndex, invs: Iterable[int]) -> list[int]:
    return sorted(invs, key=lambda i: (index.node(i).file, index.node(i).span, i))


def resolution_task(index: ProgramIndex, inv: int) -> ResolutionTask:
    node = index.node(inv)
    entry = index.invocation_for_node(inv)
    sl, sc, el, ec = node.span
    return ResolutionTask(
        f"{node.file}:{sl}:{sc}-{el}:{ec}",
        inv,
        SpanLocation.of(node.file, node.span),
        node.snippet,
        entry.callee_name if entry is not None else None,
    )


class _Recorder:
    """Turns oracle verdicts into edge facts with fresh ids."""

    def __init__(self, index: ProgramIndex, state: TicrState, first_id: int) -> None:
        self.index = index
        self.state = state
        self.next_id = first_id

    def _fact(self, inv: int, target: SpanLocation, kind: str, confidence: int) -> CallEdgeFact:
        node = self.index.node(inv)
        fact = CallEdgeFact(self.next_id, SpanLocation.of(node.file, node.span), target, kind, confidence)
        self.next_id += 1
        self.state.resolved_edges.append(fact)
        return fact

    def third(self, inv: int, confidence: int) -> None:
        self._fact(inv, SENTINEL_SPAN, "third", confidence)
        self.state.summaries.add(inv)

    def resolve(self, oracle: Oracle, inv: int, counts: dict) -> None:
        self.state.oracle_tasks += 1
        try:
            result = oracle.run_callgraph(self.index, resolution_task(self.index, inv))
        except OracleFailure as exc:
            self.state.ignored[inv] = f"oracle-failure: {exc}"
            counts["ignored"] += 1
            return
        if result.verdict == "first":
            for cand in sorted(result.fp_candidates):
                fn = self.index.functions[cand.function_index]
                self._fact(inv, SpanLocation.of(fn.file, fn.span), "first", cand.confidence)
                self.state.asserted.add((inv, fn.node))
            counts["first"] += 1
        elif result.verdict == "third":
            self.third(inv, result.confidence)
            counts["third"] += 1
        else:
            self.state.ignored[inv] = result.reason or "unresolvable"
            counts["ignored"] += 1


def _next_id(specs: Optional[ValidatedSpecs]) -> int:
    if specs is None or not specs.edge_facts:
        return 1
    return max(specs.edge_facts) + 1


def run_ticr(
    index: ProgramIndex,
    specs: ValidatedSpecs,
    oracle: Oracle,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    directions: Iterable[str] = DIRECTIONS,
    access_path_limit: int = DEFAULT_ACCESS_PATH_LIMIT,
) -> TicrState:
    state = TicrState()
    state.asserted = set(specs.active_first_pairs())
    state.summaries = set(specs.active_third_calls())
    S, K = specs.S_bound, specs.K_bound
    if not S and not K:
        return state
    M = unresolved_calls(index).filtered
    # calls that already carry an edge from earlier specs are never re-queried
    known = {inv for inv, _ in state.asserted} | state.summaries
    recorder = _Recorder(index, state, _next_id(specs))
    while state.iteration < max_iterations:
        resolved = {inv for inv, _ in state.asserted} | state.summaries
        graph = build_flow_graph(
            index,
            GraphOptions(
                extended=True,
                asserted_edges=state.asserted,
                summaries=state.summaries,
                unresolved=[i for i in M if i not in resolved],
                access_path_limit=access_path_limit,
            ),
        )
        sel = select_candidates(M, S, K, graph, directions)
        fresh = _order(index, sel.union - state.processed - set(state.ignored) - known)
        if not fresh:
            break
        state.iteration += 1
        state.candidates_history.append(fresh)
        counts = {"first": 0, "third": 0, "auto_third": 0, "ignored": 0}
        for inv in fresh:
            entry = index.invocation_for_node(inv)
            if entry is not None and entry.boundary_hint == "third":
                recorder.third(inv, AUTO_THIRD_CONFIDENCE)
                state.auto_third += 1
                counts["auto_third"] += 1
            else:
                recorder.resolve(oracle, inv, counts)
        record = {
            "iteration": state.iteration,
            "candidates": len(fresh),
            "src_to_brk": len(sel.src_to_brk),
            "brk_to_snk": len(sel.brk_to_snk),
            **counts,
        }
        state.log.append(record)
        log.info("ticr iteration %(iteration)d: %(candidates)d candidates, %(first)d first-party, "
                 "%(third)d third-party, %(auto_third)d auto third-party, %(ignored)d ignored", record)
    return state


def exhaustive_resolve(index: ProgramIndex, M: Iterable[int], oracle: Oracle, first_id: int = 1) -> TicrState:
    """One oracle task per unresolved call, no taint gating."""
    state = TicrState()
    batch = _order(index, M)
    recorder = _Recorder(index, state, first_id)
    counts = {"first": 0, "third": 0, "auto_third": 0, "ignored": 0}
    for inv in batch:
        recorder.resolve(oracle, inv, counts)
    if batch:
        state.iteration = 1
        state.candidates_history.append(batch)
        state.log.append({"iteration": 1, "candidates": len(batch), "src_to_brk": 0, "brk_to_snk": 0, **counts})
    return state
