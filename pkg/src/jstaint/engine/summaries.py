"""Demand-driven validation of third-party flow summaries.

Only candidate edges that actually appear in a reported thread flow are
sent to the flow-summary oracle, each exactly once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from ..index import ProgramIndex
from ..oracle import BackendUnavailable, Oracle, OracleFailure, SummaryTask, SummaryVerdict
from ..oracle.pointsto import library_name
from ..specs import CallEdgeFact, SpanLocation, ValidatedSpecs
from .query import Alert

log = logging.getLogger(__name__)


@dataclass
class SummaryOutcome:
    alerts: list[Alert]
    verdicts: dict[int, SummaryVerdict] = field(default_factory=dict)
    errors: dict[int, str] = field(default_factory=dict)
    ignored_edges: set[int] = field(default_factory=set)

    @property
    def tasks(self) -> int:
        return len(self.verdicts) + len(self.errors)

    def documents(self) -> list[dict]:
        docs = [v.to_dict() for _, v in sorted(self.verdicts.items())]
        docs += [
            {"edge_id": e, "classification": "unknown", "confidence": 1, "trace": [], "run_verdicts": [], "error": msg}
            for e, msg in sorted(self.errors.items())
        ]
        return sorted(docs, key=lambda d: d["edge_id"])


def candidate_edges(alerts: list[Alert]) -> list[int]:
    return sorted({e for a in alerts if a.status == "active" for f in a.active_flows for e in f.summaries})


def _library(index: ProgramIndex, inv: int) -> str:
    entry = index.invocation_for_node(inv)
    if entry is None or entry.witness is None:
        return ""
    path, line = entry.witness
    for site in index.requires:
        if site.file == path and index.node(site.node).span[0] == line and site.resolved is None:
            return library_name(site.specifier)
    return ""


def summary_task(index: ProgramIndex, specs: ValidatedSpecs, edge_id: int, cwe: str) -> SummaryTask:
    inv = specs.third[edge_id]
    node = index.node(inv)
    return SummaryTask(edge_id, inv, SpanLocation.of(node.file, node.span), node.snippet, _library(index, inv), cwe)


def validate_summaries(
    alerts: list[Alert],
    index: ProgramIndex,
    specs: ValidatedSpecs,
    oracle: Oracle,
    cwe: str,
) -> SummaryOutcome:
    """Sanitizing verdicts ignore the edge and filter every flow that uses it;
    an alert left with no active flow is filtered as a whole.  Oracle
    errors leave the edge in place."""
    out = SummaryOutcome(alerts)
    for edge_id in candidate_edges(alerts):
        try:
            verdict = oracle.run_flowsummary(index, summary_task(index, specs, edge_id, cwe))
        except (OracleFailure, BackendUnavailable) as exc:
            log.warning("flow summary for edge %d failed, keeping it: %s", edge_id, exc)
            out.errors[edge_id] = str(exc)
            continue
        out.verdicts[edge_id] = verdict
        if not verdict.propagates:
            out.ignored_edges.add(edge_id)
    for alert in alerts:
        for flow in alert.flows:
            if out.ignored_edges.intersection(flow.summaries):
                flow.status = "filtered"
        if alert.status == "active" and not alert.active_flows:
            alert.status = "filtered"
    return out


def ignore_edges(edges: list[CallEdgeFact], ignored: set[int]) -> list[CallEdgeFact]:
    """Edge facts with the given ids switched to ``ignored``."""
    return [
        CallEdgeFact(e.id, e.call, e.target, e.kind, e.confidence, "ignored") if e.id in ignored else e for e in edges
    ]
