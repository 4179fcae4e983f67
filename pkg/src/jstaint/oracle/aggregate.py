"""Folding several oracle runs into one answer.

All three folds are pure functions of the multiset of completed runs, so
they do not depend on run order.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Optional

from .types import (
    CLASSIFICATIONS,
    EndpointProposal,
    FpCandidate,
    OracleFailure,
    ResolutionResult,
    SummaryVerdict,
    TpMetadata,
)

# most conservative first
CONSERVATIVE_ORDER = ("propagates", "unknown", "sanitizes")


def aggregate_union(runs: Iterable[Iterable[EndpointProposal]]) -> list[EndpointProposal]:
    """Union keyed on role and file:line:snippet, keeping the highest
    confidence (then the smallest location) seen for each key."""
    best: dict[tuple[str, str], EndpointProposal] = {}
    for run in runs:
        for p in run:
            k = (p.role, p.key())
            cur = best.get(k)
            if cur is None or (-p.confidence, p.loc, p.reason) < (-cur.confidence, cur.loc, cur.reason):
                best[k] = p
    return [best[k] for k in sorted(best)]


def _merge_candidates(results: Iterable[ResolutionResult]) -> tuple[FpCandidate, ...]:
    merged: dict[int, FpCandidate] = {}
    for r in results:
        for c in r.fp_candidates:
            cur = merged.get(c.function_index)
            if cur is None or (-c.confidence, c.trace) < (-cur.confidence, cur.trace):
                merged[c.function_index] = c
    return tuple(merged[i] for i in sorted(merged))


def aggregate_callgraph(runs: Iterable[Optional[ResolutionResult]]) -> ResolutionResult:
    """Stratified majority: the verdict needs strictly more than half of the
    successful runs, otherwise the call is unresolvable.  Candidates come
    only from runs on the winning side."""
    done = [r for r in runs if r is not None]
    if not done:
        raise OracleFailure("no successful run")
    votes = Counter(r.verdict for r in done)
    verdict, count = max(votes.items(), key=lambda kv: (kv[1], kv[0] == "unresolvable"))
    if count * 2 <= len(done):
        return ResolutionResult("unresolvable", reason=f"no majority among {len(done)} runs: {dict(sorted(votes.items()))}")
    side = [r for r in done if r.verdict == verdict]
    confidence = max(r.confidence for r in side)
    if verdict == "first":
        return ResolutionResult("first", _merge_candidates(side), reason=min(r.reason for r in side), confidence=confidence)
    if verdict == "third":
        metas = Counter(r.tp_metadata for r in side)
        meta: TpMetadata = min(metas, key=lambda m: (-metas[m], m))
        return ResolutionResult("third", tp_metadata=meta, reason=min(r.reason for r in side), confidence=confidence)
    return ResolutionResult("unresolvable", reason=min(r.reason for r in side) or "majority unresolvable", confidence=confidence)


def aggregate_summary(edge_id: int, runs: Iterable[Optional[SummaryVerdict]]) -> SummaryVerdict:
    """Majority over the classifications; ties go to the highest mean
    confidence, then to the more conservative class."""
    done = [r for r in runs if r is not None]
    if not done:
        raise OracleFailure("no successful run")
    votes = Counter(r.classification for r in done)
    top = max(votes.values())
    tied = [c for c in CLASSIFICATIONS if votes.get(c) == top]

    def mean_conf(c: str) -> float:
        confs = [r.confidence for r in done if r.classification == c]
        return sum(confs) / len(confs)

    winner = min(tied, key=lambda c: (-mean_conf(c), CONSERVATIVE_ORDER.index(c)))
    side = [r for r in done if r.classification == winner]
    confidence = int(mean_conf(winner) + 0.5)
    trace = max(side, key=lambda r: (r.confidence, len(r.trace), r.trace)).trace
    return SummaryVerdict(edge_id, winner, confidence, trace, tuple(r.classification for r in done))
