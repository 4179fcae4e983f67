"""Run a backend several times per task and fold the runs."""

from __future__ import annotations

import json
import time
from collections import Counter
from pathlib import Path
from typing import Optional

from ..cwe import CweContext
from ..index import ProgramIndex
from ..specs.model import SinkFact, SourceFact
from .aggregate import aggregate_callgraph, aggregate_summary, aggregate_union
from .toolbelt import RunState, Toolbelt
from .types import (
    BackendUnavailable,
    OracleFailure,
    ResolutionResult,
    ResolutionTask,
    SummaryTask,
    SummaryVerdict,
    Transcript,
)

DEFAULT_RUNS = 3


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


class Oracle:
    def __init__(
        self,
        backend,
        runs: int = DEFAULT_RUNS,
        transcript_dir: Optional[str | Path] = None,
        cwe: Optional[CweContext] = None,
    ) -> None:
        if runs < 1:
            raise ValueError("runs must be positive")
        self.backend = backend
        self.runs = runs
        self.transcript_dir = Path(transcript_dir) if transcript_dir is not None else None
        self.cwe = cwe
        self.task_counts: Counter = Counter()
        self.transcripts: list[Transcript] = []

    # plumbing --------------------------------------------------------------------

    def _persist(self, t: Transcript) -> None:
        self.transcripts.append(t)
        if self.transcript_dir is None:
            return
        out = self.transcript_dir / t.role
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{_safe(t.task_id)}.run{t.run}.json"
        path.write_text(json.dumps(t.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    def _runs(self, role: str, index: ProgramIndex, task_id: str, payload, runs: Optional[int]) -> list[Optional[RunState]]:
        self.task_counts[role] += 1
        states: list[Optional[RunState]] = []
        for run in range(1, (runs or self.runs) + 1):
            t = Transcript(role, task_id, run, getattr(self.backend, "name", type(self.backend).__name__))
            tb = Toolbelt(index, role, t, self.cwe)
            start = time.perf_counter()
            try:
                self.backend.run(role, tb, payload)
                if not tb.completed:
                    raise OracleFailure("run ended without a completion tool")
                states.append(tb.state)
            except BackendUnavailable as exc:
                t.status, t.error = "failed", str(exc)
                t.wall_time = time.perf_counter() - start
                self._persist(t)
                raise
            except OracleFailure as exc:
                t.status, t.error = "failed", str(exc)
                states.append(None)
            t.wall_time = time.perf_counter() - start
            t.proposals = self._proposals(role, tb.state) if t.status == "ok" else []
            self._persist(t)
        return states

    @staticmethod
    def _proposals(role: str, state: RunState) -> list:
        if role == "source_sink":
            return [
                {"role": p.role, **p.loc.to_dict(), "confidence": p.confidence, "reason": p.reason}
                for p in state.sources + state.sinks
            ]
        if role == "callgraph":
            out: list = [
                {"function_index": c.function_index, "trace": list(c.trace), "confidence": c.confidence} for c in state.fp
            ]
            if state.tp is not None:
                out.append({"library": state.tp.library, "module_path": state.tp.module_path,
                            "import_statement": state.tp.import_statement, "confidence": state.tp_confidence})
            out.append({"status": state.completed, "summary": state.summary})
            return out
        return [{"classification": state.completed, "confidence": state.confidence, "steps": list(state.steps)}]

    # roles -------------------------------------------------------------------------

    def run_source_sink(self, index: ProgramIndex, runs: Optional[int] = None) -> tuple[list[SourceFact], list[SinkFact]]:
        task_id = self.cwe.rule_id if self.cwe is not None else "discovery"
        states = [s for s in self._runs("source_sink", index, task_id, None, runs) if s is not None]
        if not states:
            raise OracleFailure("every source/sink run failed")
        merged = aggregate_union(s.sources + s.sinks for s in states)
        sources = [SourceFact(i, p.loc, p.confidence) for i, p in enumerate((p for p in merged if p.role == "source"), start=1)]
        sinks = [SinkFact(i, p.loc, p.confidence) for i, p in enumerate((p for p in merged if p.role == "sink"), start=1)]
        return sources, sinks

    @staticmethod
    def _resolution(state: Optional[RunState]) -> Optional[ResolutionResult]:
        if state is None:
            return None
        if state.completed == "resolved" and state.fp:
            conf = max(c.confidence for c in state.fp)
            return ResolutionResult("first", tuple(sorted(state.fp)), reason=state.summary, confidence=conf)
        if state.completed == "resolved" and state.tp is not None:
            return ResolutionResult("third", tp_metadata=state.tp, reason=state.summary, confidence=state.tp_confidence)
        return ResolutionResult("unresolvable", reason=state.summary, confidence=max(state.confidence, 1))

    def run_callgraph(self, index: ProgramIndex, task: ResolutionTask, runs: Optional[int] = None) -> ResolutionResult:
        states = self._runs("callgraph", index, task.task_id, task, runs)
        return aggregate_callgraph(self._resolution(s) for s in states)

    def run_flowsummary(self, index: ProgramIndex, task: SummaryTask, runs: Optional[int] = None) -> SummaryVerdict:
        n = runs or self.runs
        if n % 2 == 0:
            raise ValueError("flow-summary voting needs an odd number of runs")
        states = self._runs("flowsummary", index, f"edge-{task.edge_id}", task, n)
        verdicts = [
            None if s is None else SummaryVerdict(task.edge_id, s.completed, s.confidence, s.steps) for s in states
        ]
        return aggregate_summary(task.edge_id, verdicts)

    @property
    def tokens(self) -> int:
        return sum(t.tokens for t in self.transcripts)
