"""Data exchanged between the pipeline and resolver-oracle backends."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..specs.model import EndpointLocation, SpanLocation

VERDICTS = ("first", "third", "unresolvable")
CLASSIFICATIONS = ("propagates", "sanitizes", "unknown")


class OracleFailure(RuntimeError):
    """A task could not be answered (every run failed)."""


class BackendUnavailable(OracleFailure):
    """Transport-level failure talking to a remote backend."""


@dataclass(frozen=True, order=True)
class EndpointProposal:
    role: str  # source sink
    loc: EndpointLocation
    confidence: int
    reason: str = ""

    def key(self) -> str:
        return self.loc.key()


@dataclass(frozen=True)
class ResolutionTask:
    task_id: str
    invocation: int  # FlowNode id
    call: SpanLocation
    snippet: str
    callee_name: Optional[str] = None


@dataclass(frozen=True, order=True)
class FpCandidate:
    function_index: int
    trace: tuple[str, ...]
    confidence: int


@dataclass(frozen=True, order=True)
class TpMetadata:
    library: str
    module_path: str
    import_statement: str


@dataclass(frozen=True)
class ResolutionResult:
    verdict: str
    fp_candidates: tuple[FpCandidate, ...] = ()
    tp_metadata: Optional[TpMetadata] = None
    reason: str = ""
    confidence: int = 3

    def __post_init__(self) -> None:
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")
        if self.verdict == "first" and (not self.fp_candidates or any(not c.trace for c in self.fp_candidates)):
            raise ValueError("a first-party verdict needs candidates with traces")
        if self.verdict == "third" and self.tp_metadata is None:
            raise ValueError("a third-party verdict needs library metadata")


@dataclass(frozen=True)
class SummaryTask:
    edge_id: int  # CallEdgeFact id
    invocation: int
    call: SpanLocation
    snippet: str
    library: str = ""
    cwe: str = ""


@dataclass(frozen=True)
class SummaryVerdict:
    edge_id: int
    classification: str
    confidence: int
    trace: tuple[str, ...] = ()
    run_verdicts: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.classification not in CLASSIFICATIONS:
            raise ValueError(f"unknown classification {self.classification!r}")

    @property
    def propagates(self) -> bool:
        """Unknown counts as propagating."""
        return self.classification != "sanitizes"

    def to_dict(self) -> dict:
        return {
            "edge_id": self.edge_id,
            "classification": self.classification,
            "confidence": self.confidence,
            "trace": list(self.trace),
            "run_verdicts": list(self.run_verdicts),
        }


@dataclass
class ToolCall:
    name: str
    arguments: dict
    result: object

    def to_dict(self) -> dict:
        return {"name": self.name, "arguments": self.arguments, "result": self.result}


@dataclass
class Transcript:
    role: str
    task_id: str
    run: int
    backend: str
    calls: list[ToolCall] = field(default_factory=list)
    proposals: list = field(default_factory=list)
    status: str = "ok"  # ok failed
    error: str = ""
    wall_time: float = 0.0
    tokens: int = 0

    def record(self, name: str, arguments: dict, result: object) -> object:
        self.calls.append(ToolCall(name, arguments, result))
        return result

    def to_dict(self) -> dict:
        return {
            "role": self.role,
            "task_id": self.task_id,
            "run": self.run,
            "backend": self.backend,
            "status": self.status,
            "error": self.error,
            "tool_calls": [c.to_dict() for c in self.calls],
            "proposals": self.proposals,
            "wall_time": round(self.wall_time, 6),
            "tokens": self.tokens,
        }
