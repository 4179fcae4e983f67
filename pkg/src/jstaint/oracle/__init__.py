"""Resolver oracles: tool surface, backends and run aggregation."""

from .aggregate import CONSERVATIVE_ORDER, aggregate_callgraph, aggregate_summary, aggregate_union
from .deterministic import DeterministicBackend
from .pointsto import PointsTo
from .remote import RemoteBackend, RemoteConfig
from .replay import ReplayBackend, ScriptedBackend
from .service import DEFAULT_RUNS, Oracle
from .toolbelt import COMPLETION_TOOLS, MAX_FP_BATCH, ROLE_TOOLS, ToolError, Toolbelt, tool_schemas
from .types import (
    CLASSIFICATIONS,
    VERDICTS,
    BackendUnavailable,
    EndpointProposal,
    FpCandidate,
    OracleFailure,
    ResolutionResult,
    ResolutionTask,
    SummaryTask,
    SummaryVerdict,
    TpMetadata,
    Transcript,
)

__all__ = [
    "CONSERVATIVE_ORDER", "aggregate_callgraph", "aggregate_summary", "aggregate_union",
    "DeterministicBackend", "PointsTo", "RemoteBackend", "RemoteConfig", "ReplayBackend", "ScriptedBackend",
    "DEFAULT_RUNS", "Oracle", "COMPLETION_TOOLS", "MAX_FP_BATCH", "ROLE_TOOLS", "ToolError", "Toolbelt",
    "tool_schemas", "CLASSIFICATIONS", "VERDICTS", "BackendUnavailable", "EndpointProposal", "FpCandidate",
    "OracleFailure", "ResolutionResult", "ResolutionTask", "SummaryTask", "SummaryVerdict", "TpMetadata",
    "Transcript",
]
