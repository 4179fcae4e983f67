"""Taint specifications: facts, binding, validation, CSV files."""

from .binding import (
    ENDPOINT_KINDS,
    DuplicateId,
    Rejection,
    ValidatedSpecs,
    bind_endpoint,
    bind_span,
    merge_call_edges,
    validate_facts,
)
from .csvio import EDGE_HEADER, ENDPOINT_HEADER, FormatError, export_csv, import_csv, render_edges, render_endpoints
from .model import (
    SENTINEL_SPAN,
    CallEdgeFact,
    EndpointLocation,
    SinkFact,
    SourceFact,
    SpanLocation,
    TaintSpecs,
)

__all__ = [
    "EDGE_HEADER",
    "ENDPOINT_HEADER",
    "ENDPOINT_KINDS",
    "SENTINEL_SPAN",
    "CallEdgeFact",
    "DuplicateId",
    "EndpointLocation",
    "FormatError",
    "Rejection",
    "SinkFact",
    "SourceFact",
    "SpanLocation",
    "TaintSpecs",
    "ValidatedSpecs",
    "bind_endpoint",
    "bind_span",
    "export_csv",
    "import_csv",
    "merge_call_edges",
    "render_edges",
    "render_endpoints",
    "validate_facts",
]
