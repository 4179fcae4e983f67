"""Taint-specification facts and the location tuples they carry."""

from __future__ import annotations

from dataclasses import dataclass

CONFIDENCE_LEVELS = (1, 2, 3, 4, 5)
EDGE_KINDS = ("first", "third")
EDGE_STATUSES = ("active", "ignored")


def _check_confidence(value: int) -> None:
    if value not in CONFIDENCE_LEVELS:
        raise ValueError(f"confidence must be in 1..5, got {value!r}")


@dataclass(frozen=True, order=True)
class EndpointLocation:
    file: str
    line: int
    col: int
    snippet: str

    def __post_init__(self) -> None:
        if not self.snippet:
            raise ValueError("endpoint snippet must be non-empty")
        if "\x00" in self.snippet:
            raise ValueError("endpoint snippet must not contain NUL")  # csv cannot carry it
        if self.line < 1 or self.col < 1:
            raise ValueError("endpoint coordinates are 1-based")

    def key(self) -> str:
        return f"{self.file}:{self.line}:{self.snippet}"

    def to_dict(self) -> dict:
        return {"file": self.file, "line": self.line, "col": self.col, "snippet": self.snippet}


@dataclass(frozen=True, order=True)
class SpanLocation:
    file: str
    start_line: int
    start_col: int
    end_line: int
    end_col: int

    def __post_init__(self) -> None:
        if (self.start_line, self.start_col) > (self.end_line, self.end_col):
            raise ValueError("span start must not follow its end")
        if self.file != SENTINEL_FILE and min(self.start_line, self.start_col, self.end_line, self.end_col) < 1:
            raise ValueError("span coordinates are 1-based")

    @property
    def coords(self) -> tuple[int, int, int, int]:
        return (self.start_line, self.start_col, self.end_line, self.end_col)

    @property
    def is_sentinel(self) -> bool:
        return self == SENTINEL_SPAN

    @classmethod
    def of(cls, file: str, span: tuple[int, int, int, int]) -> "SpanLocation":
        return cls(file, *span)

    def to_dict(self) -> dict:
        return {"file": self.file, "span": list(self.coords)}


SENTINEL_FILE = "-"
SENTINEL_SPAN = SpanLocation(SENTINEL_FILE, 0, 0, 0, 0)


@dataclass(frozen=True, order=True)
class SourceFact:
    id: int
    loc: EndpointLocation
    confidence: int

    def __post_init__(self) -> None:
        _check_confidence(self.confidence)


@dataclass(frozen=True, order=True)
class SinkFact:
    id: int
    loc: EndpointLocation
    confidence: int

    def __post_init__(self) -> None:
        _check_confidence(self.confidence)


@dataclass(frozen=True, order=True)
class CallEdgeFact:
    id: int
    call: SpanLocation
    target: SpanLocation
    kind: str
    confidence: int
    status: str = "active"

    def __post_init__(self) -> None:
        _check_confidence(self.confidence)
        if self.kind not in EDGE_KINDS:
            raise ValueError(f"edge kind must be first or third, got {self.kind!r}")
        if self.status not in EDGE_STATUSES:
            raise ValueError(f"edge status must be active or ignored, got {self.status!r}")
        if self.call.is_sentinel:
            raise ValueError("the call site of an edge cannot be the sentinel span")
        if self.kind == "first" and self.target.is_sentinel:
            raise ValueError("first-party edges need a real target span")

    def content_key(self) -> tuple:
        return (self.call, self.target, self.kind)


@dataclass(frozen=True)
class TaintSpecs:
    sources: tuple[SourceFact, ...] = ()
    sinks: tuple[SinkFact, ...] = ()
    edges: tuple[CallEdgeFact, ...] = ()

    def with_edges(self, edges) -> "TaintSpecs":
        return TaintSpecs(self.sources, self.sinks, tuple(edges))
