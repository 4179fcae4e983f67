"""Ground-truth annotations and alert grading."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from ..cwe import normalize_cwe
from ..index import ProgramIndex
from ..specs import EndpointLocation, bind_endpoint
from .query import Alert

CATEGORIES = ("exact", "extended", "equivalent-review", "none")
DETECTING = frozenset({"exact", "extended"})


class AnnotationUnbindable(ValueError):
    pass


@dataclass(frozen=True)
class Annotation:
    finding_id: str
    cwe: str
    source: EndpointLocation
    sink: EndpointLocation
    notes: str = ""
    expected_ruleset: Optional[str] = None

    @classmethod
    def from_dict(cls, data: dict) -> "Annotation":
        def loc(d: dict) -> EndpointLocation:
            return EndpointLocation(d["file"], int(d["line"]), int(d["col"]), d["snippet"])

        return cls(
            str(data["finding_id"]),
            normalize_cwe(data["cwe"]),
            loc(data["source"]),
            loc(data["sink"]),
            data.get("notes", ""),
            data.get("expected_ruleset"),
        )

    def to_dict(self) -> dict:
        out = {
            "finding_id": self.finding_id,
            "cwe": f"CWE-{self.cwe}",
            "source": self.source.to_dict(),
            "sink": self.sink.to_dict(),
            "notes": self.notes,
        }
        if self.expected_ruleset:
            out["expected_ruleset"] = self.expected_ruleset
        return out

    def bind(self, index: ProgramIndex) -> tuple[int, int]:
        src = bind_endpoint(self.source, index)
        snk = bind_endpoint(self.sink, index)
        if src is None or snk is None:
            which = "source" if src is None else "sink"
            raise AnnotationUnbindable(f"{self.finding_id}: annotated {which} does not bind")
        return src.id, snk.id


def load_annotations(path: str | Path) -> list[Annotation]:
    """A JSON file holding one annotation object or a list of them."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    items = data if isinstance(data, list) else [data]
    return [Annotation.from_dict(d) for d in items]


def match_ground_truth(alert: Alert, annotation: Annotation, index: ProgramIndex) -> str:
    src, snk = annotation.bind(index)
    flows = alert.active_flows if alert.status == "active" else alert.flows
    for f in flows:
        if f.nodes[0] == src and f.nodes[-1] == snk:
            return "exact"
    for f in flows:
        if src in f.nodes and snk in f.nodes and f.nodes.index(src) <= f.nodes.index(snk):
            return "extended"
    touches = any(src in f.nodes or snk in f.nodes for f in flows)
    if touches and normalize_cwe(alert.cwe) == annotation.cwe:
        return "equivalent-review"
    return "none"


def best_match(alerts: list[Alert], annotation: Annotation, index: ProgramIndex) -> str:
    """Strongest category over the active alerts."""
    found = {match_ground_truth(a, annotation, index) for a in alerts if a.status == "active"}
    for cat in CATEGORIES:
        if cat in found:
            return cat
    return "none"
