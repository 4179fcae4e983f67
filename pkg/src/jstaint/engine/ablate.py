"""First-detecting ruleset per ground-truth finding."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Optional

from ..flowgraph import DEFAULT_ACCESS_PATH_LIMIT
from ..index import ProgramIndex
from ..specs import ValidatedSpecs
from .groundtruth import DETECTING, Annotation, best_match
from .query import run_query
from .rulesets import RULESET_ORDER

ABLATION_HEADER = ("finding_id", "cwe", "first_ruleset", "match", *RULESET_ORDER)


@dataclass
class AblationRow:
    finding_id: str
    cwe: str
    first_ruleset: Optional[str]
    match: str
    per_ruleset: dict[str, str] = field(default_factory=dict)

    def cells(self) -> list[str]:
        return [
            self.finding_id,
            f"CWE-{self.cwe}",
            self.first_ruleset or "none",
            self.match,
            *(self.per_ruleset.get(r, "none") for r in RULESET_ORDER),
        ]


def ablate(
    index: ProgramIndex,
    annotations: list[Annotation],
    specs: Optional[ValidatedSpecs],
    access_path_limit: int = DEFAULT_ACCESS_PATH_LIMIT,
) -> list[AblationRow]:
    """Run R1..R7 in order; a finding is detected by a ruleset when one of
    its active alerts grades exact or extended."""
    for ann in annotations:
        ann.bind(index)
    per_cwe: dict[str, dict[str, list]] = {}
    for cwe in sorted({a.cwe for a in annotations}):
        per_cwe[cwe] = {}
        for name in RULESET_ORDER:
            per_cwe[cwe][name] = run_query(index, cwe, name, specs, access_path_limit).active
    rows = []
    for ann in annotations:
        grades = {name: best_match(per_cwe[ann.cwe][name], ann, index) for name in RULESET_ORDER}
        first = next((name for name in RULESET_ORDER if grades[name] in DETECTING), None)
        rows.append(AblationRow(ann.finding_id, ann.cwe, first, grades[first] if first else "none", grades))
    return rows


def render_ablation(rows: list[AblationRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(ABLATION_HEADER)
    for row in rows:
        writer.writerow(row.cells())
    return buf.getvalue()
