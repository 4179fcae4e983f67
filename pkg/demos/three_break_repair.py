"""Analyze the bundled mrk-style package with R1 and then R4.

R1 (default endpoints, precision-0 call graph) misses the flow; R4 finds
it once TICR has repaired the three call-graph breaks.

    python demos/three_break_repair.py [out-dir]
"""

import sys
import tempfile
from pathlib import Path

from jstaint.fixtures import bundled_fixture
from jstaint.pipeline import Settings, analyze

pkg = bundled_fixture("mrk_like")
out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="mrk-"))

for ruleset in ("R1", "R4"):
    res = analyze(
        Settings(
            package=str(pkg),
            ruleset=ruleset,
            access_path_limit=3,
            annotation=str(pkg / "annotation.json"),
            out=str(out / ruleset),
        )
    )
    print(f"{ruleset}: {len(res.active)} active alert(s), grades={res.grades}")

r4 = res.ticr
print(f"TICR iterations={r4['iterations']} oracle tasks={r4['oracle_tasks']}")
for i, batch in enumerate(r4["candidates"], 1):
    print(f"  round {i}: {', '.join(batch)}")
print(f"SARIF: {out / 'R4' / 'report.sarif.json'}")
