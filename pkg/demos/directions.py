"""Show that each direction of candidate selection repairs a different break.

    python demos/directions.py
"""

from jstaint.engine import best_match, load_annotations, run_query
from jstaint.fixtures import bundled_fixture
from jstaint.index import build_program_index
from jstaint.oracle import DeterministicBackend, Oracle
from jstaint.specs import SinkFact, SourceFact, validate_facts
from jstaint.ticr import run_ticr

for name in ("source_to_break", "break_to_sink"):
    path = bundled_fixture(name)
    idx = build_program_index(path)
    (ann,) = load_annotations(path / "annotation.json")
    seeds = ([SourceFact(1, ann.source, 5)], [SinkFact(1, ann.sink, 5)])
    row = []
    for directions in (("forward",), ("backward",), ("forward", "backward")):
        state = run_ticr(idx, validate_facts(*seeds, [], idx), Oracle(DeterministicBackend(), cwe=ann.cwe), directions=directions)
        specs = validate_facts(*seeds, state.resolved_edges, idx)
        grade = best_match(run_query(idx, ann.cwe, "R2", specs).active, ann, idx)
        row.append(f"{'+'.join(directions)}={grade}")
    print(f"{name}: {'  '.join(row)}")
