from __future__ import annotations

import json

import pytest
from hypothesis import given, settings

from support import edge_facts, endpoint_facts
from jstaint.engine import load_annotations
from jstaint.index import FlowNode
from jstaint.specs import (
    EDGE_HEADER,
    ENDPOINT_HEADER,
    SENTINEL_SPAN,
    CallEdgeFact,
    DuplicateId,
    EndpointLocation,
    FormatError,
    SinkFact,
    SourceFact,
    SpanLocation,
    bind_endpoint,
    bind_span,
    export_csv,
    import_csv,
    merge_call_edges,
    validate_facts,
)

# -- CSV round trip ------------------------------------------------------------

def round_trip(tmp_path, sources, sinks, edges):
    export_csv(tmp_path, sources, sinks, edges)
    specs = import_csv(tmp_path)
    return sorted(specs.sources), sorted(specs.sinks), sorted(specs.edges)


@settings(max_examples=1000, deadline=None)
@given(endpoint_facts(SourceFact), endpoint_facts(SinkFact), edge_facts())
def test_csv_round_trip(tmp_path_factory, sources, sinks, edges):
    out = tmp_path_factory.mktemp("csv")
    assert round_trip(out, sources, sinks, edges) == (sorted(sources), sorted(sinks), sorted(edges))


def test_empty_sets_write_header_only(tmp_path):
    export_csv(tmp_path, [], [], [])
    assert (tmp_path / "sources.csv").read_text() == ",".join(ENDPOINT_HEADER) + "\n"
    assert (tmp_path / "sinks.csv").read_text() == ",".join(ENDPOINT_HEADER) + "\n"
    assert (tmp_path / "calledges.csv").read_text() == ",".join(EDGE_HEADER) + "\n"
    specs = import_csv(tmp_path)
    assert specs.sources == specs.sinks == specs.edges == ()


def test_export_is_byte_stable(tmp_path):
    facts = [SourceFact(2, EndpointLocation("a.js", 1, 1, "x"), 3), SourceFact(1, EndpointLocation("a.js", 2, 1, "y, z"), 5)]
    export_csv(tmp_path / "a", facts, [], [])
    export_csv(tmp_path / "b", list(reversed(facts)), [], [])
    assert (tmp_path / "a/sources.csv").read_bytes() == (tmp_path / "b/sources.csv").read_bytes()


@pytest.mark.parametrize(
    "body, row",
    [
        ("1,a.js,1,1,x,3\n2,a.js,notanint,1,y,3\n", 3),
        ("1,a.js,1,1,x,9\n", 2),
        ("1,a.js,1,1,x\n", 2),
        ("1,a.js,0,1,x,3\n", 2),
    ],
)
def test_malformed_rows_report_row_number(tmp_path, body, row):
    export_csv(tmp_path, [], [], [])
    (tmp_path / "sources.csv").write_text(",".join(ENDPOINT_HEADER) + "\n" + body)
    with pytest.raises(FormatError) as exc:
        import_csv(tmp_path)
    assert exc.value.file == "sources.csv"
    assert exc.value.row == row


def test_wrong_header(tmp_path):
    export_csv(tmp_path, [], [], [])
    (tmp_path / "calledges.csv").write_text("id,call\n")
    with pytest.raises(FormatError) as exc:
        import_csv(tmp_path)
    assert exc.value.row == 1


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        import_csv(tmp_path)


def test_fact_invariants():
    with pytest.raises(ValueError):
        SourceFact(1, EndpointLocation("a.js", 1, 1, "x"), 0)
    with pytest.raises(ValueError):
        EndpointLocation("a.js", 1, 1, "")
    with pytest.raises(ValueError):
        EndpointLocation("a.js", 1, 1, "a\x00b")
    with pytest.raises(ValueError):
        CallEdgeFact(1, SpanLocation("a.js", 1, 1, 1, 3), SENTINEL_SPAN, "first", 3)
    with pytest.raises(ValueError):
        CallEdgeFact(1, SENTINEL_SPAN, SENTINEL_SPAN, "third", 3)
    assert CallEdgeFact(1, SpanLocation("a.js", 1, 1, 1, 3), SENTINEL_SPAN, "third", 3).target.is_sentinel


# -- binding --------------------------------------------------------------------


def test_bind_mrk_source(bundled_index, fixture_path):
    idx = bundled_index("mrk_like")
    (ann,) = load_annotations(fixture_path("mrk_like") / "annotation.json")
    node = bind_endpoint(ann.source, idx)
    assert node is not None and node.snippet == "input" and node.kind == "parameter"
    partial = EndpointLocation(ann.source.file, ann.source.line, ann.source.col, "inpu")
    assert bind_endpoint(partial, idx) is None
    shifted = EndpointLocation(ann.source.file, ann.source.line, ann.source.col + 1, "input")
    assert bind_endpoint(shifted, idx) is None


def test_bind_multi_line_by_label(index_of):
    idx = index_of("const y = f(a,\n  b);")
    call = [n for n in idx.nodes if n.kind == "invocation"][0]
    assert bind_endpoint(EndpointLocation("app.js", 1, 11, call.label), idx) == call
    assert bind_endpoint(EndpointLocation("app.js", 1, 11, call.snippet), idx) == call


class _StubIndex:
    def __init__(self, nodes):
        self._nodes = nodes

    def nodes_at(self, file, line, col):
        return list(self._nodes)


def test_bind_prefers_expression_then_innermost():
    wide = FlowNode(1, "a.js", (1, 1, 2, 9), "x", "expression")
    narrow = FlowNode(2, "a.js", (1, 1, 1, 1), "x", "expression")
    call = FlowNode(0, "a.js", (1, 1, 1, 1), "x", "invocation")
    loc = EndpointLocation("a.js", 1, 1, "x")
    assert bind_endpoint(loc, _StubIndex([call, wide, narrow])).id == 2
    assert bind_endpoint(loc, _StubIndex([call])).id == 0
    same = FlowNode(3, "a.js", (1, 1, 1, 1), "x", "expression")
    assert bind_endpoint(loc, _StubIndex([same, narrow])).id == 2


def test_bind_span_exact(index_of):
    idx = index_of("const y = f(x); function g(p){ return p; }")
    assert bind_span(SpanLocation("app.js", 1, 11, 1, 14), "invocation", idx).snippet == "f(x)"
    assert bind_span(SpanLocation("app.js", 1, 11, 1, 13), "invocation", idx) is None
    assert bind_span(SpanLocation("app.js", 1, 11, 1, 15), "invocation", idx) is None
    assert bind_span(SpanLocation("app.js", 1, 17, 1, 42), "function", idx).kind == "function"
    assert bind_span(SENTINEL_SPAN, "function", idx) is None
    with pytest.raises(ValueError):
        bind_span(SpanLocation("app.js", 1, 11, 1, 14), "expression", idx)


# -- validation -----------------------------------------------------------------

PROGRAM = {"app.js": "const y = f(x); function g(p){ return p; }", "test/t.js": "f(1);"}


def test_validation_partitions_facts(index_of, tmp_path):
    idx = index_of(PROGRAM)
    call = SpanLocation("app.js", 1, 11, 1, 14)
    sources = [
        SourceFact(1, EndpointLocation("app.js", 1, 13, "x"), 5),
        SourceFact(2, EndpointLocation("app.js", 1, 13, "nope"), 5),
        SourceFact(3, EndpointLocation("test/t.js", 1, 3, "1"), 5),
        SourceFact(4, EndpointLocation("app.js", 1, 28, "p"), 1),
    ]
    sinks = [SinkFact(1, EndpointLocation("app.js", 1, 39, "p"), 4)]
    edges = [
        CallEdgeFact(1, call, SpanLocation("app.js", 1, 17, 1, 42), "first", 5),
        CallEdgeFact(2, call, SENTINEL_SPAN, "third", 5),
        CallEdgeFact(3, call, SpanLocation("app.js", 1, 17, 1, 41), "first", 5),
        CallEdgeFact(4, SpanLocation("app.js", 1, 1, 1, 5), SENTINEL_SPAN, "third", 5),
        CallEdgeFact(5, SpanLocation("test/t.js", 1, 1, 1, 4), SENTINEL_SPAN, "third", 5),
    ]
    v = validate_facts(sources, sinks, edges, idx, min_confidence=2)
    assert set(v.sources) == {1}
    assert set(v.sinks) == {1}
    assert set(v.first) == {1} and set(v.third) == {2}
    reasons = {(r.fact, r.id): r.reason for r in v.rejections}
    assert reasons == {
        ("source", 2): "unbound-endpoint",
        ("source", 3): "test-directory",
        ("source", 4): "below-min-confidence",
        ("edge", 3): "unbound-target",
        ("edge", 4): "unbound-call",
        ("edge", 5): "test-directory",
    }
    accepted = len(v.sources) + len(v.sinks) + len(v.first) + len(v.third)
    assert accepted + len(v.rejections) == len(sources) + len(sinks) + len(edges)

    v.write_rejections(tmp_path / "rejections.jsonl")
    lines = (tmp_path / "rejections.jsonl").read_text().splitlines()
    assert len(lines) == 6
    assert {json.loads(line)["reason"] for line in lines} == set(reasons.values())


def test_duplicate_ids_rejected(index_of):
    idx = index_of(PROGRAM)
    loc = EndpointLocation("app.js", 1, 13, "x")
    with pytest.raises(DuplicateId):
        validate_facts([SourceFact(1, loc, 5), SourceFact(1, loc, 4)], [], [], idx)


def test_ignored_edges_bind_but_stay_inactive(index_of):
    idx = index_of(PROGRAM)
    call = SpanLocation("app.js", 1, 11, 1, 14)
    v = validate_facts([], [], [CallEdgeFact(1, call, SENTINEL_SPAN, "third", 5, "ignored")], idx)
    assert v.E_third_bound and not v.active_third_calls()


def test_merge_call_edges():
    call = SpanLocation("a.js", 1, 1, 1, 3)
    a = CallEdgeFact(7, call, SENTINEL_SPAN, "third", 5)
    b = CallEdgeFact(3, call, SENTINEL_SPAN, "third", 5)
    c = CallEdgeFact(4, call, SENTINEL_SPAN, "third", 5, "ignored")
    merged, conflicts = merge_call_edges([a], [b, c])
    assert [f.id for f in merged] == [1]
    assert [r.reason for r in conflicts] == ["conflicting-status:active/ignored"]
