from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import closure_reachable, sink_states_reached
from jstaint.engine import load_annotations
from jstaint.fixtures import bundled_fixture, bundled_fixtures
from jstaint.flowgraph import (
    ALL_RULES,
    DanglingEdge,
    FlowEdge,
    FlowGraph,
    GraphOptions,
    build_flow_graph,
    reachable,
    resolve_callees_p0,
    unresolved_calls,
)


def invocation(idx, snippet):
    (inv,) = [i for i in idx.invocations if idx.node(i.node).snippet == snippet]
    return inv


def node_id(idx, snippet, kind=None):
    hits = [n.id for n in idx.nodes if n.snippet == snippet and (kind is None or n.kind == kind)]
    return hits[0]


class TestPrecisionZero:
    def test_direct_declaration(self, index_of):
        idx = index_of("function f(){} f();")
        assert [e.name for e in resolve_callees_p0(invocation(idx, "f()"), idx)] == ["f"]

    def test_single_assignment_const(self, index_of):
        idx = index_of("const h = function(){}; h();")
        (entry,) = resolve_callees_p0(invocation(idx, "h()"), idx)
        assert entry.name == "h"

    def test_reassigned_let_is_unresolved(self, index_of):
        idx = index_of("let h = function(){}; h = g; h();")
        assert resolve_callees_p0(invocation(idx, "h()"), idx) == []

    def test_object_literal_method(self, index_of):
        idx = index_of("const o = { m: function (x) { return x; } }; o.m(1);")
        assert len(resolve_callees_p0(invocation(idx, "o.m(1)"), idx)) == 1

    def test_computed_member_is_unresolved(self, index_of):
        idx = index_of("const mrk = { htmlify: {} }; mrk.htmlify[token.name](token);")
        assert resolve_callees_p0(invocation(idx, "mrk.htmlify[token.name](token)"), idx) == []

    def test_immediately_invoked_literal(self, index_of):
        idx = index_of("(function () { return 1; })();")
        assert len(resolve_callees_p0(idx.invocations[0], idx)) == 1


class TestUnresolvedSets:
    def test_catalog_and_test_dirs(self, index_of):
        idx = index_of({"a.js": 'const s = " ".trim(); fn(s);', "__tests__/a.test.js": "other(1);"})
        sets = unresolved_calls(idx)
        trim = invocation(idx, '" ".trim()').node
        fn = invocation(idx, "fn(s)").node
        other = invocation(idx, "other(1)").node
        assert trim in sets.raw and trim not in sets.filtered
        assert fn in sets.filtered
        assert other not in sets.raw and other not in sets.filtered
        assert sets.filtered <= sets.raw

    def test_mrk_dispatch_is_unresolved(self, bundled_index):
        idx = bundled_index("mrk_like")
        sets = unresolved_calls(idx)
        snippets = {idx.node(i).snippet for i in sets.filtered}
        assert any(s.startswith("fn(src") for s in snippets)
        for i in sets.filtered:
            assert resolve_callees_p0(idx.invocation_for_node(i), idx) == []


class TestGraph:
    def test_extended_edges_only_when_enabled(self, bundled_index):
        idx = bundled_index("rule_param")
        base = build_flow_graph(idx)
        ext = build_flow_graph(idx, GraphOptions(extended=True, unresolved=unresolved_calls(idx).filtered))
        for label in ("param", "object", "func-obj", "method"):
            assert base.edges_with_label(label) == []
        assert ext.edges_with_label("param")

    def test_unknown_rule_rejected(self):
        with pytest.raises(ValueError):
            GraphOptions(extended={"bogus"})

    def test_dangling_asserted_edge(self, index_of):
        idx = index_of("f(1);")
        with pytest.raises(DanglingEdge):
            build_flow_graph(idx, GraphOptions(asserted_edges=[(0, 10_000)]))

    def test_object_rule_micro_program(self, index_of):
        idx = index_of("const o = {}; o.p = location.hash; sink(o);")
        src = node_id(idx, "location.hash")
        o_arg = [n.id for n in idx.nodes if n.snippet == "o" and n.line == 1 and n.col == 41][0]
        on = build_flow_graph(idx, GraphOptions(extended={"object"}))
        off = build_flow_graph(idx, GraphOptions(extended=()))
        assert on.sinks_reached([src], [o_arg]) == {o_arg}
        assert off.sinks_reached([src], [o_arg]) == set()

    def test_source_to_break_param_rule(self, bundled_index):
        idx = bundled_index("source_to_break")
        src = node_id(idx, "location.hash")
        call = invocation(idx, "callbacks[0](userInput)").node
        g = build_flow_graph(idx, GraphOptions(extended={"param"}, unresolved=unresolved_calls(idx).filtered))
        assert call in g.reachable([src])

    def test_break_to_sink(self, bundled_index):
        idx = bundled_index("break_to_sink")
        (sink,) = [a for a in load_annotations(bundled_fixture("break_to_sink") / "annotation.json")]
        _, k = sink.bind(idx)
        g = build_flow_graph(idx, GraphOptions(extended=True, unresolved=unresolved_calls(idx).filtered))
        back = g.reachable([k], "backward")
        assert unresolved_calls(idx).filtered & back


class TestReachability:
    def test_empty_seeds(self):
        assert reachable(FlowGraph(3, [FlowEdge(0, 1, "intra")]), []) == set()

    def test_chain(self):
        g = FlowGraph(3, [FlowEdge(0, 1, "intra"), FlowEdge(1, 2, "intra")])
        assert reachable(g, [0]) == {0, 1, 2}
        assert reachable(g, [2], "backward") == {0, 1, 2}

    def test_store_then_load_returns_to_depth_zero(self):
        g = FlowGraph(3, [FlowEdge(0, 1, "intra", "store"), FlowEdge(1, 2, "intra", "load")])
        assert g.sinks_reached([0], [1, 2]) == {2}

    def test_access_path_budget(self):
        edges = [FlowEdge(i, i + 1, "intra", "store") for i in range(3)]
        edges += [FlowEdge(i, i + 1, "intra", "load") for i in range(3, 6)]
        assert FlowGraph(7, edges, 2).sinks_reached([0], [6]) == set()
        assert FlowGraph(7, edges, 3).sinks_reached([0], [6]) == {6}

    def test_barrier_blocks_entry(self):
        g = FlowGraph(3, [FlowEdge(0, 1, "intra"), FlowEdge(1, 2, "intra")])
        assert reachable(g, [0], barriers=[1]) == {0}

    def test_bad_direction(self):
        with pytest.raises(ValueError):
            FlowGraph(1, []).reachable([0], "sideways")


def _fixture_graphs():
    for name in bundled_fixtures():
        yield pytest.param(name, id=name)


@pytest.mark.parametrize("name", list(_fixture_graphs()))
@pytest.mark.parametrize("extended", [False, True])
def test_reachable_matches_closure_oracle(name, extended, bundled_index):
    idx = bundled_index(name)
    g = build_flow_graph(idx, GraphOptions(extended=extended, unresolved=unresolved_calls(idx).filtered))
    assert g.n_nodes <= 200 or name == "mrk_like"
    seeds_list = [[n] for n in range(0, g.n_nodes, max(1, g.n_nodes // 12))]
    for seeds in seeds_list:
        for direction in ("forward", "backward"):
            assert g.reachable(seeds, direction) == closure_reachable(g.n_nodes, g.edges, seeds, g.limit, direction)
        assert g.sinks_reached(seeds, range(g.n_nodes)) == sink_states_reached(g.n_nodes, g.edges, seeds, range(g.n_nodes), g.limit)


def test_reachable_matches_oracle_on_mrk_sources(bundled_index):
    idx = bundled_index("mrk_like")
    g = build_flow_graph(idx, GraphOptions(extended=True, unresolved=unresolved_calls(idx).filtered, access_path_limit=3))
    seeds = [node_id(idx, "input", "parameter")]
    assert g.reachable(seeds) == closure_reachable(g.n_nodes, g.edges, seeds, 3)


@st.composite
def random_graphs(draw):
    n = draw(st.integers(1, 12))
    edges = draw(
        st.lists(
            st.builds(
                FlowEdge,
                st.integers(0, n - 1),
                st.integers(0, n - 1),
                st.sampled_from(["intra", "call-arg", "param"]),
                st.sampled_from(["plain", "store", "load"]),
            ),
            max_size=30,
        )
    )
    limit = draw(st.integers(0, 3))
    seeds = draw(st.sets(st.integers(0, n - 1), max_size=3))
    barriers = draw(st.sets(st.integers(0, n - 1), max_size=2))
    return n, edges, limit, seeds, barriers


@settings(max_examples=300, deadline=None)
@given(random_graphs())
def test_reachable_matches_oracle_on_random_graphs(case):
    n, edges, limit, seeds, barriers = case
    g = FlowGraph(n, edges, limit)
    for direction in ("forward", "backward"):
        assert g.reachable(seeds, direction, barriers) == closure_reachable(n, edges, seeds, limit, direction, barriers)
    assert g.sinks_reached(seeds, range(n), barriers) == sink_states_reached(n, edges, seeds, range(n), limit, barriers)


@settings(max_examples=100, deadline=None)
@given(random_graphs(), st.integers(0, 11), st.integers(0, 11))
def test_adding_an_edge_never_shrinks(case, a, b):
    n, edges, limit, seeds, _ = case
    extra = FlowEdge(a % n, b % n, "asserted-edge")
    before = FlowGraph(n, edges, limit).reachable(seeds)
    after = FlowGraph(n, edges + [extra], limit).reachable(seeds)
    assert before <= after


@pytest.mark.parametrize("rule", sorted(ALL_RULES))
def test_rule_isolation(rule, bundled_index):
    name = "rule_" + rule.replace("-", "_")
    idx = bundled_index(name)
    (ann,) = load_annotations(bundled_fixture(name) / "annotation.json")
    s, k = ann.bind(idx)
    M = unresolved_calls(idx).filtered
    on = build_flow_graph(idx, GraphOptions(extended=True, unresolved=M))
    off = build_flow_graph(idx, GraphOptions(extended=ALL_RULES - {rule}, unresolved=M))
    assert on.sinks_reached([s], [k]) == {k}
    assert off.sinks_reached([s], [k]) == set()
