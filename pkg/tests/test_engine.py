from __future__ import annotations

import json
from pathlib import Path

import pytest

from support import annotated_specs, annotation_of
from jstaint.engine import (
    ABLATION_HEADER,
    RULESET_ORDER,
    Alert,
    ThreadFlow,
    UnboundSpecs,
    ablate,
    best_match,
    dumps_sarif,
    emit_sarif,
    get_ruleset,
    load_annotations,
    match_ground_truth,
    render_ablation,
    run_query,
    validate_summaries,
)
from jstaint.fixtures import bundled_fixture, renderer_family
from jstaint.index import build_program_index
from jstaint.oracle import Oracle, ScriptedBackend
from jstaint.specs import import_csv, validate_facts

GOLDEN = Path(__file__).parent / "golden"

XSS = 'const el = document.getElementById("o"); el.innerHTML = location.hash;'
ESCAPED = 'function escapeHtml(s){ return s; } const el = document.getElementById("o"); el.innerHTML = escapeHtml(location.hash);'
UNRELATED = 'const a = location.hash; const el = document.getElementById("o"); el.innerHTML = "x";'


def no_specs(idx):
    return validate_facts([], [], [], idx)


def test_ruleset_table():
    table = {name: (r.sources_sinks, r.callgraph, r.barriers) for name, r in ((n, get_ruleset(n)) for n in RULESET_ORDER)}
    assert table == {
        "R1": ("base", "base", True),
        "R2": ("base", "enhanced", True),
        "R3": ("custom", "base", True),
        "R4": ("custom", "enhanced", True),
        "R5": ("combined", "base", True),
        "R6": ("combined", "enhanced", True),
        "R7": ("combined", "enhanced", False),
    }
    assert get_ruleset("r4").name == "R4"
    with pytest.raises(ValueError):
        get_ruleset("R8")


def test_direct_flow_is_reported(index_of):
    idx = index_of(XSS)
    (alert,) = run_query(idx, "79", "R1").active
    assert [idx.node(n).snippet for n in alert.flows[0].nodes] == ["location.hash"]


def test_barrier_blocks_all_but_r7(index_of):
    idx = index_of(ESCAPED)
    for name in RULESET_ORDER:
        alerts = run_query(idx, "79", name, no_specs(idx)).active
        assert len(alerts) == (1 if name == "R7" else 0), name


def test_disconnected_source_and_sink(index_of):
    idx = index_of(UNRELATED)
    result = run_query(idx, "79", "R7", no_specs(idx))
    assert result.sources and result.sinks and result.alerts == []


def test_custom_rulesets_need_specs(index_of):
    idx = index_of(XSS)
    for name in ("R2", "R3", "R4"):
        with pytest.raises(UnboundSpecs):
            run_query(idx, "79", name)


@pytest.mark.parametrize("name", ["mrk_like", "markdown_katex_like", "r3_direct", "exh_gap"])
def test_every_flow_is_a_graph_path(name, bundled_index):
    idx, ann = bundled_index(name), annotation_of(name)
    specs = annotated_specs(idx, ann)
    for rs in RULESET_ORDER:
        result = run_query(idx, ann.cwe, rs, specs)
        for alert in result.alerts:
            for flow in alert.flows:
                assert result.graph.is_path(flow.nodes)
                assert flow.nodes[0] in result.sources and flow.nodes[-1] == alert.sink


@pytest.mark.parametrize("name", ["markdown_katex_like", "r3_direct", "source_to_break"])
def test_rulesets_are_monotone(name, bundled_index):
    idx, ann = bundled_index(name), annotation_of(name)
    specs = annotated_specs(idx, ann)
    sinks = {rs: {a.sink for a in run_query(idx, ann.cwe, rs, specs).active} for rs in RULESET_ORDER}
    assert sinks["R1"] <= sinks["R5"] <= sinks["R6"] <= sinks["R7"]
    assert sinks["R3"] <= sinks["R4"] <= sinks["R6"]
    assert sinks["R1"] <= sinks["R2"] <= sinks["R6"]


# -- grading ------------------------------------------------------------------------------


def test_grading_categories(bundled_index):
    idx, ann = bundled_index("r3_direct"), annotation_of("r3_direct")
    s, k = ann.bind(idx)
    others = [n.id for n in idx.nodes if n.id not in (s, k)][:2]
    a, b = others

    def grade(nodes, cwe="79"):
        return match_ground_truth(Alert(cwe, nodes[-1], [ThreadFlow(nodes)]), ann, idx)

    assert grade([s, a, k]) == "exact"
    assert grade([b, s, k]) == "extended"
    assert grade([s, k, a]) == "extended"
    assert grade([b, k]) == "equivalent-review"
    assert grade([b, k], cwe="94") == "none"
    assert grade([a, b]) == "none"

    filtered = Alert("79", k, [ThreadFlow([s, k], status="filtered")], status="filtered")
    assert best_match([filtered], ann, idx) == "none"
    mixed = Alert("79", k, [ThreadFlow([s, k], status="filtered"), ThreadFlow([b, k])])
    assert match_ground_truth(mixed, ann, idx) == "equivalent-review"


# -- ablation -------------------------------------------------------------------------------


@pytest.mark.parametrize(
    "name, expected, limit",
    [("r3_direct", "R3", 2), ("rule_param", None, 2), ("source_to_break", None, 2)],
)
def test_ablation_first_ruleset(name, expected, limit, bundled_index):
    idx, ann = bundled_index(name), annotation_of(name)
    (row,) = ablate(idx, [ann], annotated_specs(idx, ann), limit)
    assert row.first_ruleset == expected
    assert row.match == ("exact" if expected else "none")
    if expected:
        earlier = RULESET_ORDER[: RULESET_ORDER.index(expected)]
        assert all(row.per_ruleset[r] not in ("exact", "extended") for r in earlier)


def test_ablation_after_ticr(run_analysis, fixture_path):
    path = fixture_path("mrk_like")
    res = run_analysis(path, access_path_limit=3, annotation=str(path / "annotation.json"))
    idx = build_program_index(path)
    specs = import_csv(res.layout.specs)
    validated = validate_facts(specs.sources, specs.sinks, specs.edges, idx)
    rows = ablate(idx, load_annotations(path / "annotation.json"), validated, 3)
    assert [(r.finding_id, r.first_ruleset) for r in rows] == [("mrk-link-href", "R4")]
    text = render_ablation(rows)
    header, line = text.splitlines()
    assert header.split(",") == list(ABLATION_HEADER)
    assert line.startswith("mrk-link-href,CWE-79,R4,exact,none,none,none,exact")


# -- flow-summary validation ------------------------------------------------------------------


def _family_query(tmp_path, run_analysis):
    pkg = tmp_path / "family"
    renderer_family(pkg, calls=25, flowing=5)
    res = run_analysis(pkg, ruleset="R2")
    idx = build_program_index(pkg)
    specs = import_csv(res.layout.specs)
    validated = validate_facts(specs.sources, specs.sinks, specs.edges, idx)
    return idx, validated, run_query(idx, "79", "R2", validated)


def _classify(votes):
    def script(role, task_id, run, payload):
        cls = votes[run - 1]
        if cls is None:
            return None
        return [("classify_edge", {"flow_trace": {"classification": cls, "confidence": 4, "steps": ["lib step"]}})]

    return Oracle(ScriptedBackend(script))


@pytest.mark.parametrize(
    "votes, kept",
    [
        (("sanitizes-taint", "sanitizes-taint", "propagates-taint"), False),
        (("propagates-taint", "sanitizes-taint", "propagates-taint"), True),
        (("unknown", "unknown", "unknown"), True),
        ((None, None, None), True),
    ],
)
def test_summary_verdicts(votes, kept, tmp_path, run_analysis):
    idx, validated, result = _family_query(tmp_path, run_analysis)
    assert len(result.active) == 5
    oracle = _classify(votes)
    outcome = validate_summaries(result.alerts, idx, validated, oracle, "79")
    assert outcome.tasks == 5
    assert oracle.task_counts["flowsummary"] == 5
    assert len([a for a in outcome.alerts if a.status == "active"]) == (5 if kept else 0)
    if votes[0] is None:
        assert len(outcome.errors) == 5
    docs = outcome.documents()
    assert [d["edge_id"] for d in docs] == sorted(d["edge_id"] for d in docs)


# -- SARIF -----------------------------------------------------------------------------------------


def test_sarif_without_results():
    doc = emit_sarif([], metadata={"cwes": ["79"], "ruleset": "R4"})
    (run,) = doc["runs"]
    assert doc["version"] == "2.1.0"
    assert run["results"] == []
    assert [r["id"] for r in run["tool"]["driver"]["rules"]] == ["CWE-79"]


def test_sarif_filtered_alerts_are_suppressed(index_of):
    idx = index_of(XSS)
    (alert,) = run_query(idx, "79", "R1").alerts
    record = alert.to_record(idx)
    record["status"] = "filtered"
    assert emit_sarif([record])["runs"][0]["results"] == []
    (res,) = emit_sarif([record], include_filtered=True)["runs"][0]["results"]
    assert res["suppressions"][0]["kind"] == "external"


def test_sarif_matches_golden(run_analysis, fixture_path):
    res = run_analysis(fixture_path("mrk_like"), access_path_limit=3)
    text = (res.layout.report).read_text(encoding="utf-8")
    assert text == dumps_sarif(res.report)
    assert text == (GOLDEN / "mrk_like.R4.sarif.json").read_text(encoding="utf-8")
    (result,) = json.loads(text)["runs"][0]["results"]
    region = result["locations"][0]["physicalLocation"]["region"]
    assert (region["startLine"], region["startColumn"]) == (79, 34)
