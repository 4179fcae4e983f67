"""Stage functions over a fixed output directory layout.

    <out>/specs/        sources.csv sinks.csv calledges.csv rejections.jsonl ticr.json
    <out>/transcripts/  one JSON document per oracle run
    <out>/graph/        nodes.jsonl edges.tsv (with --dump-graph)
    <out>/alerts/       alerts.json calledges.csv summaries/edge-<id>.json grading.json
    <out>/report.sarif.json
    <out>/ablation.csv

Every stage reads only files written by earlier stages, so running the
stages one by one gives the same bytes as one ``analyze`` call.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from .cwe import load_cwe, normalize_cwe
from .engine import (
    ablate,
    best_match,
    dumps_sarif,
    emit_sarif,
    ignore_edges,
    load_annotations,
    render_ablation,
    run_query,
    validate_summaries,
)
from .flowgraph import DEFAULT_ACCESS_PATH_LIMIT, unresolved_calls
from .index import DEFAULT_TEST_DIRS, DEFAULT_TEST_FILES, ProgramIndex, TestDirRule, build_program_index
from .oracle import DeterministicBackend, Oracle, RemoteBackend, RemoteConfig
from .specs import TaintSpecs, export_csv, import_csv, merge_call_edges, render_edges, validate_facts
from .ticr import DEFAULT_MAX_ITERATIONS, exhaustive_resolve, run_ticr

log = logging.getLogger(__name__)


class StaleArtifacts(RuntimeError):
    """A stage input is older than the file it was derived from."""


class PipelineError(RuntimeError):
    def __init__(self, stage: str, exc: BaseException) -> None:
        super().__init__(f"{stage}: {type(exc).__name__}: {exc}")
        self.stage = stage
        self.cause = exc

    def record(self) -> dict:
        return {"stage": self.stage, "error": type(self.cause).__name__, "message": str(self.cause)}


@dataclass
class Settings:
    package: str = ""
    cwe: str = "79"
    ruleset: str = "R4"
    oracle: str = "deterministic"
    runs: int = 3
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    exhaustive: bool = False
    access_path_limit: int = DEFAULT_ACCESS_PATH_LIMIT
    min_confidence: Optional[int] = None
    include_filtered: bool = False
    dump_graph: bool = False
    out: str = "out"
    specs_dir: Optional[str] = None
    annotation: Optional[str] = None
    remote_endpoint: str = "https://api.openai.com/v1"
    remote_model: str = "gpt-4o"
    api_key_env: str = "OPENAI_API_KEY"
    max_tool_iterations: int = 40
    request_timeout: float = 120.0
    test_dirs: str = ",".join(DEFAULT_TEST_DIRS)
    test_files: str = ",".join(DEFAULT_TEST_FILES)

    @classmethod
    def keys(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass
class Layout:
    root: Path

    @property
    def specs(self) -> Path:
        return self.root / "specs"

    @property
    def transcripts(self) -> Path:
        return self.root / "transcripts"

    @property
    def graph(self) -> Path:
        return self.root / "graph"

    @property
    def alerts(self) -> Path:
        return self.root / "alerts"

    @property
    def report(self) -> Path:
        return self.root / "report.sarif.json"

    @property
    def ablation(self) -> Path:
        return self.root / "ablation.csv"


# stage inputs and their declared upstream files
UPSTREAM = {
    "specs/calledges.csv": "specs/sources.csv",
    "alerts/alerts.json": "specs/calledges.csv",
}


def check_fresh(layout: Layout, relpath: str) -> None:
    path = layout.root / relpath
    if not path.exists():
        raise FileNotFoundError(f"{path} is missing; run the upstream stage first")
    upstream = UPSTREAM.get(relpath)
    if upstream is None:
        return
    up = layout.root / upstream
    if up.exists() and path.stat().st_mtime_ns < up.stat().st_mtime_ns:
        raise StaleArtifacts(f"{relpath} predates its upstream {upstream}; rerun the stage that writes it")


def make_oracle(settings: Settings, layout: Optional[Layout], transport=None) -> Oracle:
    if settings.oracle == "deterministic":
        backend = DeterministicBackend()
    elif settings.oracle == "remote":
        backend = RemoteBackend(
            RemoteConfig(
                settings.remote_endpoint,
                settings.remote_model,
                settings.api_key_env,
                settings.max_tool_iterations,
                settings.request_timeout,
            ),
            transport=transport,
        )
    else:
        raise ValueError(f"unknown oracle {settings.oracle!r}")
    return Oracle(
        backend,
        runs=settings.runs,
        transcript_dir=layout.transcripts if layout is not None else None,
        cwe=load_cwe(settings.cwe),
    )


def load_index(settings: Settings) -> ProgramIndex:
    root = Path(settings.package)
    if not root.is_dir():
        raise FileNotFoundError(f"package directory {root} does not exist")
    return build_program_index(root, test_rule=TestDirRule(_names(settings.test_dirs), _names(settings.test_files)))


def _names(value) -> list[str]:
    # config files may give a list, flags give a comma-separated string
    items = value if isinstance(value, (list, tuple)) else str(value).split(",")
    return [i.strip() for i in items if i.strip()]


def _merge_endpoints(*groups) -> list:
    best: dict[str, object] = {}
    for group in groups:
        for fact in group:
            cur = best.get(fact.loc.key())
            if cur is None or fact.confidence > cur.confidence:
                best[fact.loc.key()] = fact
    ordered = sorted(best.values(), key=lambda f: f.loc)
    return [type(f)(i, f.loc, f.confidence) for i, f in enumerate(ordered, start=1)]


# stages -----------------------------------------------------------------------------------

def stage_extract(settings: Settings, index: ProgramIndex, oracle: Oracle, layout: Layout) -> TaintSpecs:
    """Source/sink discovery, merged with any pre-existing specs."""
    sources, sinks = oracle.run_source_sink(index)
    prior = import_csv(settings.specs_dir) if settings.specs_dir else TaintSpecs()
    edges, conflicts = merge_call_edges(prior.edges, [])
    specs = TaintSpecs(
        tuple(_merge_endpoints(prior.sources, sources)),
        tuple(_merge_endpoints(prior.sinks, sinks)),
        tuple(edges),
    )
    export_csv(layout.specs, specs.sources, specs.sinks, specs.edges)
    validated = validate_facts(specs.sources, specs.sinks, specs.edges, index, settings.min_confidence)
    validated.rejections.extend(conflicts)
    validated.write_rejections(layout.specs / "rejections.jsonl")
    return specs


def read_specs(layout: Layout) -> TaintSpecs:
    return import_csv(layout.specs)


def stage_ticr(settings: Settings, index: ProgramIndex, oracle: Oracle, layout: Layout) -> dict:
    specs = read_specs(layout)
    validated = validate_facts(specs.sources, specs.sinks, specs.edges, index, settings.min_confidence)
    first_id = max((e.id for e in specs.edges), default=0) + 1
    if settings.exhaustive:
        state = exhaustive_resolve(index, unresolved_calls(index).filtered, oracle, first_id)
    else:
        state = run_ticr(
            index,
            validated,
            oracle,
            max_iterations=settings.max_iterations,
            access_path_limit=settings.access_path_limit,
        )
    edges, conflicts = merge_call_edges(specs.edges, state.resolved_edges)
    export_csv(layout.specs, specs.sources, specs.sinks, edges)
    report = {
        "mode": "exhaustive" if settings.exhaustive else "ticr",
        "iterations": state.iteration,
        "unresolved": len(unresolved_calls(index).filtered),
        "oracle_tasks": state.oracle_tasks,
        "auto_third": state.auto_third,
        "log": state.log,
        "candidates": [[index.node(i).label for i in batch] for batch in state.candidates_history],
        "ignored": [
            {"call": index.node(i).label, "file": index.node(i).file, "span": list(index.node(i).span), "reason": r}
            for i, r in sorted(state.ignored.items())
        ],
        "conflicts": [c.to_dict() for c in conflicts],
    }
    (layout.specs / "ticr.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    with open(layout.root / "analysis.log", "a", encoding="utf-8") as fh:
        for rec in state.log:
            fh.write(json.dumps({"stage": report["mode"], **rec}, sort_keys=True) + "\n")
    return report


def stage_query(settings: Settings, index: ProgramIndex, oracle: Optional[Oracle], layout: Layout) -> list[dict]:
    check_fresh(layout, "specs/calledges.csv")
    specs = read_specs(layout)
    validated = validate_facts(specs.sources, specs.sinks, specs.edges, index, settings.min_confidence)
    cwe = normalize_cwe(settings.cwe)
    result = run_query(index, cwe, settings.ruleset, validated, settings.access_path_limit)
    edges = list(specs.edges)
    docs: list[dict] = []
    if oracle is not None and result.ruleset.enhanced:
        outcome = validate_summaries(result.alerts, index, validated, oracle, cwe)
        edges = ignore_edges(edges, outcome.ignored_edges)
        docs = outcome.documents()
    layout.alerts.mkdir(parents=True, exist_ok=True)
    summaries = layout.alerts / "summaries"
    summaries.mkdir(exist_ok=True)
    for doc in docs:
        (summaries / f"edge-{doc['edge_id']}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    (layout.alerts / "calledges.csv").write_bytes(render_edges(edges))
    if settings.dump_graph:
        layout.graph.mkdir(parents=True, exist_ok=True)
        index.dump(layout.graph / "nodes.jsonl")
        result.graph.dump(layout.graph / "edges.tsv")
    records = [a.to_record(index) for a in result.alerts]
    doc = {"cwe": cwe, "ruleset": result.ruleset.name, "alerts": records}
    (layout.alerts / "alerts.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    if settings.annotation:
        grade_alerts(settings, index, result.alerts, layout)
    return records


def grade_alerts(settings: Settings, index: ProgramIndex, alerts, layout: Layout) -> list[dict]:
    grades = [
        {"finding_id": a.finding_id, "match": best_match(alerts, a, index)}
        for a in load_annotations(settings.annotation)
        if a.cwe == normalize_cwe(settings.cwe)
    ]
    (layout.alerts / "grading.json").write_text(json.dumps(grades, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return grades


def stage_report(settings: Settings, layout: Layout) -> dict:
    check_fresh(layout, "alerts/alerts.json")
    stored = json.loads((layout.alerts / "alerts.json").read_text(encoding="utf-8"))
    doc = emit_sarif(
        stored["alerts"],
        include_filtered=settings.include_filtered,
        metadata={"cwes": [stored["cwe"]], "ruleset": stored["ruleset"]},
    )
    layout.report.write_text(dumps_sarif(doc), encoding="utf-8")
    return doc


def stage_ablate(settings: Settings, index: ProgramIndex, layout: Layout):
    specs = read_specs(layout)
    validated = validate_facts(specs.sources, specs.sinks, specs.edges, index, settings.min_confidence)
    rows = ablate(index, load_annotations(settings.annotation), validated, settings.access_path_limit)
    layout.ablation.write_text(render_ablation(rows), encoding="utf-8")
    return rows


@dataclass
class AnalysisResult:
    records: list[dict]
    report: dict
    ticr: dict
    oracle: Oracle
    layout: Layout
    grades: list[dict] = field(default_factory=list)

    @property
    def active(self) -> list[dict]:
        return [r for r in self.records if r["status"] == "active"]


def analyze(settings: Settings, transport=None) -> AnalysisResult:
    layout = Layout(Path(settings.out))
    layout.root.mkdir(parents=True, exist_ok=True)
    stage = "index"
    try:
        index = load_index(settings)
        stage = "extract"
        oracle = make_oracle(settings, layout, transport)
        stage_extract(settings, index, oracle, layout)
        stage = "ticr"
        ticr = stage_ticr(settings, index, oracle, layout)
        stage = "query"
        records = stage_query(settings, index, oracle, layout)
        stage = "report"
        report = stage_report(settings, layout)
    except Exception as exc:  # every failure becomes an error record
        raise PipelineError(stage, exc) from exc
    grades = []
    if settings.annotation:
        grades = json.loads((layout.alerts / "grading.json").read_text(encoding="utf-8"))
    return AnalysisResult(records, report, ticr, oracle, layout, grades)
