"""Command-line entry point.

Settings resolve as flags over the ``--config`` file over built-in
defaults.  The config file is a flat JSON object whose keys are the long
flag names (dashes or underscores both accepted).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from .cwe import UnknownCwe, load_cwe
from .engine import RULESET_ORDER
from .fixtures import PATTERNS, generate_fixture
from .pipeline import (
    Layout,
    PipelineError,
    Settings,
    analyze,
    load_index,
    make_oracle,
    stage_ablate,
    stage_extract,
    stage_query,
    stage_report,
    stage_ticr,
)

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
PACKAGE_COMMANDS = ("analyze", "ablate", "extract-specs", "ticr", "query")


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON file of flag defaults")
    p.add_argument("--package", default=S, help="package directory to analyze")
    p.add_argument("--cwe", default=S, help="CWE id, e.g. 79 or CWE-79")
    p.add_argument("--ruleset", choices=RULESET_ORDER, default=S)
    p.add_argument("--oracle", choices=("deterministic", "remote"), default=S)
    p.add_argument("--runs", type=int, default=S, help="independent oracle runs per task")
    p.add_argument("--max-iterations", type=int, default=S, help="TICR iteration cap")
    p.add_argument("--exhaustive", action="store_true", default=S, help="resolve every unresolved call")
    p.add_argument("--access-path-limit", type=int, default=S)
    p.add_argument("--min-confidence", type=int, choices=range(1, 6), default=S)
    p.add_argument("--include-filtered", action="store_true", default=S, help="keep filtered alerts as suppressed results")
    p.add_argument("--dump-graph", action="store_true", default=S)
    p.add_argument("--out", default=S, help="output directory")
    p.add_argument("--specs-dir", default=S, help="directory of pre-existing specification CSVs")
    p.add_argument("--annotation", default=S, help="ground-truth annotation JSON")
    p.add_argument("--remote-endpoint", default=S)
    p.add_argument("--remote-model", default=S)
    p.add_argument("--api-key-env", default=S, help="environment variable holding the API key")
    p.add_argument("--max-tool-iterations", type=int, default=S)
    p.add_argument("--request-timeout", type=float, default=S)
    p.add_argument("--test-dirs", default=S, help="comma-separated directory names treated as tests")
    p.add_argument("--test-files", default=S, help="comma-separated filename globs treated as tests")
    p.add_argument("-v", "--verbose", action="store_true", default=False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jstaint", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("analyze", "run every stage end to end"),
        ("extract-specs", "discover sources and sinks"),
        ("ticr", "repair the call graph from stored specs"),
        ("query", "run the taint query and validate flow summaries"),
        ("report", "re-emit SARIF from stored alerts"),
        ("ablate", "attribute each annotated finding to its first detecting ruleset"),
    ):
        _common(sub.add_parser(name, help=help_))
    gen = sub.add_parser("generate-fixture", help="write a synthetic annotated package")
    gen.add_argument("--pattern", choices=PATTERNS, required=True)
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--noise", type=int, default=50, help="unknown calls added by off-path-noise")
    gen.add_argument("--out", required=True)
    return parser


def _config_values(path: str) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    known = set(Settings.keys())
    out = {}
    for key, value in data.items():
        name = key.lstrip("-").replace("-", "_")
        if name not in known:
            raise UsageError(f"unknown config key {key!r}")
        out[name] = value
    return out


def resolve_settings(ns: argparse.Namespace) -> Settings:
    values = vars(ns).copy()
    merged = _config_values(values.pop("config")) if "config" in values else {}
    merged.update({k: v for k, v in values.items() if k in Settings.keys()})
    settings = Settings(**merged)
    for key in ("runs", "max_iterations", "access_path_limit"):
        if not isinstance(getattr(settings, key), int):
            raise UsageError(f"{key} must be an integer")
    if str(settings.ruleset).upper() not in RULESET_ORDER:
        raise UsageError(f"unknown ruleset {settings.ruleset!r}")
    if settings.oracle not in ("deterministic", "remote"):
        raise UsageError(f"unknown oracle {settings.oracle!r}")
    try:
        load_cwe(settings.cwe)
    except (UnknownCwe, ValueError) as exc:
        raise UsageError(str(exc.args[0]) if exc.args else str(exc)) from None
    return settings


def _write_error(layout: Layout, record: dict) -> None:
    layout.root.mkdir(parents=True, exist_ok=True)
    (layout.root / "error.json").write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _run_stage(command: str, settings: Settings) -> dict:
    layout = Layout(Path(settings.out))
    layout.root.mkdir(parents=True, exist_ok=True)
    if command == "report":
        doc = stage_report(settings, layout)
        return {"results": len(doc["runs"][0]["results"]), "report": str(layout.report)}
    index = load_index(settings)
    if command == "ablate":
        if not settings.annotation:
            raise UsageError("ablate needs --annotation")
        rows = stage_ablate(settings, index, layout)
        return {"findings": len(rows), "ablation": str(layout.ablation)}
    oracle = make_oracle(settings, layout)
    if command == "extract-specs":
        specs = stage_extract(settings, index, oracle, layout)
        return {"sources": len(specs.sources), "sinks": len(specs.sinks)}
    if command == "ticr":
        report = stage_ticr(settings, index, oracle, layout)
        return {k: report[k] for k in ("mode", "iterations", "unresolved", "oracle_tasks", "auto_third")}
    records = stage_query(settings, index, oracle, layout)
    return {"alerts": sum(r["status"] == "active" for r in records), "filtered": sum(r["status"] != "active" for r in records)}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command == "generate-fixture":
        fx = generate_fixture(ns.pattern, ns.seed, ns.out, noise=ns.noise)
        print(json.dumps({"package": str(fx.path), "expected_ruleset": fx.expected_ruleset, "planted_breaks": fx.planted_breaks}))
        return EXIT_OK
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        settings = resolve_settings(ns)
        if ns.command in PACKAGE_COMMANDS:
            if not settings.package:
                raise UsageError("--package is required")
            if not Path(settings.package).is_dir():
                raise UsageError(f"package directory {settings.package} does not exist")
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(json.dumps({"error": "usage", "message": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    layout = Layout(Path(settings.out))
    try:
        if ns.command == "analyze":
            result = analyze(settings)
            summary = {"alerts": len(result.active), "filtered": len(result.records) - len(result.active)}
            summary["ticr_iterations"] = result.ticr["iterations"]
            summary["report"] = str(layout.report)
            if result.grades:
                summary["grades"] = result.grades
        else:
            try:
                summary = _run_stage(ns.command, settings)
            except UsageError:
                raise
            except Exception as exc:  # recorded like an analyze stage failure
                raise PipelineError(ns.command, exc) from exc
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(json.dumps({"error": "usage", "message": str(exc)}), file=sys.stderr)
        return EXIT_USAGE
    except PipelineError as exc:
        _write_error(layout, exc.record())
        print(json.dumps(exc.record()), file=sys.stderr)
        return EXIT_FAILURE
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
