"""SARIF 2.1.0 subset writer.

Input is the alert records produced by ``Alert.to_record`` so that a
report can be re-emitted from stored alerts without the program index.
"""

from __future__ import annotations

import json
from typing import Optional

from .. import __version__
from ..cwe import UnknownCwe, load_cwe

SARIF_SCHEMA = "https://json.schemastore.org/sarif-2.1.0.json"
TOOL_NAME = "jstaint"


def _physical(loc: dict) -> dict:
    sl, sc, el, ec = loc["span"]
    return {
        "artifactLocation": {"uri": loc["file"]},
        "region": {"startLine": sl, "startColumn": sc, "endLine": el, "endColumn": ec, "snippet": {"text": loc["snippet"]}},
    }


def _rule(cwe: str) -> dict:
    try:
        ctx = load_cwe(cwe)
        name, text = ctx.name, ctx.description
    except UnknownCwe:
        name, text = f"CWE-{cwe}", f"CWE-{cwe}"
    return {"id": f"CWE-{cwe}", "name": name, "shortDescription": {"text": text}}


def _result(record: dict, include_filtered: bool) -> dict:
    flows = record["thread_flows"]
    if record["status"] == "active":
        flows = [f for f in flows if f["status"] == "active"]
    sink = record["sink"]
    first = flows[0]["locations"][0] if flows else sink
    result = {
        "ruleId": f"CWE-{record['cwe']}",
        "level": "error",
        "message": {"text": f"Untrusted data from `{first['snippet']}` reaches `{sink['snippet']}`."},
        "locations": [{"physicalLocation": _physical(sink)}],
        "codeFlows": [
            {
                "threadFlows": [
                    {
                        "locations": [
                            {"location": {"physicalLocation": _physical(loc), "message": {"text": loc["snippet"]}}}
                            for loc in flow["locations"]
                        ]
                    }
                    for flow in flows
                ]
            }
        ],
        "properties": {"summariesUsed": record.get("summaries_used", [])},
    }
    if record["status"] != "active":
        result["suppressions"] = [
            {"kind": "external", "justification": "every thread flow depends on a third-party edge classified as sanitizing"}
        ]
    return result


def emit_sarif(records: list[dict], include_filtered: bool = False, metadata: Optional[dict] = None) -> dict:
    chosen = [r for r in records if r["status"] == "active" or include_filtered]
    chosen.sort(key=lambda r: (r["cwe"], r["sink"]["file"], r["sink"]["span"], r["status"]))
    cwes = sorted({r["cwe"] for r in chosen} | set((metadata or {}).get("cwes", [])))
    run = {
        "tool": {"driver": {"name": TOOL_NAME, "version": __version__, "rules": [_rule(c) for c in cwes]}},
        "results": [_result(r, include_filtered) for r in chosen],
    }
    if metadata:
        run["properties"] = {k: v for k, v in sorted(metadata.items()) if k != "cwes"}
    return {"$schema": SARIF_SCHEMA, "version": "2.1.0", "runs": [run]}


def dumps_sarif(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
