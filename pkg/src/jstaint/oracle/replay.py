"""Backends that re-issue recorded tool calls.

Replaying a transcript through a fresh toolbelt reproduces its proposals,
which is how recorded sessions are checked to aggregate the same way.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from .toolbelt import ToolError, Toolbelt
from .types import OracleFailure

Session = list[tuple[str, dict]]


class ReplayBackend:
    """Sessions keyed by (role, task id, run).  A session marked failed, or
    a key with no session, yields a failed run."""

    name = "replay"

    def __init__(self, sessions: dict[tuple[str, str, int], Session | None]) -> None:
        self.sessions = sessions

    @classmethod
    def from_transcripts(cls, paths: Iterable[str | Path]) -> "ReplayBackend":
        sessions: dict[tuple[str, str, int], Session | None] = {}
        for path in paths:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
            key = (doc["role"], doc["task_id"], int(doc["run"]))
            if doc.get("status") != "ok":
                sessions[key] = None
            else:
                sessions[key] = [(c["name"], c["arguments"]) for c in doc["tool_calls"]]
        return cls(sessions)

    @classmethod
    def from_directory(cls, root: str | Path) -> "ReplayBackend":
        return cls.from_transcripts(sorted(Path(root).rglob("*.json")))

    def run(self, role: str, tb: Toolbelt, payload) -> None:
        key = (role, tb.transcript.task_id, tb.transcript.run)
        session = self.sessions.get(key)
        if session is None:
            raise OracleFailure(f"no recorded session for {key}")
        for name, args in session:
            try:
                tb.dispatch(name, args)
            except ToolError:
                continue
            if tb.completed:
                return


class ScriptedBackend:
    """Calls a function ``script(role, task_id, run, payload)`` returning a
    session; used to stage disagreeing runs in tests and demos."""

    name = "scripted"

    def __init__(self, script) -> None:
        self.script = script

    def run(self, role: str, tb: Toolbelt, payload) -> None:
        session = self.script(role, tb.transcript.task_id, tb.transcript.run, payload)
        if session is None:
            raise OracleFailure("scripted failure")
        ReplayBackend({(role, tb.transcript.task_id, tb.transcript.run): session}).run(role, tb, payload)
