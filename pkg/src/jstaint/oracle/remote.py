"""Chat-completions backend with tool calling, over httpx.

Speaks the widely deployed ``/chat/completions`` wire format: the model
answers with ``tool_calls``, each call is executed against the toolbelt and
its result returned as a ``tool`` message, until a completion tool runs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from typing import Optional

import httpx

from ..index import snippet_label
from .rubrics import SYSTEM, user_prompt
from .toolbelt import COMPLETION_TOOLS, ToolError, Toolbelt, tool_schemas
from .types import BackendUnavailable, OracleFailure, ResolutionTask, SummaryTask


@dataclass(frozen=True)
class RemoteConfig:
    endpoint: str
    model: str
    api_key_env: str = "OPENAI_API_KEY"
    max_iterations: int = 40
    timeout: float = 120.0
    temperature: Optional[float] = None

    @classmethod
    def from_dict(cls, data: dict) -> "RemoteConfig":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)


class RemoteBackend:
    name = "remote"

    def __init__(self, config: RemoteConfig, transport: Optional[httpx.BaseTransport] = None) -> None:
        self.config = config
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(config.api_key_env, "")
        if key:
            headers["Authorization"] = f"Bearer {key}"
        self._client = httpx.Client(timeout=config.timeout, headers=headers, transport=transport)

    def close(self) -> None:
        self._client.close()

    def _url(self) -> str:
        base = self.config.endpoint.rstrip("/")
        return base if base.endswith("/chat/completions") else base + "/chat/completions"

    def _post(self, body: dict) -> dict:
        try:
            resp = self._client.post(self._url(), json=body)
            resp.raise_for_status()
            return resp.json()
        except (httpx.HTTPError, ValueError) as exc:
            raise BackendUnavailable(f"{type(exc).__name__}: {exc}") from exc

    @staticmethod
    def prompt(role: str, tb: Toolbelt, payload) -> str:
        if role == "source_sink":
            files = sorted(p for p in tb.index.files)
            return user_prompt(role, weakness=tb.cwe.render() if tb.cwe else "", package_files=", ".join(files))
        if role == "callgraph":
            task: ResolutionTask = payload
            flow = tb.index.node(task.invocation)
            entries = len(tb.index.functions)
            return user_prompt(
                role,
                call_site=f"source/{flow.file}:{flow.span[0]}:{flow.span[1]}",
                call_expression=snippet_label(task.snippet),
                callee=task.callee_name,
                function_index_size=entries,
            )
        summary: SummaryTask = payload
        flow = tb.index.node(summary.invocation)
        return user_prompt(
            role,
            weakness=tb.cwe.render() if tb.cwe else summary.cwe,
            call_site=f"source/{flow.file}:{flow.span[0]}:{flow.span[1]}",
            call_expression=snippet_label(summary.snippet),
            library=summary.library,
        )

    def run(self, role: str, tb: Toolbelt, payload) -> None:
        tools = [{"type": "function", "function": t} for t in tool_schemas(role)]
        messages: list[dict] = [
            {"role": "system", "content": SYSTEM[role]},
            {"role": "user", "content": self.prompt(role, tb, payload)},
        ]
        rejected = 0
        for _ in range(self.config.max_iterations):
            body = {"model": self.config.model, "messages": messages, "tools": tools}
            if self.config.temperature is not None:
                body["temperature"] = self.config.temperature
            reply = self._post(body)
            tb.transcript.tokens += int((reply.get("usage") or {}).get("total_tokens", 0))
            try:
                message = reply["choices"][0]["message"]
            except (KeyError, IndexError, TypeError):
                raise OracleFailure("response without a message") from None
            calls = message.get("tool_calls") or []
            if not calls:
                raise OracleFailure(f"model stopped without calling {COMPLETION_TOOLS[role]}")
            messages.append({"role": "assistant", "content": message.get("content"), "tool_calls": calls})
            for call in calls:
                fn = call.get("function") or {}
                name = fn.get("name", "")
                try:
                    args = json.loads(fn.get("arguments") or "{}")
                    if not isinstance(args, dict):
                        raise ToolError(f"arguments for {name} must be a JSON object")
                    result = tb.dispatch(name, args)
                except (ToolError, json.JSONDecodeError) as exc:
                    if isinstance(exc, json.JSONDecodeError):
                        tb.transcript.record(name, {"raw": fn.get("arguments")}, {"error": str(exc)})
                    rejected += 1
                    if rejected > 1:
                        raise OracleFailure(f"malformed tool call rejected twice: {exc}") from None
                    result = {"error": f"{exc}; fix the arguments and retry"}
                messages.append({"role": "tool", "tool_call_id": call.get("id", ""), "content": json.dumps(result, sort_keys=True)})
                if tb.completed:
                    return
        raise OracleFailure(f"iteration cap of {self.config.max_iterations} reached")
