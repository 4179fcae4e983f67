"""Internal flow-summary catalog (F_s).

Each entry says how taint moves through a call the engine models itself.
Unresolved calls matching an entry are dropped from the filtered
unresolved set and get ``summary-internal`` edges instead.

Flow kinds:

``preserve``        receiver and arguments flow to the result
``args``            arguments flow to the result
``load-receiver``   receiver elements flow to the result (one level down)
``store-receiver``  the receiver becomes an element of the result
``to-receiver``     arguments are stored into the receiver
``assign``          later arguments merge into the first; all flow to the result
``store-arg``       first argument becomes an element of the result
``arg``             first argument flows to the result
``none``            no taint flow
``module``          module import, wired separately
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ..frontend.ast import Node, call_callee, strip_parens

METHODS: dict[str, str] = {
    "trim": "preserve",
    "trimStart": "preserve",
    "trimEnd": "preserve",
    "slice": "preserve",
    "substring": "preserve",
    "substr": "preserve",
    "charAt": "preserve",
    "concat": "preserve",
    "toLowerCase": "preserve",
    "toUpperCase": "preserve",
    "replace": "preserve",
    "padStart": "preserve",
    "padEnd": "preserve",
    "toString": "preserve",
    "map": "preserve",
    "filter": "preserve",
    "join": "load-receiver",
    "split": "store-receiver",
    "push": "to-receiver",
    "unshift": "to-receiver",
    "indexOf": "none",
    "lastIndexOf": "none",
    "startsWith": "none",
    "endsWith": "none",
    "includes": "none",
    "hasOwnProperty": "none",
}

STATICS: dict[tuple[str, str], str] = {
    ("JSON", "stringify"): "args",
    ("JSON", "parse"): "args",
    ("Object", "assign"): "assign",
    ("Object", "entries"): "store-arg",
    ("Object", "values"): "arg",
    ("Object", "keys"): "none",
}

GLOBALS: dict[str, str] = {
    "require": "module",
    "String": "args",
    "decodeURIComponent": "args",
    "Number": "none",
    "parseInt": "none",
    "parseFloat": "none",
    "Boolean": "none",
}


@dataclass(frozen=True)
class SummaryEntry:
    name: str
    flow: str
    receiver: Optional[Node]


def lookup(call: Node, is_global) -> Optional[SummaryEntry]:
    """Match ``call`` against the catalog. ``is_global(ident)`` reports
    whether an identifier is an unshadowed global."""
    if call.kind != "Call":
        return None
    callee = strip_parens(call_callee(call))
    if callee.kind == "Ident":
        flow = GLOBALS.get(callee.value)
        if flow is not None and is_global(callee):
            return SummaryEntry(callee.value, flow, None)
        return None
    if callee.kind != "Member":
        return None
    base = strip_parens(callee.children[0])
    if base.kind == "Ident" and (base.value, callee.value) in STATICS and is_global(base):
        return SummaryEntry(f"{base.value}.{callee.value}", STATICS[(base.value, callee.value)], None)
    flow = METHODS.get(callee.value)
    if flow is not None:
        return SummaryEntry(callee.value, flow, callee.children[0])
    return None


def catalog_rows() -> list[tuple[str, str]]:
    """The whole table as (callee pattern, flow) rows, for documentation."""
    rows = [(f".{name}", flow) for name, flow in METHODS.items()]
    rows += [(f"{a}.{b}", flow) for (a, b), flow in STATICS.items()]
    rows += [(name, flow) for name, flow in GLOBALS.items()]
    return sorted(rows)
