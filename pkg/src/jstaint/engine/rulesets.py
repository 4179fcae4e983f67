"""The seven evaluation rulesets."""

from __future__ import annotations

from dataclasses import dataclass

ENDPOINT_MODES = ("base", "custom", "combined")
CALLGRAPH_MODES = ("base", "enhanced")


@dataclass(frozen=True)
class Ruleset:
    name: str
    sources_sinks: str
    callgraph: str
    barriers: bool

    @property
    def enhanced(self) -> bool:
        return self.callgraph == "enhanced"

    @property
    def uses_custom(self) -> bool:
        return self.sources_sinks in ("custom", "combined")

    @property
    def uses_base(self) -> bool:
        return self.sources_sinks in ("base", "combined")


RULESETS = {
    r.name: r
    for r in (
        Ruleset("R1", "base", "base", True),
        Ruleset("R2", "base", "enhanced", True),
        Ruleset("R3", "custom", "base", True),
        Ruleset("R4", "custom", "enhanced", True),
        Ruleset("R5", "combined", "base", True),
        Ruleset("R6", "combined", "enhanced", True),
        Ruleset("R7", "combined", "enhanced", False),
    )
}
RULESET_ORDER = tuple(RULESETS)


def get_ruleset(name: str) -> Ruleset:
    key = name.upper()
    if key not in RULESETS:
        raise ValueError(f"unknown ruleset {name!r}; choose one of {', '.join(RULESET_ORDER)}")
    return RULESETS[key]
