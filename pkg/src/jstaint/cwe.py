"""CWE context documents bundled with the package."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

FIELDS = ("id", "name", "description", "consequences", "sources", "sinks")


class UnknownCwe(KeyError):
    pass


@dataclass(frozen=True)
class CweContext:
    id: str
    name: str
    description: str
    common_consequences: str
    source_notes: str
    sink_notes: str

    @property
    def rule_id(self) -> str:
        return f"CWE-{self.id}"

    def render(self) -> str:
        return (
            f"{self.rule_id}: {self.name}\n"
            f"Description: {self.description}\n"
            f"Common consequences: {self.common_consequences}\n"
            f"Typical sources: {self.source_notes}\n"
            f"Typical sinks: {self.sink_notes}\n"
        )


def normalize_cwe(cwe: str | int) -> str:
    text = str(cwe).strip().upper()
    return text[4:] if text.startswith("CWE-") else text


def parse_cwe_document(text: str) -> CweContext:
    values: dict[str, str] = {}
    for line in text.splitlines():
        if not line.strip():
            continue
        key, sep, value = line.partition(":")
        if not sep or key.strip() not in FIELDS:
            raise ValueError(f"bad CWE document line: {line!r}")
        values[key.strip()] = value.strip()
    missing = [f for f in FIELDS if f not in values]
    if missing:
        raise ValueError(f"CWE document lacks {', '.join(missing)}")
    return CweContext(
        values["id"], values["name"], values["description"], values["consequences"], values["sources"], values["sinks"]
    )


def available_cwes() -> list[str]:
    folder = resources.files("jstaint") / "data" / "cwe"
    ids = [p.name[4:-4] for p in folder.iterdir() if p.name.startswith("CWE-") and p.name.endswith(".txt")]
    return sorted(ids, key=int)


def load_cwe(cwe: str | int) -> CweContext:
    cid = normalize_cwe(cwe)
    doc = resources.files("jstaint") / "data" / "cwe" / f"CWE-{cid}.txt"
    if not doc.is_file():
        raise UnknownCwe(f"CWE-{cid} is not in the catalog")
    return parse_cwe_document(doc.read_text(encoding="utf-8"))


def data_lines(name: str) -> list[str]:
    """Non-comment lines of a bundled data file."""
    text = (resources.files("jstaint") / "data" / name).read_text(encoding="utf-8")
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
