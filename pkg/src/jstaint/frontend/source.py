"""Source files and coordinate arithmetic.

Coordinates are 1-based for both line and column; columns count Unicode
scalar values (Python ``str`` indices), end coordinates are inclusive.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from pathlib import Path, PurePosixPath

Span = tuple[int, int, int, int]


def normalize_path(path: str | Path) -> str:
    text = str(path).replace("\\", "/")
    norm = str(PurePosixPath(text))
    return norm[2:] if norm.startswith("./") else norm


@dataclass(frozen=True)
class SourceFile:
    path: str
    text: str
    line_index: tuple[int, ...] = field(default=(), compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "path", normalize_path(self.path))
        if not self.line_index:
            starts = [0]
            for i, ch in enumerate(self.text):
                if ch == "\n":
                    starts.append(i + 1)
            object.__setattr__(self, "line_index", tuple(starts))

    @classmethod
    def read(cls, root: str | Path, path: str | Path) -> "SourceFile":
        root = Path(root)
        full = root / path
        return cls(normalize_path(full.relative_to(root)), full.read_text(encoding="utf-8"))

    def position(self, offset: int) -> tuple[int, int]:
        """Map a character offset to a 1-based (line, column)."""
        line = bisect.bisect_right(self.line_index, offset) - 1
        return line + 1, offset - self.line_index[line] + 1

    def offset(self, line: int, col: int) -> int:
        return self.line_index[line - 1] + col - 1

    def span(self, start: int, end: int) -> Span:
        """Inclusive span of the half-open character range ``[start, end)``."""
        sl, sc = self.position(start)
        el, ec = self.position(max(start, end - 1))
        return sl, sc, el, ec

    def slice(self, span: Span) -> str:
        sl, sc, el, ec = span
        return self.text[self.offset(sl, sc) : self.offset(el, ec) + 1]

    def line(self, number: int) -> str:
        start = self.line_index[number - 1]
        end = self.line_index[number] - 1 if number < len(self.line_index) else len(self.text)
        return self.text[start:end]

    @property
    def line_count(self) -> int:
        return len(self.line_index)
