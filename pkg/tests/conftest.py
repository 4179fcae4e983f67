from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from jstaint.fixtures import bundled_fixture  # noqa: E402
from jstaint.index import build_program_index, index_from_sources  # noqa: E402
from jstaint.pipeline import Settings, analyze  # noqa: E402


@pytest.fixture
def fixture_path():
    return bundled_fixture


@pytest.fixture
def index_of():
    def make(sources: dict[str, str] | str):
        if isinstance(sources, str):
            sources = {"app.js": sources}
        return index_from_sources(sources)

    return make


@pytest.fixture
def run_analysis(tmp_path):
    def run(package, **overrides):
        out = tmp_path / overrides.pop("out_name", "out")
        settings = Settings(package=str(package), out=str(out), **overrides)
        return analyze(settings)

    return run


@pytest.fixture(scope="session")
def bundled_index():
    cache = {}

    def get(name: str):
        if name not in cache:
            cache[name] = build_program_index(bundled_fixture(name))
        return cache[name]

    return get


def pytest_terminal_summary(terminalreporter):
    from support import CRITERIA

    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
