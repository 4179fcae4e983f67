"""Bundled fixture corpus and the synthetic fixture generator.

Each generated package plants one vulnerable source-to-sink path behind a
specific call-graph break.  ``annotation.json`` holds the ground truth and
``fixture.json`` records the planted break invocations, so tests can check
candidate selection against what was planted.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

PATTERNS = (
    "iife-factory",
    "enum-dispatch",
    "closure-callback",
    "computed-dispatch",
    "third-party-renderer",
    "off-path-noise",
)
EXPECTED_RULESET = {
    "iife-factory": "R4",
    "enum-dispatch": "R2",
    "closure-callback": "R2",
    "computed-dispatch": "R4",
    "third-party-renderer": "R2",
    "off-path-noise": "R2",
}
BROWSER_SOURCES = ("location.hash", "location.search", "window.location.hash", "window.location.search")
NOUNS = ("title", "label", "note", "badge", "status", "caption", "summary", "banner", "tag", "hint")
VERBS = ("render", "show", "paint", "draw", "emit", "format", "present", "display")


def fixtures_root() -> Path:
    return Path(str(resources.files("jstaint") / "data" / "fixtures"))


def bundled_fixture(name: str) -> Path:
    path = fixtures_root() / name
    if not path.is_dir():
        raise KeyError(f"no bundled fixture named {name!r}")
    return path


def bundled_fixtures() -> list[str]:
    return sorted(p.name for p in fixtures_root().iterdir() if (p / "annotation.json").exists())


@dataclass(frozen=True)
class Marker:
    """A snippet located by text search; ``nth`` counts occurrences."""

    file: str
    snippet: str
    nth: int = 0

    def locate(self, files: dict[str, str]) -> dict:
        text = files[self.file]
        pos = -1
        for _ in range(self.nth + 1):
            pos = text.index(self.snippet, pos + 1)
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        return {"file": self.file, "line": line, "col": col, "snippet": self.snippet}


@dataclass
class Plan:
    files: dict[str, str]
    cwe: str
    source: Marker
    sink: Marker
    breaks: list[Marker]
    notes: str


@dataclass(frozen=True)
class GeneratedFixture:
    path: Path
    pattern: str
    seed: int
    annotation: dict
    planted_breaks: list[dict]
    expected_ruleset: str


def _names(rng: random.Random, pool, k: int) -> list[str]:
    return rng.sample(list(pool), k)


def _enum_dispatch(rng: random.Random) -> Plan:
    kinds = _names(rng, ("TEXT", "HTML", "LINK", "CODE", "QUOTE", "EMPHASIS"), rng.randint(2, 4))
    hot = rng.choice(kinds)
    src = rng.choice(BROWSER_SOURCES)
    verb = rng.choice(VERBS)
    lines = ["const Kind = {"]
    lines += [f'  {k}: "{k.lower()}",' for k in kinds]
    lines += ["};", "", "const renderers = {};"]
    for k in kinds:
        if k == hot:
            lines.append(f"renderers[Kind.{k}] = function (el, v) {{ el.innerHTML = v; }};")
        else:
            lines.append(f"renderers[Kind.{k}] = function (el, v) {{ el.textContent = v; }};")
    lines += [
        "",
        f"function {verb}(kind, el, v) {{",
        "  renderers[kind](el, v);",
        "}",
        "",
        'const el = document.getElementById("out");',
        f"{verb}(Kind.{hot}, el, {src});",
        "",
    ]
    text = "\n".join(lines)
    return Plan(
        {"app.js": text},
        "79",
        Marker("app.js", src),
        Marker("app.js", "v", _nth(text, "v", "el.innerHTML = v")),
        [Marker("app.js", "renderers[kind](el, v)")],
        "markup renderer selected through an enum-keyed table",
    )


def _nth(text: str, snippet: str, anchor: str, offset: Optional[int] = None) -> int:
    """Occurrence number of ``snippet`` at the end of ``anchor``."""
    target = text.index(anchor) + (len(anchor) - len(snippet) if offset is None else offset)
    n, pos = 0, text.index(snippet)
    while pos != target:
        pos = text.index(snippet, pos + 1)
        n += 1
    return n


def _iife_factory(rng: random.Random) -> Plan:
    styles = _names(rng, ("bold", "italic", "code", "mark", "small", "strike"), rng.randint(2, 4))
    hot = rng.choice(styles)
    lib = rng.choice(("fmt", "style", "decorate", "wrap"))
    lines = [
        "function escapeHtml(s) {",
        '  return String(s).split("<").join("&lt;");',
        "}",
        "",
        "module.exports = (function () {",
        "  function factory() {",
        "    const formats = {};",
    ]
    for s in styles:
        if s == hot:
            lines.append(f"    formats.{s} = function (t) {{ return `<{s}>${{t}}</{s}>`; }};")
        else:
            lines.append(f"    formats.{s} = function (t) {{ return `<{s}>${{escapeHtml(t)}}</{s}>`; }};")
    lines += [
        f"    return function {lib}(style, input) {{",
        "      return formats[style](input);",
        "    };",
        "  }",
        "  return factory();",
        "})();",
        "",
    ]
    text = "\n".join(lines)
    anchor = f"formats.{hot} = function (t) {{ return `<{hot}>${{t"
    return Plan(
        {"index.js": text},
        "79",
        Marker("index.js", "input"),
        Marker("index.js", "t", _nth(text, "t", anchor)),
        [Marker("index.js", "formats[style](input)")],
        "exported formatter built by a factory inside an immediately invoked wrapper",
    )


def _closure_callback(rng: random.Random) -> Plan:
    noun = rng.choice(NOUNS)
    src = rng.choice(BROWSER_SOURCES)
    bus = rng.choice(("bus", "hub", "channel", "events"))
    lines = [
        "function createBus() {",
        "  const listeners = [];",
        "  return {",
        "    on: function (l) { listeners.push(l); },",
        "    emit: function (v) { for (const l of listeners) { l(v); } }",
        "  };",
        "}",
        "",
        f"const {bus} = createBus();",
        f'const el = document.getElementById("{noun}");',
        f"{bus}.on(function ({noun}) {{ el.innerHTML = {noun}; }});",
        f"{bus}.emit({src});",
        "",
    ]
    text = "\n".join(lines)
    return Plan(
        {"app.js": text},
        "79",
        Marker("app.js", src),
        Marker("app.js", noun, _nth(text, noun, f"el.innerHTML = {noun}")),
        [Marker("app.js", f"{bus}.emit({src})"), Marker("app.js", "l(v)")],
        "listener registered on an event bus and invoked through a closure",
    )


def _computed_dispatch(rng: random.Random) -> Plan:
    names = _names(rng, ("text", "code", "strong", "em", "del", "sup"), rng.randint(1, 3))
    entry = rng.choice(("linkify", "autolink", "toAnchor", "renderLink"))
    lines = [
        "function escapeHtml(s) {",
        '  return String(s).split("<").join("&lt;");',
        "}",
        "",
        "const htmlify = {",
    ]
    lines += [f"  {n}: (token) => `<{n}>${{escapeHtml(token.value)}}</{n}>`," for n in names]
    lines += [
        '  link: (token) => `<a href="${token.href}">${escapeHtml(token.value)}</a>`,',
        "};",
        "",
        "function render(tokens) {",
        '  let html = "";',
        "  for (const token of tokens) {",
        "    html += htmlify[token.name](token);",
        "  }",
        "  return html;",
        "}",
        "",
        f"function {entry}(input) {{",
        '  return render([{ name: "link", href: input, value: "link" }]);',
        "}",
        "",
        f"module.exports = {entry};",
        "",
    ]
    text = "\n".join(lines)
    return Plan(
        {"index.js": text},
        "79",
        Marker("index.js", "input"),
        Marker("index.js", "token.href"),
        [Marker("index.js", "htmlify[token.name](token)")],
        "token renderer looked up by its name property",
    )


def _third_party_renderer(rng: random.Random) -> Plan:
    lib = rng.choice(("mini-md", "tiny-mark", "md-lite"))
    target = rng.choice(("preview", "output", "view"))
    src = rng.choice(BROWSER_SOURCES)
    library = "\n".join(
        [
            "function escapeHtml(s) {",
            '  return String(s).split("<").join("&lt;").split(">").join("&gt;");',
            "}",
            "",
            "function Renderer() {",
            "  this.renderer = { rules: { text: function (tokens, idx) { return escapeHtml(tokens[idx].content); } } };",
            "}",
            "",
            "Renderer.prototype.use = function (plugin) {",
            "  plugin(this);",
            "  return this;",
            "};",
            "",
            "Renderer.prototype.render = function (src) {",
            '  const tokens = [{ type: "text", content: src }];',
            '  let out = "";',
            "  for (let idx = 0; idx < tokens.length; idx++) {",
            "    out += this.renderer.rules[tokens[idx].type](tokens, idx);",
            "  }",
            "  return out;",
            "};",
            "",
            "module.exports = function create() {",
            "  return new Renderer();",
            "};",
            "",
        ]
    )
    plugin = "\n".join(
        [
            "module.exports = function rawText(md) {",
            "  md.renderer.rules.text = function (tokens, idx) {",
            "    return tokens[idx].content;",
            "  };",
            "};",
            "",
        ]
    )
    app = "\n".join(
        [
            f'const markdown = require("{lib}");',
            'const rawText = require("./lib/raw-text");',
            "",
            "const md = markdown();",
            "md.use(rawText);",
            "",
            f'const {target} = document.getElementById("{target}");',
            f"const draft = {src};",
            f"{target}.innerHTML = md.render(draft);",
            "",
        ]
    )
    return Plan(
        {
            "app.js": app,
            "lib/raw-text.js": plugin,
            f"node_modules/{lib}/index.js": library,
            f"node_modules/{lib}/package.json": json.dumps({"name": lib, "version": "1.0.0", "main": "index.js"}) + "\n",
        },
        "79",
        Marker("app.js", src),
        Marker("app.js", "md.render(draft)"),
        [Marker("app.js", "md.render(draft)")],
        "plugin replaces the escaping text rule of a bundled markdown library",
    )


def _off_path_noise(rng: random.Random, noise: int) -> Plan:
    verb = rng.choice(VERBS)
    key = rng.choice(NOUNS)
    src = rng.choice(BROWSER_SOURCES)
    lines = [
        'const el = document.getElementById("out");',
        "const handlers = {};",
        f"handlers.{key} = function (v) {{ el.innerHTML = v; }};",
        "handlers.other = function (v) { el.textContent = v; };",
        "",
        f"function {verb}(name, value) {{",
        "  handlers[name](value);",
        "}",
        "",
        f'{verb}("{key}", {src});',
    ]
    for k in range(noise):
        lines.append(f'unknownFn{k}("c{k}");')
    lines.append("")
    text = "\n".join(lines)
    return Plan(
        {"app.js": text},
        "79",
        Marker("app.js", src),
        Marker("app.js", "v", _nth(text, "v", "el.innerHTML = v")),
        [Marker("app.js", "handlers[name](value)")],
        f"one handler-table break plus {noise} constant-argument calls to unknown functions",
    )


def plan_fixture(pattern: str, seed: int, noise: int = 0) -> Plan:
    if pattern not in PATTERNS:
        raise ValueError(f"unknown pattern {pattern!r}; expected one of {', '.join(PATTERNS)}")
    rng = random.Random(f"{pattern}:{seed}")
    if pattern == "off-path-noise":
        return _off_path_noise(rng, noise)
    return {
        "iife-factory": _iife_factory,
        "enum-dispatch": _enum_dispatch,
        "closure-callback": _closure_callback,
        "computed-dispatch": _computed_dispatch,
        "third-party-renderer": _third_party_renderer,
    }[pattern](rng)


def generate_fixture(pattern: str, seed: int, out: str | Path, noise: int = 50) -> GeneratedFixture:
    """Write a package for ``pattern`` under ``out``.  ``noise`` only
    applies to off-path-noise.  The same (pattern, seed, noise) always
    yields the same bytes."""
    plan = plan_fixture(pattern, seed, noise)
    root = Path(out)
    for rel, text in plan.files.items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    expected = EXPECTED_RULESET[pattern]
    annotation = {
        "finding_id": f"{pattern}-{seed}",
        "cwe": f"CWE-{plan.cwe}",
        "source": plan.source.locate(plan.files),
        "sink": plan.sink.locate(plan.files),
        "notes": plan.notes,
        "expected_ruleset": expected,
    }
    breaks = [m.locate(plan.files) for m in plan.breaks]
    (root / "annotation.json").write_text(json.dumps([annotation], indent=2) + "\n", encoding="utf-8")
    meta = {"pattern": pattern, "seed": seed, "noise": noise if pattern == "off-path-noise" else 0, "planted_breaks": breaks}
    (root / "fixture.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return GeneratedFixture(root, pattern, seed, annotation, breaks, expected)


def renderer_family(out: str | Path, calls: int = 25, flowing: int = 5) -> Path:
    """A package with ``calls`` third-party formatter calls, all fed from
    the source, of which ``flowing`` reach a markup sink."""
    if not 0 <= flowing <= calls:
        raise ValueError("flowing must be between 0 and calls")
    root = Path(out)
    lib = root / "node_modules" / "fmt-kit"
    lib.mkdir(parents=True, exist_ok=True)
    (lib / "package.json").write_text(json.dumps({"name": "fmt-kit", "version": "1.0.0", "main": "index.js"}) + "\n")
    body = ["module.exports = {"]
    body += [f"  fmt{k}: function (s) {{ return String(s); }}," for k in range(calls)]
    body += ["};", ""]
    (lib / "index.js").write_text("\n".join(body), encoding="utf-8")
    lines = [
        'const lib = require("fmt-kit");',
        "const src = location.hash;",
        "const kept = [];",
    ]
    for k in range(calls):
        if k < flowing:
            lines.append(f'const slot{k} = document.getElementById("slot{k}");')
            lines.append(f"slot{k}.innerHTML = lib.fmt{k}(src);")
        else:
            lines.append(f"kept.push(lib.fmt{k}(src));")
    lines.append("")
    (root / "app.js").write_text("\n".join(lines), encoding="utf-8")
    return root
