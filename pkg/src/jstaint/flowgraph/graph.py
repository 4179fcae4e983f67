"""Flow graph container and depth-bounded reachability.

Taint states are ``(node, depth)`` pairs.  ``depth`` counts how many
property levels below the node's own value the taint sits: a store edge
pushes one level (``o.p = t`` taints ``o`` at depth 1), a load edge pops
one (``o.p`` read back at depth 0).  Loading from a wholly tainted value
(depth 0) stays at depth 0.  States deeper than the access-path limit are
dropped, which is what makes the limit observable.  Sources start at
depth 0 and sinks only count at depth 0.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

LABELS = (
    "intra",
    "call-arg",
    "call-return",
    "param",
    "object",
    "func-obj",
    "method",
    "asserted-edge",
    "candidate-summary",
    "summary-internal",
)
EXTENDED_LABELS = frozenset({"param", "object", "func-obj", "method"})
OPS = ("plain", "store", "load")

DEFAULT_ACCESS_PATH_LIMIT = 2


@dataclass(frozen=True, order=True)
class FlowEdge:
    src: int
    dst: int
    label: str
    op: str = "plain"

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise ValueError(f"unknown edge label {self.label!r}")
        if self.op not in OPS:
            raise ValueError(f"unknown edge op {self.op!r}")


class FlowGraph:
    """Directed multigraph over FlowNode ids.  Immutable once built."""

    def __init__(self, n_nodes: int, edges: Iterable[FlowEdge], access_path_limit: int = DEFAULT_ACCESS_PATH_LIMIT):
        if access_path_limit < 0:
            raise ValueError("access_path_limit must be non-negative")
        self.n_nodes = n_nodes
        self.limit = access_path_limit
        self.edges: tuple[FlowEdge, ...] = tuple(sorted(set(edges)))
        succ: list[list[tuple[int, str]]] = [[] for _ in range(n_nodes)]
        pred: list[list[tuple[int, str]]] = [[] for _ in range(n_nodes)]
        labels: dict[tuple[int, int], set[str]] = {}
        for e in self.edges:
            if not (0 <= e.src < n_nodes and 0 <= e.dst < n_nodes):
                raise ValueError(f"edge {e} references a node outside the graph")
            succ[e.src].append((e.dst, e.op))
            pred[e.dst].append((e.src, e.op))
            labels.setdefault((e.src, e.dst), set()).add(e.label)
        self._succ = [sorted(set(s)) for s in succ]
        self._pred = [sorted(set(p)) for p in pred]
        self._labels = labels

    # basic queries ----------------------------------------------------------

    def successors(self, node: int) -> list[tuple[int, str]]:
        return self._succ[node]

    def predecessors(self, node: int) -> list[tuple[int, str]]:
        return self._pred[node]

    def labels_between(self, src: int, dst: int) -> set[str]:
        return set(self._labels.get((src, dst), ()))

    def has_edge(self, src: int, dst: int) -> bool:
        return (src, dst) in self._labels

    def edges_with_label(self, label: str) -> list[FlowEdge]:
        return [e for e in self.edges if e.label == label]

    # state transitions --------------------------------------------------------

    def _forward(self, node: int, depth: int, barriers: frozenset[int]):
        for dst, op in self._succ[node]:
            if dst in barriers:
                continue
            if op == "plain":
                yield dst, depth
            elif op == "store":
                if depth < self.limit:
                    yield dst, depth + 1
            else:
                yield dst, depth - 1 if depth else 0

    def _backward(self, node: int, depth: int, barriers: frozenset[int]):
        for src, op in self._pred[node]:
            if src in barriers:
                continue
            if op == "plain":
                yield src, depth
            elif op == "store":
                if depth >= 1:
                    yield src, depth - 1
            else:
                if depth == 0:
                    yield src, 0
                if depth < self.limit:
                    yield src, depth + 1

    def _bfs(self, starts: Iterable[tuple[int, int]], step, barriers: frozenset[int]) -> dict[tuple[int, int], int]:
        dist: dict[tuple[int, int], int] = {}
        queue: deque[tuple[int, int]] = deque()
        for s in starts:
            if s not in dist:
                dist[s] = 0
                queue.append(s)
        while queue:
            state = queue.popleft()
            d = dist[state]
            for nxt in step(state[0], state[1], barriers):
                if nxt not in dist:
                    dist[nxt] = d + 1
                    queue.append(nxt)
        return dist

    def reachable_states(
        self, seeds: Iterable[int], direction: str = "forward", barriers: Iterable[int] = ()
    ) -> dict[tuple[int, int], int]:
        barriers = frozenset(barriers)
        starts = [(s, 0) for s in sorted(set(seeds))]
        for s, _ in starts:
            if not 0 <= s < self.n_nodes:
                raise ValueError(f"seed {s} is not a node of the graph")
        if direction == "forward":
            return self._bfs(starts, self._forward, barriers)
        if direction == "backward":
            return self._bfs(starts, self._backward, barriers)
        raise ValueError(f"direction must be forward or backward, not {direction!r}")

    def reachable(self, seeds: Iterable[int], direction: str = "forward", barriers: Iterable[int] = ()) -> set[int]:
        """Nodes reachable from ``seeds`` at any depth, seeds included."""
        return {node for node, _ in self.reachable_states(seeds, direction, barriers)}

    def sinks_reached(self, sources: Iterable[int], sinks: Iterable[int], barriers: Iterable[int] = ()) -> set[int]:
        states = self.reachable_states(sources, "forward", barriers)
        return {k for k in sinks if (k, 0) in states}

    # paths ----------------------------------------------------------------------

    def shortest_path(self, source: int, sink: int, barriers: Iterable[int] = ()) -> Optional[list[int]]:
        """Shortest state path from ``(source, 0)`` to ``(sink, 0)``; among
        equally short ones the lexicographically smallest node sequence."""
        barriers = frozenset(barriers)
        fwd = self._bfs([(source, 0)], self._forward, barriers)
        target = (sink, 0)
        if target not in fwd:
            return None
        length = fwd[target]
        bwd = self._bfs([target], self._backward, barriers)
        path = [source]
        frontier = {(source, 0)}
        for step in range(1, length + 1):
            options: dict[int, set[tuple[int, int]]] = {}
            for node, depth in frontier:
                for nxt in self._forward(node, depth, barriers):
                    if fwd.get(nxt) == step and bwd.get(nxt) == length - step:
                        options.setdefault(nxt[0], set()).add(nxt)
            best = min(options)
            path.append(best)
            frontier = options[best]
        return path

    def step_label(self, src: int, dst: int) -> str:
        """Preferred label for one path step; candidate summaries rank last."""
        labels = self._labels[(src, dst)]
        ranked = sorted(labels, key=lambda lab: (lab == "candidate-summary", LABELS.index(lab)))
        return ranked[0]

    def is_path(self, nodes: list[int]) -> bool:
        """Whether ``nodes`` is a depth-consistent walk ending at depth 0."""
        states = {(nodes[0], 0)}
        for nxt in nodes[1:]:
            states = {s for node, depth in states for s in self._forward(node, depth, frozenset()) if s[0] == nxt}
            if not states:
                return False
        return any(depth == 0 for _, depth in states)

    # export -------------------------------------------------------------------------

    def dump_lines(self) -> list[str]:
        return [f"{e.src}\t{e.dst}\t{e.label}\t{e.op}" for e in self.edges]

    def dump(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for line in self.dump_lines():
                fh.write(line + "\n")
