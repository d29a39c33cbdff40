"""Integer max flow (Dinic) and the canonical minimum cut."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Sequence

SOURCE = "s"
SINK = "t"


@dataclass(frozen=True)
class Arc:
    tail: Hashable
    head: Hashable
    capacity: int
    tag: str = ""


@dataclass(frozen=True)
class FlowNetwork:
    """Directed network with nonnegative integer capacities.

    ``nodes`` fixes the iteration order, which makes every result
    deterministic. ``labels`` optionally maps nodes to display names.
    """

    nodes: tuple
    arcs: tuple[Arc, ...]
    source: Hashable = SOURCE
    sink: Hashable = SINK
    labels: dict | None = None

    def __post_init__(self):
        known = set(self.nodes)
        if len(known) != len(self.nodes):
            raise ValueError("duplicate node in flow network")
        if self.source not in known or self.sink not in known:
            raise ValueError("source and sink must be nodes")
        for arc in self.arcs:
            if arc.tail not in known or arc.head not in known:
                raise ValueError(f"arc {arc.tail}->{arc.head} uses an unknown node")
            if not isinstance(arc.capacity, int) or arc.capacity < 0:
                raise ValueError(f"arc {arc.tail}->{arc.head} has invalid capacity {arc.capacity!r}")
            if arc.head == self.source or arc.tail == self.sink:
                raise ValueError("source must have no incoming and sink no outgoing arcs")

    def label(self, node) -> str:
        if self.labels and node in self.labels:
            return self.labels[node]
        return str(node)

    def to_dot(self) -> str:
        lines = ["digraph aux {"]
        for node in self.nodes:
            lines.append(f'  "{self.label(node)}";')
        for arc in self.arcs:
            attr = f'label="{arc.capacity}"'
            if arc.tag:
                attr += f', tooltip="{arc.tag}"'
            lines.append(f'  "{self.label(arc.tail)}" -> "{self.label(arc.head)}" [{attr}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class CutCertificate:
    source_side: frozenset
    value: int


class _Residual:
    """Adjacency-list residual graph; arc i has its reverse at i ^ 1."""

    def __init__(self, net: FlowNetwork):
        self.index = {node: i for i, node in enumerate(net.nodes)}
        n = len(net.nodes)
        self.head: list[int] = []
        self.cap: list[int] = []
        self.out: list[list[int]] = [[] for _ in range(n)]
        for arc in net.arcs:
            u, v = self.index[arc.tail], self.index[arc.head]
            self.out[u].append(len(self.head))
            self.head.append(v)
            self.cap.append(arc.capacity)
            self.out[v].append(len(self.head))
            self.head.append(u)
            self.cap.append(0)

    def reachable(self, s: int) -> list[bool]:
        seen = [False] * len(self.out)
        seen[s] = True
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in self.out[u]:
                v = self.head[e]
                if self.cap[e] > 0 and not seen[v]:
                    seen[v] = True
                    queue.append(v)
        return seen


def _dinic(res: _Residual, s: int, t: int) -> int:
    total = 0
    n = len(res.out)
    while True:
        level = [-1] * n
        level[s] = 0
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for e in res.out[u]:
                v = res.head[e]
                if res.cap[e] > 0 and level[v] < 0:
                    level[v] = level[u] + 1
                    queue.append(v)
        if level[t] < 0:
            return total
        pointer = [0] * n
        while True:
            pushed = _blocking_path(res, level, pointer, s, t)
            if pushed == 0:
                break
            total += pushed


def _blocking_path(res: _Residual, level, pointer, s: int, t: int) -> int:
    # one augmenting path in the level graph, iterative DFS
    path: list[int] = []
    u = s
    while True:
        if u == t:
            bottleneck = min(res.cap[e] for e in path)
            for e in path:
                res.cap[e] -= bottleneck
                res.cap[e ^ 1] += bottleneck
            return bottleneck
        edges = res.out[u]
        while pointer[u] < len(edges):
            e = edges[pointer[u]]
            v = res.head[e]
            if res.cap[e] > 0 and level[v] == level[u] + 1:
                break
            pointer[u] += 1
        else:
            if u == s:
                return 0
            level[u] = -1  # dead end
            e = path.pop()
            u = res.head[e ^ 1]
            pointer[u] += 1
            continue
        path.append(e)
        u = res.head[e]


def max_flow(net: FlowNetwork) -> tuple[int, dict[int, int]]:
    """Maximum flow value and the flow on each arc (keyed by arc position)."""
    res = _Residual(net)
    value = _dinic(res, res.index[net.source], res.index[net.sink])
    flow = {i: net.arcs[i].capacity - res.cap[2 * i] for i in range(len(net.arcs))}
    return value, flow


def min_cut(net: FlowNetwork, flow: dict[int, int]) -> CutCertificate:
    """Canonical minimum cut: nodes reachable from the source in the residual graph."""
    res = _Residual(net)
    for i, f in flow.items():
        res.cap[2 * i] -= f
        res.cap[2 * i + 1] += f
    seen = res.reachable(res.index[net.source])
    side = frozenset(node for node, i in res.index.items() if seen[i])
    if net.sink in side:
        raise ValueError("flow is not maximum: sink reachable in residual graph")
    value = sum(a.capacity for a in net.arcs if a.tail in side and a.head not in side)
    return CutCertificate(side, value)


def cut_capacity(net: FlowNetwork, source_side) -> int:
    side = set(source_side)
    return sum(a.capacity for a in net.arcs if a.tail in side and a.head not in side)
