"""Bipartite graphs with fixed sides, maximum matching and core checks.

Vertices are string names. Every edge is stored oriented as
``(left_vertex, right_vertex)``.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

Allocation = dict  # vertex name -> Fraction


class Side(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True)
class BipartiteGraph:
    """Immutable bipartite graph.

    ``side`` must assign every vertex; ``edges`` holds ``(u, v)`` pairs with
    ``u`` on the left and ``v`` on the right.
    """

    side: Mapping[str, Side]
    edges: frozenset[tuple[str, str]] = frozenset()
    _adj: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        side = {v: Side(s) for v, s in self.side.items()}
        object.__setattr__(self, "side", side)
        adj: dict[str, list[str]] = {v: [] for v in sorted(side)}
        oriented = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop at {a}")
            for x in (a, b):
                if x not in side:
                    raise ValueError(f"edge endpoint {x} is not a vertex")
            if side[a] == side[b]:
                raise ValueError(f"edge {a}-{b} joins two {side[a].value} vertices")
            u, v = (a, b) if side[a] is Side.LEFT else (b, a)
            oriented.add((u, v))
        for u, v in sorted(oriented):
            adj[u].append(v)
            adj[v].append(u)
        for nbrs in adj.values():
            nbrs.sort()
        object.__setattr__(self, "edges", frozenset(oriented))
        object.__setattr__(self, "_adj", adj)

    @classmethod
    def build(cls, left: Iterable[str] = (), right: Iterable[str] = (),
              edges: Iterable[tuple[str, str]] = ()) -> "BipartiteGraph":
        side = {v: Side.LEFT for v in left}
        for v in right:
            if v in side:
                raise ValueError(f"vertex {v} listed on both sides")
            side[v] = Side.RIGHT
        return cls(side, frozenset(tuple(e) for e in edges))

    @property
    def vertices(self) -> frozenset[str]:
        return frozenset(self.side)

    @property
    def left(self) -> list[str]:
        return sorted(v for v, s in self.side.items() if s is Side.LEFT)

    @property
    def right(self) -> list[str]:
        return sorted(v for v, s in self.side.items() if s is Side.RIGHT)

    def neighbors(self, v: str) -> list[str]:
        return self._adj[v]

    def sorted_edges(self) -> list[tuple[str, str]]:
        return sorted(self.edges)

    def induced(self, keep: Iterable[str]) -> "BipartiteGraph":
        keep = set(keep)
        return BipartiteGraph({v: s for v, s in self.side.items() if v in keep},
                              frozenset(e for e in self.edges if e[0] in keep and e[1] in keep))


def max_matching(g: BipartiteGraph) -> tuple[set[tuple[str, str]], int]:
    """Maximum-cardinality matching by Hopcroft-Karp.

    Returns the matched ``(left, right)`` pairs and their number.
    """
    left = g.left
    mate: dict[str, str | None] = {v: None for v in g.side}
    inf = len(g.side) + 1

    def bfs() -> dict[str, int] | None:
        dist = {}
        queue = deque()
        for u in left:
            if mate[u] is None:
                dist[u] = 0
                queue.append(u)
        found = False
        while queue:
            u = queue.popleft()
            for v in g.neighbors(u):
                w = mate[v]
                if w is None:
                    found = True
                elif w not in dist:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist if found else None

    def dfs(u: str, dist: dict[str, int]) -> bool:
        # iterative augmenting-path search over the layered graph
        stack = [(u, iter(g.neighbors(u)))]
        path = []
        while stack:
            x, it = stack[-1]
            advanced = False
            for v in it:
                w = mate[v]
                if w is None:
                    path.append((x, v))
                    for a, b in path:
                        mate[a] = b
                        mate[b] = a
                    return True
                if dist.get(w, inf) == dist[x] + 1:
                    path.append((x, v))
                    stack.append((w, iter(g.neighbors(w))))
                    advanced = True
                    break
            if not advanced:
                dist[x] = inf
                stack.pop()
                if path:
                    path.pop()
        return False

    while (dist := bfs()) is not None:
        for u in left:
            if mate[u] is None:
                dfs(u, dist)

    matching = {(u, mate[u]) for u in left if mate[u] is not None}
    return matching, len(matching)


def nu(g: BipartiteGraph) -> int:
    return max_matching(g)[1]


def min_vertex_cover(g: BipartiteGraph) -> set[str]:
    """Minimum vertex cover extracted from a maximum matching (König).

    Alternating search starts from unmatched left vertices; the cover is the
    unreached left vertices plus the reached right vertices.
    """
    matching, _ = max_matching(g)
    mate = {}
    for u, v in matching:
        mate[u] = v
        mate[v] = u
    reached = set()
    queue = deque(u for u in g.left if u not in mate)
    reached.update(queue)
    while queue:
        u = queue.popleft()
        for v in g.neighbors(u):
            if v in reached or mate.get(u) == v:
                continue
            reached.add(v)
            w = mate.get(v)
            if w is not None and w not in reached:
                reached.add(w)
                queue.append(w)
    cover = {u for u in g.left if u not in reached}
    cover |= {v for v in g.right if v in reached}
    return cover


def is_vertex_cover(g: BipartiteGraph, cover: Iterable[str]) -> bool:
    cover = set(cover)
    return all(u in cover or v in cover for u, v in g.edges)


def is_core(g: BipartiteGraph, y: Mapping[str, Fraction | int]) -> bool:
    """Shapley-Shubik test: ``y`` is a minimum fractional vertex cover."""
    if set(y) != set(g.side):
        return False
    if any(Fraction(val) < 0 for val in y.values()):
        return False
    if any(Fraction(y[u]) + Fraction(y[v]) < 1 for u, v in g.edges):
        return False
    return sum((Fraction(val) for val in y.values()), Fraction(0)) == nu(g)


def indicator(g: BipartiteGraph, chosen: Iterable[str]) -> dict[str, Fraction]:
    chosen = set(chosen)
    return {v: Fraction(1 if v in chosen else 0) for v in sorted(g.side)}


def weighted_min_vertex_cover(g: BipartiteGraph,
                              alpha: Mapping[str, Fraction | int]) -> dict[str, Fraction]:
    """Minimum vertex cover of least ``alpha``-cost, as a 0/1 allocation.

    Solved through the single-stage auxiliary flow network; ``alpha`` may have
    any sign.
    """
    from sagame.reduce import solve_chain, StageChain

    chain = StageChain(graphs=(g,), links=())
    alpha = {v: Fraction(alpha.get(v, 0)) for v in g.side}
    solution = solve_chain(chain, alpha=(alpha,), beta={}, b={})
    return dict(solution.y[0])
