"""High-level solvers and the brute-force oracles they are checked against."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Mapping, Sequence

from sagame.graph import BipartiteGraph, Side, is_core, nu, weighted_min_vertex_cover
from sagame.instance import (Mode, MultistageInstance, TwoStageInstance, uniform_lambda,
                             validate)
from sagame.numeric import rat_to_string
from sagame.reduce import (ChainSolution, chain_from_instance, objective_from_instance,
                           solve_with)

MAX_ORACLE_VERTICES = 16
MAX_ORACLE_SEQUENCES = 10**6


class ValidationError(ValueError):
    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


@dataclass
class SolveResult:
    objective: Fraction
    first_stage: dict[str, Fraction] | None = None
    scenarios: dict[str, dict[str, Fraction]] = field(default_factory=dict)
    stages: list[dict[str, Fraction]] = field(default_factory=list)
    delta: dict[str, dict[str, Fraction]] = field(default_factory=dict)
    d: dict[str, dict[str, Fraction]] = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    network: object = field(default=None, repr=False, compare=False)

    def allocations(self) -> list[dict[str, Fraction]]:
        if self.first_stage is not None:
            return [self.first_stage, *self.scenarios.values()]
        return list(self.stages)

    def to_json(self) -> dict:
        def alloc(m):
            return {v: rat_to_string(m[v]) for v in sorted(m)}

        out: dict = {"objective": rat_to_string(self.objective)}
        if self.first_stage is not None:
            out["first_stage"] = alloc(self.first_stage)
            out["scenarios"] = {k: alloc(m) for k, m in self.scenarios.items()}
        else:
            out["stages"] = [alloc(m) for m in self.stages]
        out["delta"] = {k: alloc(m) for k, m in self.delta.items()}
        out["d"] = {k: alloc(m) for k, m in self.d.items()}
        diag = {}
        for k, v in self.diagnostics.items():
            diag[k] = rat_to_string(v) if isinstance(v, Fraction) else v
        out["diagnostics"] = diag
        return out


def _check(inst) -> None:
    problems = validate(inst)
    if problems:
        raise ValidationError(problems)


def _diagnostics(sol: ChainSolution) -> dict:
    return {
        "epsilon": sol.eps,
        "scale": sol.scale,
        "nu": list(sol.nus),
        "flow_value": sol.flow_value,
        "cut_value": sol.cut_value,
        "dual_objective": sol.dual_objective,
        "cut_size": sol.cut_size,
        "nodes": sol.node_count,
        "arcs": sol.arc_count,
    }


def solve_two_stage(inst: TwoStageInstance, keep_network: bool = False) -> SolveResult:
    """Optimal integral first-stage and scenario core elements."""
    _check(inst)
    chain = chain_from_instance(inst)
    sol = solve_with(chain, objective_from_instance(inst), keep_network=keep_network)
    names = [s.name for s in inst.scenarios]
    return SolveResult(
        objective=sol.objective,
        first_stage=sol.y[0],
        scenarios={n: sol.y[k + 1] for k, n in enumerate(names)},
        delta={n: sol.delta[link] for n, link in zip(names, chain.links)},
        d={n: sol.d[link] for n, link in zip(names, chain.links)},
        diagnostics=_diagnostics(sol),
        network=sol.network,
    )


def solve_multistage(inst: MultistageInstance, keep_network: bool = False) -> SolveResult:
    """Optimal integral core element per stage."""
    _check(inst)
    chain = chain_from_instance(inst)
    sol = solve_with(chain, objective_from_instance(inst), keep_network=keep_network)
    keys = [str(i + 1) for i in range(len(chain.links))]
    return SolveResult(
        objective=sol.objective,
        stages=list(sol.y),
        delta={k: sol.delta[link] for k, link in zip(keys, chain.links)},
        d={k: sol.d[link] for k, link in zip(keys, chain.links)},
        diagnostics=_diagnostics(sol),
        network=sol.network,
    )


def _common_sides(stages: Sequence[BipartiteGraph]) -> None:
    seen: dict[str, Side] = {}
    for i, g in enumerate(stages):
        for v, s in g.side.items():
            if seen.setdefault(v, s) is not s:
                raise ValidationError([f"bipartition mismatch at {v} in stage {i}"])


def solve_mvc(stages: Sequence[BipartiteGraph]) -> tuple[list[set[str]], int]:
    """Minimum vertex cover per stage with the fewest changes between stages.

    Changes are counted on vertices present in both consecutive stages.
    """
    stages = list(stages)
    if len(stages) < 2:
        raise ValidationError(["multistage vertex cover needs at least 2 stages"])
    _common_sides(stages)
    inst = MultistageInstance(tuple(stages), uniform_lambda(stages), Mode.ABS)
    result = solve_multistage(inst)
    covers = [{v for v, x in y.items() if x == 1} for y in result.stages]
    for g, c in zip(stages, covers):
        assert len(c) == nu(g)
    assert result.objective.denominator == 1
    return covers, int(result.objective)


# ---------------------------------------------------------------- oracles

def minimum_covers(g: BipartiteGraph) -> list[frozenset[str]]:
    """Every minimum vertex cover, found by trying the subsets of size nu."""
    k = nu(g)
    touched = sorted({x for e in g.edges for x in e})  # isolated vertices never appear
    edges = list(g.edges)
    return [frozenset(c) for c in combinations(touched, k)
            if all(u in c or v in c for u, v in edges)]


def _change(mode: Mode, before: int, after: int) -> int:
    if mode is Mode.ABS:
        return abs(before - after)
    if mode is Mode.POS:
        return max(before - after, 0)
    return max(after - before, 0)


def _transition_cost(c1: frozenset, c2: frozenset, weights: Mapping[str, Fraction],
                     mode: Mode) -> Fraction:
    total = Fraction(0)
    for v, w in weights.items():
        if w:
            total += w * _change(mode, int(v in c1), int(v in c2))
    return total


def _alloc(g: BipartiteGraph, cover) -> dict[str, Fraction]:
    return {v: Fraction(int(v in cover)) for v in sorted(g.side)}


def brute_force_two_stage(inst: TwoStageInstance) -> SolveResult:
    """Exact optimum by enumerating minimum vertex covers of every graph."""
    _check(inst)
    if len(inst.g0.side) > MAX_ORACLE_VERTICES:
        raise ValueError(f"oracle limited to {MAX_ORACLE_VERTICES} first-stage vertices")
    first = minimum_covers(inst.g0)
    per_scenario = []
    for s in inst.scenarios:
        shared = inst.g0.vertices & s.graph.vertices
        weights = {v: s.prob * inst.weight(v) for v in sorted(shared)}
        per_scenario.append((s, weights, minimum_covers(s.graph)))
    best = None
    for c0 in first:
        total = Fraction(0)
        choice = []
        for s, weights, covers in per_scenario:
            cost, cs = min(((_transition_cost(c0, c, weights, inst.mode), i)
                            for i, c in enumerate(covers)))
            total += cost
            choice.append(covers[cs])
        if best is None or total < best[0]:
            best = (total, c0, choice)
    total, c0, choice = best
    return SolveResult(
        objective=total,
        first_stage=_alloc(inst.g0, c0),
        scenarios={s.name: _alloc(s.graph, c) for (s, _, _), c in zip(per_scenario, choice)},
        diagnostics={"oracle": "two-stage", "first_stage_candidates": len(first)},
    )


def brute_force_multistage(inst: MultistageInstance) -> SolveResult:
    """Exact optimum by dynamic programming over per-stage minimum covers."""
    _check(inst)
    lists = [minimum_covers(g) for g in inst.stages]
    count = 1
    for cs in lists:
        count *= len(cs)
    if count > MAX_ORACLE_SEQUENCES:
        raise ValueError(f"oracle limited to {MAX_ORACLE_SEQUENCES} cover sequences, got {count}")
    # best[c] = (cost, back-pointer) for the cheapest sequence ending in cover c
    best = [(Fraction(0), None) for _ in lists[0]]
    history = [best]
    for i in range(1, len(lists)):
        weights = inst.lam[i - 1]
        cur = []
        for c in lists[i]:
            cur.append(min((cost + _transition_cost(prev, c, weights, inst.mode), k)
                           for k, ((cost, _), prev) in enumerate(zip(best, lists[i - 1]))))
        history.append(cur)
        best = cur
    end = min(range(len(best)), key=lambda k: best[k][0])
    total = best[end][0]
    picks = [end]
    for i in range(len(lists) - 1, 0, -1):
        picks.append(history[i][picks[-1]][1])
    picks.reverse()
    return SolveResult(
        objective=total,
        stages=[_alloc(g, lists[i][k]) for i, (g, k) in enumerate(zip(inst.stages, picks))],
        diagnostics={"oracle": "multistage", "sequences": count},
    )


def brute_force_mvc(stages: Sequence[BipartiteGraph]) -> int:
    stages = list(stages)
    _common_sides(stages)
    inst = MultistageInstance(tuple(stages), uniform_lambda(stages), Mode.ABS)
    return int(brute_force_multistage(inst).objective)


# ---------------------------------------------------------------- evaluation

def scenario_loss(y: Mapping[str, Fraction], graph: BipartiteGraph,
                  weights: Mapping[str, Fraction], mode: Mode) -> Fraction:
    """Least loss over the core of ``graph`` for a fixed 0/1 first stage ``y``.

    With ``y`` fixed and 0/1, the loss is linear in the second-stage
    allocation, so the best minimum cover under the matching linear costs
    attains the optimum.
    """
    constant = Fraction(0)
    alpha = {}
    for v, w in weights.items():
        if v not in graph.side or not w:
            continue
        yv = y[v]
        if mode is Mode.POS:       # y (1 - y')
            constant += w * yv
            alpha[v] = -w * yv
        elif mode is Mode.ABS:     # y + y' (1 - 2y)
            constant += w * yv
            alpha[v] = w * (1 - 2 * yv)
        else:                      # y' (1 - y)
            alpha[v] = w * (1 - yv)
    if not alpha:
        return constant
    ys = weighted_min_vertex_cover(graph, alpha)
    return constant + sum((a * ys[v] for v, a in alpha.items()), Fraction(0))


def evaluate_first_stage(y: Mapping[str, Fraction], inst: TwoStageInstance) -> Fraction:
    """Expected loss of committing to the 0/1 core element ``y``."""
    y = {v: Fraction(x) for v, x in y.items()}
    if not is_core(inst.g0, y):
        raise ValueError("allocation is not a core element of the first-stage graph")
    if any(x not in (0, 1) for x in y.values()):
        raise ValueError("allocation must be 0/1")
    total = Fraction(0)
    for s in inst.scenarios:
        weights = {v: inst.weight(v) for v in inst.g0.vertices & s.graph.vertices}
        total += s.prob * scenario_loss(y, s.graph, weights, inst.mode)
    return total
