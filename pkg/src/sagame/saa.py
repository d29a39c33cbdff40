"""Sample average approximation for implicitly given scenario distributions."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from sagame.graph import BipartiteGraph
from sagame.instance import (MAX_SUPPORT_VERTICES, HardnessInstance, Mode, Scenario,
                             ScenarioSampler, SimpleGraph, TwoStageInstance)
from sagame.numeric import rat_to_string, to_rational
from sagame.rng import Xoshiro256
from sagame.solver import ValidationError, evaluate_first_stage, solve_two_stage

LN_PRECISION = Fraction(1, 10**9)


# ---------------------------------------------------------------- certified logarithm

def _atanh_series_bounds(z: Fraction, tol: Fraction) -> tuple[Fraction, Fraction]:
    """Bounds on ``2*atanh(z) = ln((1+z)/(1-z))`` for ``0 <= z <= 1/3``."""
    total = Fraction(0)
    power = z
    z2 = z * z
    k = 0
    while True:
        term = 2 * power / (2 * k + 1)
        total += term
        k += 1
        power *= z2
        tail = 2 * power / ((2 * k + 1) * (1 - z2))
        if tail <= tol:
            return total, total + tail


def ln_bounds(x: Fraction, tol: Fraction = Fraction(1, 10**15)) -> tuple[Fraction, Fraction]:
    """Rational ``lo <= ln(x) <= hi`` with ``hi - lo <= tol``."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("logarithm of a non-positive number")
    if x < 1:
        lo, hi = ln_bounds(1 / x, tol)
        return -hi, -lo
    # x = 2**m * r with 1 <= r < 2
    m = x.numerator.bit_length() - x.denominator.bit_length()
    r = x / Fraction(2) ** m
    while r >= 2:
        r /= 2
        m += 1
    while r < 1:
        r *= 2
        m -= 1
    part = tol / (2 * (m + 1))
    ln2_lo, ln2_hi = _atanh_series_bounds(Fraction(1, 3), part)
    r_lo, r_hi = _atanh_series_bounds((r - 1) / (r + 1), part)
    return m * ln2_lo + r_lo, m * ln2_hi + r_hi


def ln_upper(x: Fraction) -> Fraction:
    """Upper bound on ``ln(x)``, rounded outward to a multiple of ``2**-64``."""
    _, hi = ln_bounds(x)
    scale = 1 << 64
    return Fraction(-((-hi.numerator * scale) // hi.denominator), scale)


def required_samples(lambda_sum, v0_count: int, confidence, accuracy) -> int:
    """Sample size ``2 L^2 ln(2^n / conf) / acc^2``, rounded up.

    ``ln`` is replaced by a rational upper bound within ``LN_PRECISION``, so
    the result never undershoots the exact formula. At least one sample is
    always drawn.
    """
    lam = to_rational(lambda_sum)
    conf = to_rational(confidence)
    acc = to_rational(accuracy)
    if lam < 0 or v0_count < 0:
        raise ValueError("lambda sum and vertex count must be nonnegative")
    if not 0 < conf < 1:
        raise ValueError("confidence must lie in (0, 1)")
    if acc <= 0:
        raise ValueError("accuracy must be positive")
    value = 2 * lam**2 * ln_upper(Fraction(2**v0_count) / conf) / acc**2
    return max(1, math.ceil(value))


# ---------------------------------------------------------------- SAA driver

@dataclass(frozen=True)
class SaaConfig:
    """Either ``accuracy`` and ``confidence`` or an explicit ``samples`` count."""

    accuracy: Fraction | None = None
    confidence: Fraction | None = None
    samples: int | None = None

    def __post_init__(self):
        by_bound = self.accuracy is not None or self.confidence is not None
        if by_bound == (self.samples is not None):
            raise ValueError("give either accuracy and confidence, or samples")
        if by_bound and (self.accuracy is None or self.confidence is None):
            raise ValueError("accuracy and confidence must be given together")
        if self.samples is not None and self.samples < 1:
            raise ValueError("samples must be positive")

    def sample_count(self, lam: Mapping[str, Fraction], v0_count: int) -> int:
        if self.samples is not None:
            return self.samples
        return required_samples(sum(lam.values(), Fraction(0)), v0_count,
                                self.confidence, self.accuracy)


@dataclass
class SaaResult:
    y: dict[str, Fraction]
    samples: int
    seed: int
    empirical: Fraction
    exact: Fraction | None = None

    def to_json(self) -> dict:
        out = {
            "samples": self.samples,
            "seed": self.seed,
            "first_stage": {v: rat_to_string(self.y[v]) for v in sorted(self.y)},
            "empirical_objective": rat_to_string(self.empirical),
        }
        if self.exact is not None:
            out["exact_objective"] = rat_to_string(self.exact)
        return out


def draw_scenarios(g0: BipartiteGraph, sampler: ScenarioSampler, n: int,
                   rng: Xoshiro256) -> list[BipartiteGraph]:
    graphs = []
    for k in range(n):
        g = sampler.draw(rng)
        bad = [v for v in sorted(g.side) if v in g0.side and g0.side[v] is not g.side[v]]
        if bad:
            raise ValidationError([f"sampled scenario {k + 1} breaks the bipartition at {bad[0]}"])
        graphs.append(g)
    return graphs


def saa_solve(g0: BipartiteGraph, lam: Mapping[str, Fraction], sampler: ScenarioSampler,
              cfg: SaaConfig, seed: int, mode: Mode = Mode.POS,
              exact: bool = False) -> SaaResult:
    """Solve the sampled game with uniform scenario weights 1/N.

    The returned first stage is the integral optimum of the explicit sampled
    instance. With ``exact=True`` and an enumerable sampler, its true
    expected loss is attached.
    """
    n = cfg.sample_count(lam, len(g0.side))
    rng = Xoshiro256(seed)
    graphs = draw_scenarios(g0, sampler, n, rng)
    p = Fraction(1, n)
    scenarios = tuple(Scenario(f"S{k + 1}", p, g) for k, g in enumerate(graphs))
    inst = TwoStageInstance(g0, scenarios, lam, mode)
    result = solve_two_stage(inst)
    out = SaaResult(dict(result.first_stage), n, seed, result.objective)
    if exact:
        out.exact = exact_value(out.y, g0, lam, sampler, mode)
    return out


def _trial(args):
    g0, lam, sampler, cfg, seed, mode = args
    return saa_solve(g0, lam, sampler, cfg, seed, mode).y


def saa_trials(g0, lam, sampler, cfg: SaaConfig, seed: int, trials: int,
               mode: Mode = Mode.POS, jobs: int = 1) -> list[dict[str, Fraction]]:
    """First stages of ``trials`` independent SAA runs; trial seeds come from ``seed``."""
    seeds = [child.seed for child in Xoshiro256(seed).spawn(trials)]
    work = [(g0, lam, sampler, cfg, s, mode) for s in seeds]
    if jobs <= 1:
        return [_trial(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_trial, work))


# ---------------------------------------------------------------- exact expectations

def exact_value(y: Mapping[str, Fraction], g0: BipartiteGraph, lam: Mapping[str, Fraction],
                sampler: ScenarioSampler, mode: Mode = Mode.POS) -> Fraction:
    support = sampler.support()
    if support is None:
        raise ValueError("sampler has no enumerable support")
    inst = TwoStageInstance(g0, tuple(Scenario(n, p, g) for n, p, g in support), lam, mode)
    return evaluate_first_stage(y, inst)


def exact_expected_value(y: Mapping[str, Fraction], hard: HardnessInstance) -> Fraction:
    """True expected loss of ``y`` on the hardness instance (all ``2^|V|`` scenarios)."""
    if len(hard.base.vertices) > MAX_SUPPORT_VERTICES:
        raise ValueError(f"exact expectation limited to {MAX_SUPPORT_VERTICES} base vertices")
    return evaluate_first_stage(y, hard.explicit())


def count_vertex_covers(g: SimpleGraph) -> int:
    """Number of vertex subsets covering every edge (brute force)."""
    n = len(g.vertices)
    if n > MAX_SUPPORT_VERTICES:
        raise ValueError(f"vertex cover counting limited to {MAX_SUPPORT_VERTICES} vertices")
    index = {v: i for i, v in enumerate(g.vertices)}
    masks = [(1 << index[u]) | (1 << index[v]) for u, v in g.edges]
    return sum(1 for s in range(1 << n) if all(s & m for m in masks))
