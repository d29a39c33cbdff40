"""Instance data model, validation, JSON format, generators and samplers."""

from __future__ import annotations

import abc
import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Mapping, Sequence

from sagame.graph import BipartiteGraph, Side
from sagame.numeric import common_denominator, rat_of_string, rat_to_string, to_rational
from sagame.rng import Xoshiro256

MAX_SUPPORT_VERTICES = 20


class Mode(str, enum.Enum):
    """Which allocation change is charged: ``|y - y'|``, ``[y - y']^+`` or ``[y' - y]^+``."""

    ABS = "abs"
    POS = "pos"
    NEG = "neg"


class InstanceFormatError(ValueError):
    """Malformed instance file (as opposed to a well-formed but invalid instance)."""


@dataclass(frozen=True)
class Scenario:
    name: str
    prob: Fraction
    graph: BipartiteGraph


@dataclass(frozen=True)
class TwoStageInstance:
    g0: BipartiteGraph
    scenarios: tuple[Scenario, ...]
    lam: Mapping[str, Fraction]
    mode: Mode

    def __post_init__(self):
        object.__setattr__(self, "scenarios", tuple(self.scenarios))
        object.__setattr__(self, "lam", {v: to_rational(x) for v, x in self.lam.items()})
        object.__setattr__(self, "mode", Mode(self.mode))

    def weight(self, v: str) -> Fraction:
        return self.lam.get(v, Fraction(0))

    def with_mode(self, mode: Mode) -> "TwoStageInstance":
        return TwoStageInstance(self.g0, self.scenarios, self.lam, Mode(mode))


@dataclass(frozen=True)
class MultistageInstance:
    """``lam[i]`` weights the transition from stage ``i`` to stage ``i + 1``."""

    stages: tuple[BipartiteGraph, ...]
    lam: tuple[Mapping[str, Fraction], ...]
    mode: Mode

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        object.__setattr__(self, "lam", tuple({v: to_rational(x) for v, x in m.items()}
                                              for m in self.lam))
        object.__setattr__(self, "mode", Mode(self.mode))

    def with_mode(self, mode: Mode) -> "MultistageInstance":
        return MultistageInstance(self.stages, self.lam, Mode(mode))


def uniform_lambda(stages: Sequence[BipartiteGraph], value=1) -> tuple[dict, ...]:
    """The same weight on every shared vertex of every transition."""
    value = to_rational(value)
    return tuple({v: value for v in sorted(a.vertices & b.vertices)}
                 for a, b in zip(stages, stages[1:]))


# ---------------------------------------------------------------- validation

def _side_mismatches(reference: Mapping[str, Side], graph: BipartiteGraph) -> list[str]:
    return [v for v in sorted(graph.side)
            if v in reference and reference[v] is not graph.side[v]]


def validate(inst: TwoStageInstance | MultistageInstance) -> list[str]:
    """List of invariant violations; an empty list means the instance is valid."""
    problems: list[str] = []
    if isinstance(inst, TwoStageInstance):
        names = [s.name for s in inst.scenarios]
        if not inst.scenarios:
            problems.append("no scenarios")
        dupes = sorted({n for n in names if names.count(n) > 1})
        for n in dupes:
            problems.append(f"duplicate scenario name {n}")
        total = sum((s.prob for s in inst.scenarios), Fraction(0))
        if inst.scenarios and total != 1:
            problems.append(f"probabilities sum to {rat_to_string(total)}")
        for s in inst.scenarios:
            if s.prob <= 0:
                problems.append(f"probability of scenario {s.name} is not positive")
            for v in _side_mismatches(inst.g0.side, s.graph):
                problems.append(f"bipartition mismatch at {v} in scenario {s.name}")
        for v in sorted(inst.lam):
            if v not in inst.g0.side:
                problems.append(f"lambda given for {v}, which is not a first-stage vertex")
            if inst.lam[v] < 0:
                problems.append(f"lambda at {v} is negative")
    elif isinstance(inst, MultistageInstance):
        if len(inst.stages) < 2:
            problems.append("multistage instance needs at least 2 stages")
        if len(inst.lam) != max(len(inst.stages) - 1, 0):
            problems.append(f"expected {len(inst.stages) - 1} lambda maps, got {len(inst.lam)}")
        seen: dict[str, Side] = {}
        for i, g in enumerate(inst.stages):
            for v in _side_mismatches(seen, g):
                problems.append(f"bipartition mismatch at {v} in stage {i}")
            for v, s in g.side.items():
                seen.setdefault(v, s)
        for i, lam in enumerate(inst.lam):
            if i + 1 >= len(inst.stages):
                break
            shared = inst.stages[i].vertices & inst.stages[i + 1].vertices
            for v in sorted(lam):
                if v not in shared:
                    problems.append(f"lambda of transition {i} given for {v}, "
                                    f"which is not in both stages")
                if lam[v] < 0:
                    problems.append(f"lambda of transition {i} at {v} is negative")
    else:
        raise TypeError(f"not an instance: {type(inst).__name__}")
    return problems


# ---------------------------------------------------------------- file format

_TWO_STAGE_KEYS = {"kind", "left", "right", "stage0", "scenarios", "lambda", "mode"}
_MULTI_KEYS = {"kind", "left", "right", "stages", "lambda", "mode"}
_GRAPH_KEYS = {"vertices", "edges"}
_SCENARIO_KEYS = {"name", "prob", "vertices", "edges"}


def _check_keys(obj, allowed: set[str], where: str, required: set[str] | None = None):
    if not isinstance(obj, dict):
        raise InstanceFormatError(f"{where}: expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise InstanceFormatError(f"{where}: unknown keys {unknown}")
    missing = sorted((allowed if required is None else required) - set(obj))
    if missing:
        raise InstanceFormatError(f"{where}: missing keys {missing}")


def _graph_from_json(obj, sides: Mapping[str, Side], where: str) -> BipartiteGraph:
    vertices = obj["vertices"]
    if not isinstance(vertices, list) or not all(isinstance(v, str) for v in vertices):
        raise InstanceFormatError(f"{where}.vertices: expected a list of names")
    if len(set(vertices)) != len(vertices):
        raise InstanceFormatError(f"{where}.vertices: duplicate names")
    for v in vertices:
        if v not in sides:
            raise InstanceFormatError(f"{where}: vertex {v} is in neither left nor right")
    edges = []
    for e in obj["edges"]:
        if not (isinstance(e, list) and len(e) == 2 and all(isinstance(x, str) for x in e)):
            raise InstanceFormatError(f"{where}.edges: each edge must be a pair of names")
        edges.append(tuple(e))
    try:
        return BipartiteGraph({v: sides[v] for v in vertices}, frozenset(edges))
    except ValueError as exc:
        raise InstanceFormatError(f"{where}: {exc}") from None


def _rational(text, where: str) -> Fraction:
    try:
        return rat_of_string(text)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InstanceFormatError(f"{where}: {exc}") from None


def _lambda_map(obj, where: str) -> dict[str, Fraction]:
    if not isinstance(obj, dict):
        raise InstanceFormatError(f"{where}: expected an object of fraction strings")
    return {v: _rational(x, f"{where}.{v}") for v, x in obj.items()}


def instance_from_json(data: dict) -> TwoStageInstance | MultistageInstance:
    if not isinstance(data, dict):
        raise InstanceFormatError("instance: expected a JSON object")
    kind = data.get("kind")
    if kind == "two-stage":
        _check_keys(data, _TWO_STAGE_KEYS, "instance")
    elif kind == "multistage":
        _check_keys(data, _MULTI_KEYS, "instance")
    else:
        raise InstanceFormatError(f"instance.kind must be 'two-stage' or 'multistage', got {kind!r}")
    sides: dict[str, Side] = {}
    for key, side in (("left", Side.LEFT), ("right", Side.RIGHT)):
        for v in data[key]:
            if not isinstance(v, str):
                raise InstanceFormatError(f"instance.{key}: vertex names must be strings")
            if v in sides:
                raise InstanceFormatError(f"instance: vertex {v} is listed on both sides")
            sides[v] = side
    try:
        mode = Mode(data["mode"])
    except ValueError:
        raise InstanceFormatError(f"instance.mode must be abs, pos or neg, got {data['mode']!r}") from None

    if kind == "two-stage":
        _check_keys(data["stage0"], _GRAPH_KEYS, "stage0")
        g0 = _graph_from_json(data["stage0"], sides, "stage0")
        scenarios = []
        if not isinstance(data["scenarios"], list):
            raise InstanceFormatError("scenarios: expected a list")
        for i, s in enumerate(data["scenarios"]):
            where = f"scenarios[{i}]"
            _check_keys(s, _SCENARIO_KEYS, where)
            scenarios.append(Scenario(str(s["name"]), _rational(s["prob"], f"{where}.prob"),
                                      _graph_from_json(s, sides, where)))
        return TwoStageInstance(g0, tuple(scenarios), _lambda_map(data["lambda"], "lambda"), mode)

    stages = []
    if not isinstance(data["stages"], list):
        raise InstanceFormatError("stages: expected a list")
    for i, s in enumerate(data["stages"]):
        _check_keys(s, _GRAPH_KEYS, f"stages[{i}]")
        stages.append(_graph_from_json(s, sides, f"stages[{i}]"))
    lam = data["lambda"]
    if isinstance(lam, dict):
        # one map for every transition, restricted to the shared vertices
        common = _lambda_map(lam, "lambda")
        lam_maps = tuple({v: x for v, x in common.items() if v in a.vertices and v in b.vertices}
                         for a, b in zip(stages, stages[1:]))
    elif isinstance(lam, list):
        lam_maps = tuple(_lambda_map(m, f"lambda[{i}]") for i, m in enumerate(lam))
    else:
        raise InstanceFormatError("lambda: expected an object or a list of objects")
    return MultistageInstance(tuple(stages), lam_maps, mode)


def _graph_to_json(g: BipartiteGraph) -> dict:
    return {"vertices": sorted(g.side), "edges": [list(e) for e in g.sorted_edges()]}


def instance_to_json(inst: TwoStageInstance | MultistageInstance) -> dict:
    graphs = [inst.g0, *(s.graph for s in inst.scenarios)] if isinstance(inst, TwoStageInstance) \
        else list(inst.stages)
    sides: dict[str, Side] = {}
    for g in graphs:
        for v, s in g.side.items():
            sides.setdefault(v, s)
    left = sorted(v for v, s in sides.items() if s is Side.LEFT)
    right = sorted(v for v, s in sides.items() if s is Side.RIGHT)
    if isinstance(inst, TwoStageInstance):
        return {
            "kind": "two-stage",
            "left": left,
            "right": right,
            "stage0": _graph_to_json(inst.g0),
            "scenarios": [{"name": s.name, "prob": rat_to_string(s.prob), **_graph_to_json(s.graph)}
                          for s in inst.scenarios],
            "lambda": {v: rat_to_string(inst.lam[v]) for v in sorted(inst.lam)},
            "mode": inst.mode.value,
        }
    return {
        "kind": "multistage",
        "left": left,
        "right": right,
        "stages": [_graph_to_json(g) for g in inst.stages],
        "lambda": [{v: rat_to_string(m[v]) for v in sorted(m)} for m in inst.lam],
        "mode": inst.mode.value,
    }


def dumps(inst) -> str:
    return json.dumps(instance_to_json(inst), indent=2) + "\n"


def loads(text: str):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"invalid JSON: {exc}") from None
    return instance_from_json(data)


def load(path) -> TwoStageInstance | MultistageInstance:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


# ---------------------------------------------------------------- samplers

class ScenarioSampler(abc.ABC):
    """Source of i.i.d. second-stage graphs.

    The randomness is supplied by the caller, so one sampler can serve any
    number of workers as long as each worker owns its generator.
    """

    @abc.abstractmethod
    def draw(self, rng: Xoshiro256) -> BipartiteGraph:
        ...

    def support(self) -> list[tuple[str, Fraction, BipartiteGraph]] | None:
        """Full distribution when it is enumerable, else ``None``."""
        return None


class PointMassSampler(ScenarioSampler):
    def __init__(self, graph: BipartiteGraph):
        self.graph = graph

    def draw(self, rng):
        return self.graph

    def support(self):
        return [("S", Fraction(1), self.graph)]


class ExplicitSampler(ScenarioSampler):
    """Samples the scenario list of an explicit instance by its probabilities."""

    def __init__(self, scenarios: Sequence[Scenario]):
        self.scenarios = tuple(scenarios)
        self._den = common_denominator(s.prob for s in self.scenarios)
        self._cum = []
        acc = 0
        for s in self.scenarios:
            acc += int(s.prob * self._den)
            self._cum.append(acc)
        if acc != self._den:
            raise ValueError("scenario probabilities do not sum to 1")

    def draw(self, rng):
        r = rng.below(self._den)
        for s, c in zip(self.scenarios, self._cum):
            if r < c:
                return s.graph
        raise AssertionError("unreachable")

    def support(self):
        return [(s.name, s.prob, s.graph) for s in self.scenarios]


# ---------------------------------------------------------------- hardness construction

@dataclass(frozen=True)
class SimpleGraph:
    """Plain undirected graph used as input of the hardness construction."""

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def __post_init__(self):
        verts = tuple(dict.fromkeys(self.vertices))
        es = set()
        for u, v in self.edges:
            if u == v:
                raise ValueError(f"self-loop at {u}")
            for x in (u, v):
                if x not in verts:
                    verts = verts + (x,)
            es.add((u, v) if u < v else (v, u))
        object.__setattr__(self, "vertices", tuple(sorted(verts)))
        object.__setattr__(self, "edges", tuple(sorted(es)))

    def degree(self, v: str) -> int:
        return sum(1 for e in self.edges if v in e)

    @classmethod
    def parse(cls, text: str) -> "SimpleGraph":
        """Lines ``u v`` (one edge) or ``u`` (isolated vertex); ``#`` starts a comment."""
        vertices, edges = [], []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) == 1:
                vertices.append(parts[0])
            elif len(parts) == 2:
                edges.append((parts[0], parts[1]))
            else:
                raise InstanceFormatError(f"line {lineno}: expected 'u v', got {raw!r}")
        return cls(tuple(vertices), tuple(edges))


ALPHA, BETA1, BETA2 = "alpha", "beta1", "beta2"


def copy_name(v: str, i: int) -> str:
    return f"{v}_{i}"


def edge_name(e: tuple[str, str]) -> str:
    return f"{e[0]}-{e[1]}"


class HardnessSampler(ScenarioSampler):
    """Keeps every copy block independently with probability 1/2; edge vertices and alpha always stay."""

    def __init__(self, base: SimpleGraph, g0: BipartiteGraph):
        self.base = base
        self.g0 = g0
        self.blocks = {v: [copy_name(v, i) for i in range(1, base.degree(v) + 1)]
                       for v in base.vertices}
        self.always = [edge_name(e) for e in base.edges] + [ALPHA]

    def scenario(self, chosen: Iterable[str]) -> BipartiteGraph:
        keep = list(self.always)
        for v in chosen:
            keep.extend(self.blocks[v])
        return self.g0.induced(keep)

    def draw(self, rng):
        return self.scenario([v for v in self.base.vertices if rng.coin()])

    def support(self):
        return enumerate_support(self)


@dataclass(frozen=True)
class HardnessInstance:
    base: SimpleGraph
    g0: BipartiteGraph
    lam: Mapping[str, Fraction]
    mode: Mode
    sampler: HardnessSampler = field(compare=False)

    def explicit(self) -> TwoStageInstance:
        """The same game with the sampler's support written out as scenarios."""
        scenarios = tuple(Scenario(n, p, g) for n, p, g in enumerate_support(self.sampler))
        return TwoStageInstance(self.g0, scenarios, self.lam, self.mode)


def build_hardness_instance(base: SimpleGraph) -> HardnessInstance:
    """Two-stage game whose optimum encodes the number of vertex covers of ``base``."""
    if not base.edges:
        raise ValueError("the hardness construction needs a graph with at least one edge")
    left, right, edges = [], [], []
    for v in base.vertices:
        left.extend(copy_name(v, i) for i in range(1, base.degree(v) + 1))
    left.append(ALPHA)
    for e in base.edges:
        ev = edge_name(e)
        right.append(ev)
        edges.append((ALPHA, ev))
        for v in e:
            edges.extend((copy_name(v, i), ev) for i in range(1, base.degree(v) + 1))
    right.extend([BETA1, BETA2])
    edges.extend([(ALPHA, BETA1), (ALPHA, BETA2)])
    names = left + right
    if len(set(names)) != len(names):
        raise ValueError("vertex names of the base graph collide with constructed names")
    g0 = BipartiteGraph.build(left, right, edges)
    lam = {v: Fraction(1 if v == ALPHA else 0) for v in sorted(g0.side)}
    return HardnessInstance(base, g0, lam, Mode.POS, HardnessSampler(base, g0))


def enumerate_support(sampler: HardnessSampler) -> list[tuple[str, Fraction, BipartiteGraph]]:
    """All ``2^|V|`` scenarios of the hardness sampler with their exact probabilities."""
    verts = sampler.base.vertices
    if len(verts) > MAX_SUPPORT_VERTICES:
        raise ValueError(f"support enumeration limited to {MAX_SUPPORT_VERTICES} base vertices")
    p = Fraction(1, 2 ** len(verts))
    out = []
    for bits in product((0, 1), repeat=len(verts)):
        chosen = [v for v, bit in zip(verts, bits) if bit]
        name = "S" + "".join(map(str, bits)) if verts else "S"
        out.append((name, p, sampler.scenario(chosen)))
    return out


# ---------------------------------------------------------------- random generator

_LAMBDA_CHOICES = (Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2), Fraction(3))


@dataclass(frozen=True)
class GenParams:
    n_left: int = 3
    n_right: int = 3
    density: Fraction = Fraction(1, 2)
    n_scenarios: int = 2
    seed: int = 0
    mode: Mode = Mode.ABS
    keep: Fraction = Fraction(3, 4)
    new_players: int = 1


def _random_graph(rng: Xoshiro256, side: dict[str, Side], density: Fraction) -> BipartiteGraph:
    left = sorted(v for v, s in side.items() if s is Side.LEFT)
    right = sorted(v for v, s in side.items() if s is Side.RIGHT)
    edges = [(u, v) for u in left for v in right if rng.bernoulli(density)]
    return BipartiteGraph(side, frozenset(edges))


def gen_random(params: GenParams) -> TwoStageInstance:
    """Seeded random two-stage instance. Same params give the same instance."""
    density = to_rational(params.density) if not isinstance(params.density, float) \
        else Fraction(params.density).limit_denominator(10**6)
    if not 0 <= density <= 1:
        raise ValueError("density must lie in [0, 1]")
    rng = Xoshiro256(params.seed)
    side0 = {f"L{i}": Side.LEFT for i in range(params.n_left)}
    side0.update({f"R{i}": Side.RIGHT for i in range(params.n_right)})
    g0 = _random_graph(rng, side0, density)
    weights = []
    graphs = []
    for j in range(params.n_scenarios):
        side = {v: s for v, s in sorted(side0.items()) if rng.bernoulli(params.keep)}
        for k in range(params.new_players):
            if rng.coin():
                s = Side.LEFT if rng.coin() else Side.RIGHT
                side[f"N{j}_{k}{'L' if s is Side.LEFT else 'R'}"] = s
        graphs.append(_random_graph(rng, side, density))
        weights.append(1 + rng.below(4))
    total = sum(weights)
    scenarios = tuple(Scenario(f"S{j + 1}", Fraction(w, total), g)
                      for j, (w, g) in enumerate(zip(weights, graphs)))
    lam = {v: _LAMBDA_CHOICES[rng.below(len(_LAMBDA_CHOICES))] for v in sorted(side0)}
    return TwoStageInstance(g0, scenarios, lam, Mode(params.mode))
