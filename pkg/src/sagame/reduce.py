"""Integral core solutions through an auxiliary max-flow network.

Both the two-stage game and the multistage chain are handled as a
:class:`StageChain`: a list of stage graphs ("copies") plus links between
pairs of copies.  A link ``(i, j)`` couples the allocations of the vertices
the two copies share, with ``delta[v] >= y_i[v] - y_j[v]`` and
``d[v] >= y_j[v] - y_i[v]``.  The two-stage game links the first stage to
every scenario; the multistage game links consecutive stages.

Pipeline: objective coefficients -> epsilon -> auxiliary network -> max flow
-> canonical min cut -> 0/1 dual solution -> allocations.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from sagame.flow import SINK, SOURCE, Arc, CutCertificate, FlowNetwork, max_flow, min_cut
from sagame.graph import BipartiteGraph, Side, nu
from sagame.instance import Mode, MultistageInstance, TwoStageInstance
from sagame.numeric import common_denominator

Link = tuple[int, int]


@dataclass(frozen=True)
class StageChain:
    graphs: tuple[BipartiteGraph, ...]
    links: tuple[Link, ...]
    labels: tuple[str, ...] = ()

    def shared(self, link: Link) -> list[str]:
        i, j = link
        return sorted(self.graphs[i].vertices & self.graphs[j].vertices)

    def label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)


def chain_from_instance(inst: TwoStageInstance | MultistageInstance) -> StageChain:
    if isinstance(inst, TwoStageInstance):
        graphs = (inst.g0, *(s.graph for s in inst.scenarios))
        links = tuple((0, j) for j in range(1, len(graphs)))
        labels = ("", *(s.name for s in inst.scenarios))
        return StageChain(graphs, links, labels)
    graphs = tuple(inst.stages)
    links = tuple((i, i + 1) for i in range(len(graphs) - 1))
    return StageChain(graphs, links, tuple(str(i + 1) for i in range(len(graphs))))


@dataclass(frozen=True)
class ObjectiveCoefficients:
    """Weights of ``sum alpha*y + sum beta*delta + b*d``.

    ``alpha[i]`` belongs to stage copy ``i`` (any sign); ``beta[link]`` and
    ``b[link]`` live on the vertices shared by the link and must be >= 0.
    """

    alpha: tuple[Mapping[str, Fraction], ...]
    beta: Mapping[Link, Mapping[str, Fraction]]
    b: Mapping[Link, Mapping[str, Fraction]]

    def __post_init__(self):
        for name, table in (("beta", self.beta), ("b", self.b)):
            for link, weights in table.items():
                for v, w in weights.items():
                    if w < 0:
                        raise ValueError(f"{name} of link {link} at {v} is negative; "
                                         "the LP would be unbounded")

    def a(self, i: int, v: str) -> Fraction:
        return self.alpha[i].get(v, Fraction(0))

    def beta_at(self, link: Link, v: str) -> Fraction:
        return self.beta.get(link, {}).get(v, Fraction(0))

    def b_at(self, link: Link, v: str) -> Fraction:
        return self.b.get(link, {}).get(v, Fraction(0))


def objective_from_instance(inst: TwoStageInstance | MultistageInstance) -> ObjectiveCoefficients:
    """Coefficients of the expected (or total) loss for the instance's mode."""
    chain = chain_from_instance(inst)
    alpha = tuple({} for _ in chain.graphs)
    beta: dict[Link, dict[str, Fraction]] = {}
    b: dict[Link, dict[str, Fraction]] = {}
    for k, link in enumerate(chain.links):
        if isinstance(inst, TwoStageInstance):
            p = inst.scenarios[k].prob
            weights = {v: p * inst.weight(v) for v in chain.shared(link)}
        else:
            lam = inst.lam[k]
            weights = {v: lam.get(v, Fraction(0)) for v in chain.shared(link)}
        zero = {v: Fraction(0) for v in weights}
        beta[link] = weights if inst.mode in (Mode.ABS, Mode.POS) else zero
        b[link] = weights if inst.mode in (Mode.ABS, Mode.NEG) else dict(zero)
    return ObjectiveCoefficients(alpha, beta, b)


def epsilon(coeffs: ObjectiveCoefficients) -> Fraction:
    total = Fraction(1)
    for weights in coeffs.alpha:
        total += sum((abs(w) for w in weights.values()), Fraction(0))
    for table in (coeffs.beta, coeffs.b):
        for weights in table.values():
            total += sum(weights.values(), Fraction(0))
    return 1 / total


@dataclass(frozen=True)
class AuxNetwork:
    network: FlowNetwork
    scale: int          # every rational capacity was multiplied by this
    eps: Fraction
    huge: int           # stand-in capacity of the uncapacitated edge arcs


def build_aux_graph(chain: StageChain, coeffs: ObjectiveCoefficients, eps: Fraction) -> AuxNetwork:
    """Auxiliary s-t network whose minimum cut is an optimal 0/1 dual.

    Node ``(i, v)`` is vertex ``v`` in stage copy ``i``.
    """
    nodes: list = [SOURCE, SINK]
    labels = {SOURCE: "s", SINK: "t"}
    rational_arcs: list[tuple] = []
    edge_arcs: list[tuple] = []
    for i, g in enumerate(chain.graphs):
        suffix = f"^{{{chain.label(i)}}}" if chain.label(i) else ""
        for v in sorted(g.side):
            nodes.append((i, v))
            labels[(i, v)] = f"{v}{suffix}"
            cap = 1 + eps * coeffs.a(i, v)
            if g.side[v] is Side.LEFT:
                rational_arcs.append((SOURCE, (i, v), cap, "s-arc"))
            else:
                rational_arcs.append(((i, v), SINK, cap, "t-arc"))
        for u, v in g.sorted_edges():
            edge_arcs.append(((i, u), (i, v)))
    for link in chain.links:
        i, j = link
        for v in chain.shared(link):
            cap_delta = eps * coeffs.beta_at(link, v)
            cap_d = eps * coeffs.b_at(link, v)
            if chain.graphs[i].side[v] is Side.LEFT:
                rational_arcs.append(((j, v), (i, v), cap_delta, "delta-arc"))
                rational_arcs.append(((i, v), (j, v), cap_d, "d-arc"))
            else:
                rational_arcs.append(((i, v), (j, v), cap_delta, "delta-arc"))
                rational_arcs.append(((j, v), (i, v), cap_d, "d-arc"))
    for tail, head, cap, tag in rational_arcs:
        if cap < 0:
            raise ValueError(f"negative capacity {cap} on {tag} {tail}->{head}")
    scale = common_denominator([c for _, _, c, _ in rational_arcs] or [1])
    arcs = [Arc(t, h, int(c * scale), tag) for t, h, c, tag in rational_arcs]
    huge = 1 + sum(a.capacity for a in arcs)
    arcs.extend(Arc(t, h, huge, "edge-arc") for t, h in edge_arcs)
    return AuxNetwork(FlowNetwork(tuple(nodes), tuple(arcs), labels=labels), scale, eps, huge)


@dataclass
class DualSolution:
    """Variables of the dual of the max-flow LP, indexed like the chain."""

    y: tuple[dict[str, Fraction], ...]
    gamma: tuple[dict[str, Fraction], ...]
    delta: dict[Link, dict[str, Fraction]]
    d: dict[Link, dict[str, Fraction]]

    def copy(self) -> "DualSolution":
        return DualSolution(tuple(dict(m) for m in self.y), tuple(dict(m) for m in self.gamma),
                            {k: dict(m) for k, m in self.delta.items()},
                            {k: dict(m) for k, m in self.d.items()})


def dual_violations(dual: DualSolution, chain: StageChain) -> list[str]:
    """Every violated constraint of the dual LP, as readable strings."""
    bad = []
    for i, g in enumerate(chain.graphs):
        y, gam = dual.y[i], dual.gamma[i]
        for v in sorted(g.side):
            if y[v] < 0:
                bad.append(f"y[{i}][{v}] < 0")
            if g.side[v] is Side.LEFT and gam[v] + y[v] < 1:
                bad.append(f"gamma+y >= 1 fails at ({i}, {v})")
            if g.side[v] is Side.RIGHT and y[v] - gam[v] < 0:
                bad.append(f"y-gamma >= 0 fails at ({i}, {v})")
        for u, v in g.sorted_edges():
            if gam[v] - gam[u] < 0:
                bad.append(f"gamma[{v}]-gamma[{u}] >= 0 fails in copy {i}")
    for link in chain.links:
        i, j = link
        for v in chain.shared(link):
            dl, dd = dual.delta[link][v], dual.d[link][v]
            gi, gj = dual.gamma[i][v], dual.gamma[j][v]
            if dl < 0 or dd < 0:
                bad.append(f"negative delta/d at {v} on link {link}")
            if chain.graphs[i].side[v] is Side.LEFT:
                ok_delta, ok_d = gi - gj + dl >= 0, gj - gi + dd >= 0
            else:
                ok_delta, ok_d = gj - gi + dl >= 0, gi - gj + dd >= 0
            if not ok_delta:
                bad.append(f"delta constraint fails at {v} on link {link}")
            if not ok_d:
                bad.append(f"d constraint fails at {v} on link {link}")
    return bad


def dual_objective(dual: DualSolution, chain: StageChain, coeffs: ObjectiveCoefficients,
                   eps: Fraction) -> Fraction:
    total = Fraction(0)
    for i, g in enumerate(chain.graphs):
        for v in g.side:
            total += (1 + eps * coeffs.a(i, v)) * dual.y[i][v]
    for link in chain.links:
        for v in chain.shared(link):
            total += eps * (coeffs.beta_at(link, v) * dual.delta[link][v]
                            + coeffs.b_at(link, v) * dual.d[link][v])
    return total


def cut_to_dual(aux: AuxNetwork, cut: CutCertificate, chain: StageChain) -> DualSolution:
    """Read the 0/1 dual off the cut: potential 1 on the source side, and a
    capacitated arc's variable is 1 iff the arc leaves the source side."""
    side = cut.source_side
    gamma = tuple({v: Fraction(int((i, v) in side)) for v in sorted(g.side)}
                  for i, g in enumerate(chain.graphs))
    y = tuple({v: (1 - gam[v]) if g.side[v] is Side.LEFT else gam[v] for v in gam}
              for g, gam in zip(chain.graphs, gamma))
    delta: dict[Link, dict[str, Fraction]] = {}
    d: dict[Link, dict[str, Fraction]] = {}
    for link in chain.links:
        i, j = link
        delta[link], d[link] = {}, {}
        for v in chain.shared(link):
            gi, gj = gamma[i][v], gamma[j][v]
            if chain.graphs[i].side[v] is Side.LEFT:
                # delta-arc (j,v)->(i,v), d-arc (i,v)->(j,v)
                delta[link][v] = Fraction(int(gj == 1 and gi == 0))
                d[link][v] = Fraction(int(gi == 1 and gj == 0))
            else:
                delta[link][v] = Fraction(int(gi == 1 and gj == 0))
                d[link][v] = Fraction(int(gj == 1 and gi == 0))
    dual = DualSolution(y, gamma, delta, d)
    bad = dual_violations(dual, chain)
    assert not bad, f"cut does not give a feasible dual: {bad[:5]}"
    return dual


def normalize_dual(dual: DualSolution, chain: StageChain) -> DualSolution:
    """Make ``gamma + y = 1`` on left copies and ``y - gamma = 0`` on right copies.

    Left potentials are capped at 1 and right potentials raised to 0; the
    capped map is monotone and 1-Lipschitz, so every link and edge constraint
    survives, and ``y`` only decreases.  For an optimal dual the objective is
    therefore unchanged.
    """
    out = dual.copy()
    for i, g in enumerate(chain.graphs):
        for v, s in g.side.items():
            gam = out.gamma[i][v]
            if s is Side.LEFT:
                gam = min(gam, Fraction(1))
                out.gamma[i][v], out.y[i][v] = gam, 1 - gam
            else:
                gam = max(gam, Fraction(0))
                out.gamma[i][v], out.y[i][v] = gam, gam
    return out


def is_normalized(dual: DualSolution, chain: StageChain) -> bool:
    for i, g in enumerate(chain.graphs):
        for v, s in g.side.items():
            gam, y = dual.gamma[i][v], dual.y[i][v]
            if (s is Side.LEFT and gam + y != 1) or (s is Side.RIGHT and y != gam):
                return False
    return True


@dataclass
class ChainSolution:
    y: tuple[dict[str, Fraction], ...]
    delta: dict[Link, dict[str, Fraction]]
    d: dict[Link, dict[str, Fraction]]
    objective: Fraction
    eps: Fraction
    scale: int
    nus: tuple[int, ...]
    cut_value: int = 0
    flow_value: int = 0
    dual_objective: Fraction = Fraction(0)
    cut_size: int = 0
    node_count: int = 0
    arc_count: int = 0
    network: FlowNetwork | None = field(default=None, repr=False)


def primal_objective(y, delta, d, chain: StageChain, coeffs: ObjectiveCoefficients) -> Fraction:
    total = Fraction(0)
    for i, g in enumerate(chain.graphs):
        for v in g.side:
            total += coeffs.a(i, v) * y[i][v]
    for link in chain.links:
        for v in chain.shared(link):
            total += coeffs.beta_at(link, v) * delta[link][v] + coeffs.b_at(link, v) * d[link][v]
    return total


def lift_solution(dual: DualSolution, chain: StageChain,
                  coeffs: ObjectiveCoefficients) -> tuple[tuple[dict, ...], dict, dict, Fraction]:
    """Drop the potentials and check the result lies in every stage's core."""
    y = tuple(dict(m) for m in dual.y)
    for i, g in enumerate(chain.graphs):
        total = sum(y[i].values(), Fraction(0))
        assert total == nu(g), f"copy {i}: allocation sums to {total}, matching number is {nu(g)}"
    for link in chain.links:
        i, j = link
        for v in chain.shared(link):
            assert dual.delta[link][v] >= y[i][v] - y[j][v]
            assert dual.d[link][v] >= y[j][v] - y[i][v]
    delta = {k: dict(m) for k, m in dual.delta.items()}
    d = {k: dict(m) for k, m in dual.d.items()}
    return y, delta, d, primal_objective(y, delta, d, chain, coeffs)


def solve_chain(chain: StageChain, alpha, beta, b, keep_network: bool = False) -> ChainSolution:
    """Optimal 0/1 solution of the chain LP for the given objective."""
    coeffs = ObjectiveCoefficients(tuple(alpha), beta, b)
    return solve_with(chain, coeffs, keep_network=keep_network)


def solve_with(chain: StageChain, coeffs: ObjectiveCoefficients,
               keep_network: bool = False) -> ChainSolution:
    eps = epsilon(coeffs)
    nus = tuple(nu(g) for g in chain.graphs)
    if not any(g.edges for g in chain.graphs):
        y = tuple({v: Fraction(0) for v in sorted(g.side)} for g in chain.graphs)
        zero = {link: {v: Fraction(0) for v in chain.shared(link)} for link in chain.links}
        return ChainSolution(y, zero, {k: dict(m) for k, m in zero.items()},
                             Fraction(0), eps, 1, nus)
    aux = build_aux_graph(chain, coeffs, eps)
    value, flow = max_flow(aux.network)
    cut = min_cut(aux.network, flow)
    dual = normalize_dual(cut_to_dual(aux, cut, chain), chain)
    dual_value = dual_objective(dual, chain, coeffs, eps)
    assert cut.value == value, "cut value differs from flow value"
    assert dual_value == Fraction(value, aux.scale), \
        f"strong duality violated: {dual_value} != {value}/{aux.scale}"
    y, delta, d, objective = lift_solution(dual, chain, coeffs)
    crossing = sum(1 for a in aux.network.arcs
                   if a.tail in cut.source_side and a.head not in cut.source_side)
    return ChainSolution(y, delta, d, objective, eps, aux.scale, nus,
                         cut_value=cut.value, flow_value=value, dual_objective=dual_value,
                         cut_size=crossing, node_count=len(aux.network.nodes),
                         arc_count=len(aux.network.arcs),
                         network=aux.network if keep_network else None)
