import json
from fractions import Fraction

import pytest

from sagame.graph import BipartiteGraph, Side, is_core
from sagame.instance import (ALPHA, BETA1, BETA2, ExplicitSampler, GenParams, HardnessSampler,
                             InstanceFormatError, Mode, MultistageInstance, PointMassSampler,
                             Scenario, SimpleGraph, TwoStageInstance, build_hardness_instance,
                             dumps, enumerate_support, gen_random, instance_to_json, loads,
                             validate)
from sagame.rng import Xoshiro256, splitmix64
from sagame.solver import solve_two_stage
from conftest import split_instance

K2 = SimpleGraph((), (("u", "v"),))
TRIANGLE = SimpleGraph((), (("a", "b"), ("b", "c"), ("a", "c")))


# ---------------------------------------------------------------- generator

def test_xoshiro_reference_vector():
    rng = Xoshiro256(0)
    rng.s = [1, 2, 3, 4]
    assert [rng.next_u64() for _ in range(6)] == [
        11520, 0, 1509978240, 1215971899390074240, 1216172134540287360, 607988272756665600]


def test_splitmix_reference_value():
    assert splitmix64(0)[1] == 0xE220A8397B1DCDAF


def test_below_and_bernoulli_ranges():
    rng = Xoshiro256(5)
    draws = [rng.below(7) for _ in range(2000)]
    assert set(draws) == set(range(7))
    assert all(rng.below(2**70) < 2**70 for _ in range(50))
    assert not any(rng.bernoulli(Fraction(0)) for _ in range(20))
    assert all(rng.bernoulli(Fraction(1)) for _ in range(20))
    hits = sum(rng.bernoulli(Fraction(1, 4)) for _ in range(4000))
    assert 800 < hits < 1200


# ---------------------------------------------------------------- validation

def test_split_instance_is_valid():
    assert validate(split_instance()) == []


def test_probability_sum_violation():
    inst = split_instance()
    s1, s2 = inst.scenarios
    bad = TwoStageInstance(inst.g0, (s1, Scenario("S2", Fraction(1, 3), s2.graph)), inst.lam, inst.mode)
    assert "probabilities sum to 5/6" in validate(bad)


def test_bipartition_violation():
    inst = split_instance()
    flipped = BipartiteGraph.build(["b"], ["a"], [("a", "b")])
    bad = TwoStageInstance(inst.g0, (Scenario("S1", Fraction(1), flipped),), inst.lam, inst.mode)
    problems = validate(bad)
    assert any(p.startswith("bipartition mismatch at a") for p in problems)


def test_other_violations():
    inst = split_instance()
    s1, s2 = inst.scenarios
    bad = TwoStageInstance(inst.g0, (Scenario("S1", Fraction(3, 2), s1.graph),
                                     Scenario("S1", Fraction(-1, 2), s2.graph)),
                           {"a": Fraction(-1), "zz": Fraction(1)}, inst.mode)
    problems = validate(bad)
    assert "duplicate scenario name S1" in problems
    assert "probability of scenario S1 is not positive" in problems
    assert "lambda at a is negative" in problems
    assert any("zz" in p for p in problems)


def test_multistage_validation():
    g1 = BipartiteGraph.build(["a"], ["b"], [("a", "b")])
    g2 = BipartiteGraph.build(["b"], ["a"], [("a", "b")])
    assert validate(MultistageInstance((g1,), (), Mode.ABS)) != []
    problems = validate(MultistageInstance((g1, g2), ({},), Mode.ABS))
    assert any(p.startswith("bipartition mismatch at") for p in problems)
    ok = MultistageInstance((g1, g1), ({"a": Fraction(1)},), Mode.ABS)
    assert validate(ok) == []
    bad = MultistageInstance((g1, g1), ({"a": Fraction(-1), "q": Fraction(1)},), Mode.ABS)
    assert len(validate(bad)) == 2


# ---------------------------------------------------------------- file format

def test_json_roundtrip_two_stage():
    inst = split_instance(Mode.NEG)
    text = dumps(inst)
    again = loads(text)
    assert again == inst
    assert dumps(again) == text
    data = json.loads(text)
    assert data["kind"] == "two-stage" and data["mode"] == "neg"
    assert data["scenarios"][0]["prob"] == "1/2"


def test_json_roundtrip_multistage():
    g1 = BipartiteGraph.build(["a"], ["b"], [("a", "b")])
    g2 = BipartiteGraph.build(["a"], ["b", "c"], [("a", "c")])
    inst = MultistageInstance((g1, g2), ({"a": Fraction(2, 3), "b": Fraction(1)},), Mode.POS)
    assert loads(dumps(inst)) == inst


def test_multistage_single_lambda_map_is_restricted_to_shared_vertices():
    data = {"kind": "multistage", "left": ["a"], "right": ["b", "c"],
            "stages": [{"vertices": ["a", "b"], "edges": [["a", "b"]]},
                       {"vertices": ["a", "c"], "edges": [["a", "c"]]}],
            "lambda": {"a": "1", "b": "1", "c": "1"}, "mode": "abs"}
    inst = loads(json.dumps(data))
    assert inst.lam == ({"a": Fraction(1)},)


def _split_json():
    return instance_to_json(split_instance())


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(extra=1),
    lambda d: d.pop("mode"),
    lambda d: d.update(mode="absolute"),
    lambda d: d["stage0"].update(weights=[]),
    lambda d: d["scenarios"][0].update(prob="0.5"),
    lambda d: d["scenarios"][0].update(prob="1/0"),
    lambda d: d.update(right=["b", "c", "a"]),
    lambda d: d["stage0"]["vertices"].append("zz"),
    lambda d: d["stage0"]["edges"].append(["b", "c"]),
    lambda d: d.update(kind="three-stage"),
])
def test_malformed_files_rejected(mutate):
    data = _split_json()
    mutate(data)
    with pytest.raises(InstanceFormatError):
        loads(json.dumps(data))


def test_invalid_json_rejected():
    with pytest.raises(InstanceFormatError):
        loads("{not json")


# ---------------------------------------------------------------- hardness construction

def test_hardness_k2():
    h = build_hardness_instance(K2)
    assert h.g0.vertices == {"u_1", "v_1", "u-v", ALPHA, BETA1, BETA2}
    assert len(h.g0.edges) == 5
    assert set(h.g0.left) == {"u_1", "v_1", ALPHA}
    assert set(h.g0.right) == {"u-v", BETA1, BETA2}


def test_hardness_triangle_size():
    h = build_hardness_instance(TRIANGLE)
    assert len(h.g0.side) == 3 * 2 + 3 + 3


@pytest.mark.parametrize("base", [K2, TRIANGLE, SimpleGraph(("x",), (("a", "b"), ("b", "c")))])
def test_hardness_lambda_and_bipartition(base):
    h = build_hardness_instance(base)
    assert {v for v, w in h.lam.items() if w} == {ALPHA}
    assert h.lam[ALPHA] == 1
    assert h.mode is Mode.POS
    copies = {v for v in h.g0.side if "_" in v}
    assert set(h.g0.left) == copies | {ALPHA}
    assert set(h.g0.right) == {f"{u}-{v}" for u, v in base.edges} | {BETA1, BETA2}
    assert validate(h.explicit()) == []


def test_hardness_rejects_edgeless():
    with pytest.raises(ValueError):
        build_hardness_instance(SimpleGraph(("a", "b"), ()))


def test_support_sizes():
    for base, n in ((K2, 2), (TRIANGLE, 3)):
        support = enumerate_support(build_hardness_instance(base).sampler)
        assert len(support) == 2 ** n
        assert all(p == Fraction(1, 2 ** n) for _, p, _ in support)
        assert sum(p for _, p, _ in support) == 1


def test_support_full_scenario_for_k2():
    h = build_hardness_instance(K2)
    full = dict((name, g) for name, _, g in enumerate_support(h.sampler))["S11"]
    assert ("u_1", "u-v") in full.edges and ("v_1", "u-v") in full.edges
    assert ALPHA in full.side and BETA1 not in full.side
    empty = dict((name, g) for name, _, g in enumerate_support(h.sampler))["S00"]
    assert empty.vertices == {"u-v", ALPHA}


def test_support_guard():
    big = SimpleGraph(tuple(f"v{i}" for i in range(21)), (("v0", "v1"),))
    with pytest.raises(ValueError):
        enumerate_support(HardnessSampler(big, build_hardness_instance(big).g0))


def test_hardness_sampler_draws_support_members():
    h = build_hardness_instance(TRIANGLE)
    key = lambda g: (frozenset(g.side.items()), g.edges)
    support = {key(g) for _, _, g in enumerate_support(h.sampler)}
    rng = Xoshiro256(3)
    draws = {key(h.sampler.draw(rng)) for _ in range(200)}
    assert draws == support


def test_forced_core_values_on_hardness_instance():
    h = build_hardness_instance(TRIANGLE)
    y = solve_two_stage(h.explicit()).first_stage
    assert y[ALPHA] == 1 and y[BETA1] == 0 and y[BETA2] == 0


def test_simple_graph_parse():
    g = SimpleGraph.parse("# comment\nu v\nw\n\nv x  # trailing\n")
    assert g.vertices == ("u", "v", "w", "x")
    assert g.edges == (("u", "v"), ("v", "x"))
    with pytest.raises(InstanceFormatError):
        SimpleGraph.parse("a b c\n")


# ---------------------------------------------------------------- samplers

def test_point_mass_sampler():
    g = BipartiteGraph.build(["a"], ["b"], [("a", "b")])
    s = PointMassSampler(g)
    assert s.draw(Xoshiro256(1)) is g
    assert s.support() == [("S", Fraction(1), g)]


def test_explicit_sampler_frequencies():
    inst = split_instance()
    s1, s2 = inst.scenarios
    sampler = ExplicitSampler((Scenario("S1", Fraction(1, 4), s1.graph),
                               Scenario("S2", Fraction(3, 4), s2.graph)))
    rng = Xoshiro256(11)
    hits = sum(sampler.draw(rng) is s1.graph for _ in range(4000))
    assert 850 < hits < 1150


# ---------------------------------------------------------------- random instances

def test_density_zero_gives_edgeless_stages():
    inst = gen_random(GenParams(n_left=3, n_right=2, density=Fraction(0), n_scenarios=3, seed=9))
    assert not inst.g0.edges and not any(s.graph.edges for s in inst.scenarios)
    result = solve_two_stage(inst)
    assert all(x == 0 for y in result.allocations() for x in y.values())


def test_density_one_gives_complete_stages():
    inst = gen_random(GenParams(n_left=3, n_right=3, density=Fraction(1), n_scenarios=2, seed=4))
    for g in (inst.g0, *(s.graph for s in inst.scenarios)):
        assert len(g.edges) == len(g.left) * len(g.right)


def test_generation_is_deterministic():
    params = GenParams(n_left=4, n_right=3, n_scenarios=3, seed=123456789)
    assert dumps(gen_random(params)) == dumps(gen_random(params))
    other = GenParams(n_left=4, n_right=3, n_scenarios=3, seed=123456790)
    assert dumps(gen_random(params)) != dumps(gen_random(other))


@pytest.mark.parametrize("seed", range(30))
def test_generated_instances_validate(seed):
    inst = gen_random(GenParams(n_left=1 + seed % 4, n_right=2, n_scenarios=1 + seed % 3,
                                seed=seed, new_players=2))
    assert validate(inst) == []
    assert sum(s.prob for s in inst.scenarios) == 1


def test_density_out_of_range():
    with pytest.raises(ValueError):
        gen_random(GenParams(density=Fraction(3, 2)))
