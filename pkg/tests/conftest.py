from fractions import Fraction

import pytest

from sagame.graph import BipartiteGraph
from sagame.instance import Mode, Scenario, TwoStageInstance


def split_instance(mode=Mode.ABS, lam=1) -> TwoStageInstance:
    """V0 = {a, b, c}, E0 = {ab, ac}; S1 keeps {a, b}, S2 keeps {a, c}, each with probability 1/2."""
    g0 = BipartiteGraph.build(["a"], ["b", "c"], [("a", "b"), ("a", "c")])
    s1 = BipartiteGraph.build(["a"], ["b"], [("a", "b")])
    s2 = BipartiteGraph.build(["a"], ["c"], [("a", "c")])
    return TwoStageInstance(
        g0,
        (Scenario("S1", Fraction(1, 2), s1), Scenario("S2", Fraction(1, 2), s2)),
        {v: Fraction(lam) for v in "abc"},
        mode,
    )


def edge_loss_instance(mode=Mode.POS) -> TwoStageInstance:
    """G0 is the edge ab; the only scenario keeps a and b but drops the edge."""
    g0 = BipartiteGraph.build(["a"], ["b"], [("a", "b")])
    gs = BipartiteGraph.build(["a"], ["b"], [])
    return TwoStageInstance(g0, (Scenario("S", Fraction(1), gs),),
                            {"a": Fraction(1), "b": Fraction(1)}, mode)


@pytest.fixture
def split():
    return split_instance()


@pytest.fixture
def star():
    return BipartiteGraph.build(["a"], ["b", "c"], [("a", "b"), ("a", "c")])


@pytest.fixture
def square():
    # 4-cycle a-b, c-b, c-d, a-d
    return BipartiteGraph.build(["a", "c"], ["b", "d"], [("a", "b"), ("c", "b"), ("c", "d"), ("a", "d")])


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
