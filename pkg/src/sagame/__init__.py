"""Integral core solutions for two-stage and multistage stochastic assignment games."""

from sagame.graph import BipartiteGraph, Side, is_core, max_matching, min_vertex_cover
from sagame.instance import Mode, MultistageInstance, Scenario, TwoStageInstance, validate
from sagame.solver import (SolveResult, brute_force_multistage, brute_force_two_stage,
                           evaluate_first_stage, solve_multistage, solve_mvc, solve_two_stage)

__all__ = [
    "BipartiteGraph", "Side", "is_core", "max_matching", "min_vertex_cover",
    "Mode", "MultistageInstance", "Scenario", "TwoStageInstance", "validate",
    "SolveResult", "brute_force_multistage", "brute_force_two_stage",
    "evaluate_first_stage", "solve_multistage", "solve_mvc", "solve_two_stage",
]
