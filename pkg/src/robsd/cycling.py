"""Two small problems on which dropping every zero-weight vertex makes SD revisit an active set.

Both use an explicit three-point feasible set and a two-scenario objective.
The preference hooks pin down the (non-unique) subgradient and weight
choices, so the traces are reproducible rather than solver-dependent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ScenarioSet
from .oracles import EnumerationOracle
from .sd import DropRule, IterationRecord, SdConfig, SdResult, run_sd


@dataclass
class CyclingProblem:
    scenarios: ScenarioSet
    vertices: np.ndarray
    start: np.ndarray
    dual_preference: list[int]
    primal_preference: list[int] | None = None

    def oracle(self) -> EnumerationOracle:
        return EnumerationOracle(self.vertices)


def example1() -> CyclingProblem:
    """``max{x1 - x2, x2 - x1}`` over ``{(0,0), (0,1), (1,0)}`` from the origin."""
    return CyclingProblem(
        scenarios=ScenarioSet([[1.0, -1.0], [-1.0, 1.0]]),
        vertices=np.array([[0, 0], [0, 1], [1, 0]], dtype=np.int8),
        start=np.array([0, 0], dtype=np.int8),
        # subgradients (1,-1), (-1,1), (1,-1), ...
        dual_preference=[0, 1],
    )


def example2() -> CyclingProblem:
    """``max{x1, x2}`` over ``{(1,1), (0,1), (1,0)}`` from ``(1,1)``."""
    return CyclingProblem(
        scenarios=ScenarioSet([[1.0, 0.0], [0.0, 1.0]]),
        vertices=np.array([[1, 1], [0, 1], [1, 0]], dtype=np.int8),
        start=np.array([1, 1], dtype=np.int8),
        dual_preference=[0],
        primal_preference=[0],
    )


def replay(problem: CyclingProblem, drop_rule=DropRule.D1, perturbation: float = 0.0,
           seed: int = 0, use_preferences: bool = True,
           max_iterations: int = 50, dual_preference=None,
           primal_preference=None) -> tuple[SdResult, list[IterationRecord]]:
    """Run SD from the problem's start vertex, recording every iteration.

    Explicit ``dual_preference``/``primal_preference`` override the problem's
    stored choices; ``use_preferences=False`` leaves degeneracy to the LP.
    """
    if dual_preference is None and use_preferences:
        dual_preference = problem.dual_preference
    if primal_preference is None and use_preferences:
        primal_preference = problem.primal_preference
    trace: list[IterationRecord] = []
    config = SdConfig(
        drop_rule=drop_rule,
        perturbation_magnitude=perturbation,
        rng_seed=seed,
        max_iterations=max_iterations,
        dual_preference=dual_preference,
        primal_preference=primal_preference,
        observer=trace.append,
    )
    result = run_sd(problem.oracle(), problem.scenarios, [problem.start], config)
    return result, trace


def reproduce_example1(**kwargs):
    return replay(example1(), **kwargs)


def reproduce_example2(**kwargs):
    """Replay the second example; with rule d1 the set kept at iteration 2 equals ``V^1``."""
    return replay(example2(), **kwargs)
