"""Simplicial decomposition for ``min_{x in conv(X)} max_j costs_j @ x + constant_j``.

Each iteration minimises over the hull of the active set (master LP), asks
the linear oracle for a vertex minimising the resulting subgradient, and
either certifies optimality or grows the active set.  Every iteration also
yields a valid lower bound ``f(x) + g @ (x_hat - x)``.
"""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .master import ActiveSet, MasterSolution, solve_master
from .model import ScenarioSet, evaluate_f
from .oracles import Fixings, LinearOracle, OracleError

log = logging.getLogger(__name__)

ALPHA_ZERO = 1e-10
CYCLE_TOL = 1e-9


class DropRule(str, enum.Enum):
    D0 = "d0"  # keep every vertex
    D1 = "d1"  # drop every vertex with zero weight
    D2 = "d2"  # drop zero-weight vertices only along strict ascent directions


class SdStatus(str, enum.Enum):
    OPTIMAL = "OPTIMAL"
    CUTOFF = "CUTOFF"
    ITER_LIMIT = "ITER_LIMIT"
    CYCLE_DETECTED = "CYCLE_DETECTED"


Preference = int | Sequence[int | None] | Callable[[int], int | None] | None


@dataclass
class SdConfig:
    drop_rule: DropRule = DropRule.D0
    d2_epsilon: float = 1e-6
    stop_tol: float = 1e-6
    max_iterations: int = 100_000
    perturbation_magnitude: float = 0.0
    rng_seed: int = 0
    lb_callback: Callable[[float], None] | None = None
    cutoff: float | None = None
    # replay hooks for degenerate masters; see solve_master
    dual_preference: Preference = None
    primal_preference: Preference = None
    observer: Callable[["IterationRecord"], None] | None = None
    deadline: float | None = None  # absolute time.perf_counter() value

    def __post_init__(self):
        self.drop_rule = DropRule(self.drop_rule)
        if self.d2_epsilon <= 0:
            raise ValueError("d2_epsilon must be positive")
        if self.perturbation_magnitude < 0:
            raise ValueError("perturbation_magnitude must be non-negative")


@dataclass
class IterationRecord:
    k: int
    vertices: list[np.ndarray]
    master: MasterSolution
    f_value: float
    x_hat: np.ndarray
    lower_bound: float
    kept: list[np.ndarray]
    dropped: list[np.ndarray]
    next_vertices: list[np.ndarray] = field(default_factory=list)


@dataclass
class SdResult:
    status: SdStatus
    x_star: np.ndarray
    value: float
    best_lb: float
    iterations: int
    final_V: ActiveSet
    incumbent_vertex: np.ndarray
    incumbent_value: float
    lb_history: list[float]
    repeated_set: list[np.ndarray] | None = None


def lemma_lower_bound(f_xk: float, c_k, x_k, x_hat) -> float:
    """Lower bound ``f(x_k) + c_k @ (x_hat - x_k)`` on the relaxation optimum."""
    return float(f_xk + np.dot(c_k, np.asarray(x_hat, dtype=float) - np.asarray(x_k, dtype=float)))


def _pick(pref: Preference, k: int):
    if pref is None or isinstance(pref, (int, np.integer)):
        return pref
    if callable(pref):
        return pref(k)
    return pref[(k - 1) % len(pref)]


def _bootstrap(oracle, scenarios, fixings):
    v = oracle.minimize(scenarios.costs[0], fixings)
    if v is None:
        raise OracleError("oracle reports the (sub)problem infeasible")
    return v


def run_sd(oracle: LinearOracle, scenarios: ScenarioSet, initial_V: Sequence = (),
           config: SdConfig | None = None, fixings: Fixings | None = None) -> SdResult:
    """Minimise the worst-case objective over ``conv(X)`` (restricted by ``fixings``)."""
    config = config or SdConfig()
    if oracle.n != scenarios.n:
        raise ValueError(f"oracle dimension {oracle.n} does not match scenarios ({scenarios.n})")
    eps = config.perturbation_magnitude
    work = scenarios.perturbed(eps, config.rng_seed) if eps > 0 else scenarios
    # bounds of the perturbed problem, made valid for the original one
    lb_shift = eps * (1 + scenarios.n)

    V = ActiveSet(work)
    for v in initial_V:
        V.add(v)
    if len(V) == 0:
        V.add(_bootstrap(oracle, work, fixings))

    inc_vertex, inc_value = None, np.inf

    def offer(v):
        nonlocal inc_vertex, inc_value
        val = evaluate_f(np.asarray(v, dtype=float), scenarios)[0]
        if val < inc_value:
            inc_vertex, inc_value = np.asarray(v, dtype=np.int8).copy(), val

    for v in V:
        offer(v)

    drop_rule = config.drop_rule
    seen = {V.key(): np.inf}
    lb_history: list[float] = []
    best_lb = -np.inf
    status = SdStatus.ITER_LIMIT
    repeated = None
    ms = None
    k = 0

    while k < config.max_iterations:
        if config.deadline is not None and time.perf_counter() > config.deadline:
            break
        k += 1
        ms = solve_master(V, dual_preference=_pick(config.dual_preference, k),
                          primal_preference=_pick(config.primal_preference, k))
        f_xk = evaluate_f(ms.x, work)[0]
        x_hat = oracle.minimize(ms.subgradient, fixings)
        if x_hat is None:
            raise OracleError("oracle returned INFEASIBLE for a nonempty subproblem")
        offer(x_hat)
        gap = float(ms.subgradient @ ms.x - ms.subgradient @ x_hat)
        lb = lemma_lower_bound(f_xk, ms.subgradient, ms.x, x_hat) - lb_shift

        if gap > config.stop_tol and x_hat in V:
            # by the normal-cone property this is LP round-off: re-solve exactly once
            ms = solve_master(V, bland=True)
            f_xk = evaluate_f(ms.x, work)[0]
            x_hat = oracle.minimize(ms.subgradient, fixings)
            offer(x_hat)
            gap = float(ms.subgradient @ ms.x - ms.subgradient @ x_hat)
            lb = lemma_lower_bound(f_xk, ms.subgradient, ms.x, x_hat) - lb_shift
            if x_hat in V:
                log.debug("k=%d oracle vertex already active; stopping at certified bound", k)
                gap = 0.0

        lb_history.append(lb)
        best_lb = max(best_lb, lb)
        if config.lb_callback is not None:
            config.lb_callback(lb)

        before = list(V.vertices)
        if gap <= config.stop_tol:
            status = SdStatus.OPTIMAL
            _emit(config, log, k, before, ms, f_xk, x_hat, lb, before, [], before)
            break
        if config.cutoff is not None and best_lb >= config.cutoff:
            status = SdStatus.CUTOFF
            _emit(config, log, k, before, ms, f_xk, x_hat, lb, before, [], before)
            break

        if drop_rule is DropRule.D1:
            mask = ms.alpha > ALPHA_ZERO
        elif drop_rule is DropRule.D2:
            ascent = V.matrix() @ ms.subgradient - ms.subgradient @ ms.x
            mask = (ms.alpha > ALPHA_ZERO) | (ascent < config.d2_epsilon)
        else:
            mask = np.ones(len(V), dtype=bool)
        dropped = V.keep(mask)
        kept = list(V.vertices)
        V.add(x_hat)
        _emit(config, log, k, before, ms, f_xk, x_hat, lb, kept, dropped, list(V.vertices))

        if drop_rule is not DropRule.D0:
            key = V.key()
            prior = seen.get(key)
            if prior is not None and prior - f_xk <= CYCLE_TOL:
                status = SdStatus.CYCLE_DETECTED
                repeated = list(V.vertices)
                break
            seen[key] = f_xk

    if ms is None:
        ms = solve_master(V)
    x_star = ms.x
    return SdResult(status=status, x_star=x_star, value=evaluate_f(x_star, scenarios)[0],
                    best_lb=best_lb, iterations=k, final_V=V, incumbent_vertex=inc_vertex,
                    incumbent_value=inc_value, lb_history=lb_history, repeated_set=repeated)


def _emit(config, logger, k, before, ms, f_xk, x_hat, lb, kept, dropped, after):
    logger.debug("k=%d z=%.10g lb=%.10g |V|=%d drops=%d", k, ms.z, lb, len(after), len(dropped))
    if config.observer is not None:
        config.observer(IterationRecord(k=k, vertices=before, master=ms, f_value=f_xk,
                                        x_hat=x_hat, lower_bound=lb, kept=kept,
                                        dropped=dropped, next_vertices=after))
