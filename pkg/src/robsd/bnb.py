"""Depth-first branch-and-bound with simplicial-decomposition relaxations.

Children inherit the parent's active vertices that respect their new fixing,
so each child relaxation starts warm.  Nodes are abandoned as soon as an SD
iteration proves a lower bound above the incumbent, and the incumbent is
refreshed from every vertex the oracle produces.
"""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .model import Instance
from .oracles import LinearOracle, OracleError, respects
from .sd import DropRule, SdConfig, SdResult, SdStatus, run_sd

log = logging.getLogger(__name__)

INTEGRALITY_TOL = 1e-6


class BnbStatus(str, enum.Enum):
    SOLVED = "SOLVED"
    TIME_LIMIT = "TIME_LIMIT"


@dataclass
class BnbConfig:
    drop_rule: DropRule = DropRule.D0
    warmstart: bool = True
    time_limit: float = 3600.0
    stop_tol: float = 1e-6
    d2_epsilon: float = 1e-6
    perturbation: float = 0.0
    seed: int = 0
    max_sd_iterations: int = 100_000

    def __post_init__(self):
        self.drop_rule = DropRule(self.drop_rule)

    def sd_config(self, **overrides) -> SdConfig:
        kw = dict(drop_rule=self.drop_rule, d2_epsilon=self.d2_epsilon, stop_tol=self.stop_tol,
                  max_iterations=self.max_sd_iterations,
                  perturbation_magnitude=self.perturbation, rng_seed=self.seed)
        kw.update(overrides)
        return SdConfig(**kw)


@dataclass
class BnbNode:
    fixings: dict[int, int]
    inherited_vertices: list[np.ndarray]
    depth: int
    parent_bound: float
    node_id: int = 0
    parent_id: int | None = None


@dataclass
class NodeRecord:
    node_id: int
    parent_id: int | None
    depth: int
    fixings: dict[int, int]
    inherited: int
    sd_status: str | None = None
    sd_iterations: int = 0
    bound: float = -np.inf
    outcome: str = ""
    branch_var: int | None = None


@dataclass
class BnbResult:
    status: BnbStatus
    incumbent: np.ndarray
    value: float
    global_lb: float
    node_count: int
    total_sd_iterations: int
    wall_time: float
    nodes: list[NodeRecord] = field(default_factory=list)


@dataclass
class RootResult:
    relaxation_value: float
    lower_bound: float
    time: float
    iterations: int
    status: SdStatus
    sd: SdResult


def branching_variable(x) -> int | None:
    """Fractional coordinate closest to one (lowest index on ties), or None if integral."""
    x = np.asarray(x, dtype=float)
    frac = x - np.floor(x)
    cand = (frac >= INTEGRALITY_TOL) & (frac <= 1.0 - INTEGRALITY_TOL)
    if not cand.any():
        return None
    scores = np.where(cand, frac, -1.0)
    return int(np.argmax(scores))


def _relax(oracle, instance, node, config, cutoff, deadline):
    sd_cfg = config.sd_config(cutoff=cutoff, deadline=deadline)
    res = run_sd(oracle, instance.scenarios, node.inherited_vertices, sd_cfg, node.fixings)
    iterations = res.iterations
    if res.status in (SdStatus.CYCLE_DETECTED, SdStatus.ITER_LIMIT) and (
            deadline is None or time.perf_counter() <= deadline):
        # fall back to the non-dropping rule, which cannot cycle, from the vertices found so far
        sd_cfg = config.sd_config(cutoff=cutoff, deadline=deadline, drop_rule=DropRule.D0,
                                  max_iterations=10**9)
        inc_v, inc_f = res.incumbent_vertex, res.incumbent_value
        res = run_sd(oracle, instance.scenarios, list(res.final_V), sd_cfg, node.fixings)
        iterations += res.iterations
        if inc_f < res.incumbent_value:
            res.incumbent_vertex, res.incumbent_value = inc_v, inc_f
    return res, iterations


def solve_bnb(instance: Instance, oracle: LinearOracle, config: BnbConfig | None = None,
              node_callback=None) -> BnbResult:
    """Solve the robust problem exactly; ``node_callback(node)`` sees every node before its relaxation."""
    config = config or BnbConfig()
    start = time.perf_counter()
    deadline = start + config.time_limit if config.time_limit is not None else None
    tol = config.stop_tol

    incumbent, inc_value = None, np.inf
    records: list[NodeRecord] = []
    closed_bound = np.inf  # weakest bound among fathomed nodes
    total_iters = 0
    stack = [BnbNode({}, [], 0, -np.inf, 0, None)]
    next_id = 1
    status = BnbStatus.SOLVED
    open_bound = np.inf

    while stack:
        if records and deadline is not None and time.perf_counter() > deadline:
            status = BnbStatus.TIME_LIMIT
            break
        node = stack.pop()
        rec = NodeRecord(node.node_id, node.parent_id, node.depth, dict(node.fixings),
                         len(node.inherited_vertices))
        records.append(rec)
        if node.parent_bound >= inc_value - tol:
            rec.outcome, rec.bound = "parent_bound", node.parent_bound
            closed_bound = min(closed_bound, node.parent_bound)
            continue

        if node_callback is not None:
            node_callback(node)
        cutoff = inc_value - tol if np.isfinite(inc_value) else None
        try:
            res, iters = _relax(oracle, instance, node, config, cutoff, deadline)
        except OracleError:
            if node.depth == 0:
                raise
            raise OracleError(f"oracle failed at node {node.node_id} with fixings {node.fixings}; "
                              "child nodes must stay feasible") from None
        total_iters += iters
        rec.sd_status, rec.sd_iterations = res.status.value, iters
        if res.incumbent_value < inc_value:
            incumbent, inc_value = res.incumbent_vertex, res.incumbent_value
        bound = max(res.best_lb, node.parent_bound)
        rec.bound = bound

        if res.status is not SdStatus.OPTIMAL and res.status is not SdStatus.CUTOFF:
            # deadline hit inside SD: the node stays open
            rec.outcome = "interrupted"
            status = BnbStatus.TIME_LIMIT
            open_bound = min(open_bound, bound)
            break
        if res.status is SdStatus.CUTOFF or bound >= inc_value - tol:
            rec.outcome = "cutoff" if res.status is SdStatus.CUTOFF else "bound"
            closed_bound = min(closed_bound, bound)
            continue
        i = branching_variable(res.x_star)
        if i is None:
            rec.outcome = "integral"
            closed_bound = min(closed_bound, bound)
            continue

        rec.outcome, rec.branch_var = "branched", i
        verts = list(res.final_V)
        for val in (0, 1):  # pushed 0 first so the x_i = 1 child is expanded first
            fix = dict(node.fixings)
            fix[i] = val
            inherited = [v for v in verts if v[i] == val] if config.warmstart else []
            stack.append(BnbNode(fix, inherited, node.depth + 1, bound, next_id, node.node_id))
            next_id += 1
        log.debug("node %d depth %d bound %.10g branch x%d", node.node_id, node.depth, bound, i)

    for node in stack:
        open_bound = min(open_bound, node.parent_bound)
    if incumbent is None:
        raise OracleError("no feasible solution found")
    if status is BnbStatus.SOLVED:
        global_lb = min(inc_value, closed_bound)
    else:
        global_lb = min(inc_value, closed_bound, open_bound)
    return BnbResult(status=status, incumbent=incumbent, value=float(inc_value),
                     global_lb=float(global_lb), node_count=len(records),
                     total_sd_iterations=total_iters, wall_time=time.perf_counter() - start,
                     nodes=records)


def evaluate_root(instance: Instance, oracle: LinearOracle, config: BnbConfig | None = None) -> RootResult:
    """Solve only the root relaxation (no fixings are ever passed to the oracle)."""
    config = config or BnbConfig()
    start = time.perf_counter()
    deadline = start + config.time_limit if config.time_limit is not None else None
    res = run_sd(oracle, instance.scenarios, (), config.sd_config(deadline=deadline))
    return RootResult(relaxation_value=res.value, lower_bound=res.best_lb,
                      time=time.perf_counter() - start, iterations=res.iterations,
                      status=res.status, sd=res)


def check_inheritance(node: BnbNode, oracle: LinearOracle) -> bool:
    return all(respects(v, node.fixings) and oracle.is_feasible(v) for v in node.inherited_vertices)


__all__ = ["BnbConfig", "BnbNode", "BnbResult", "BnbStatus", "NodeRecord", "RootResult",
           "branching_variable", "evaluate_root", "solve_bnb", "check_inheritance"]
