"""Random instance generation, benchmark runs, summary tables and performance profiles."""

from __future__ import annotations

import csv
import io
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .bnb import BnbConfig, evaluate_root, solve_bnb
from .model import Graph, Instance, Kind, ScenarioSet
from .oracles import make_oracle
from .sd import DropRule

RESULT_HEADER = ["instance", "solver", "status", "time_s", "iterations", "nodes", "bound", "value"]
PROFILE_HEADER = ["solver", "tau", "rho"]
SOLVED_STATUSES = {"SOLVED", "OPTIMAL"}


@dataclass(frozen=True)
class GeneratorSpec:
    kind: Kind
    node_count: int
    scenario_count: int
    beta: float
    seed: int = 0
    replicate: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if self.kind is Kind.GENERIC:
            raise ValueError("only mst and tsp instances are generated")
        if self.node_count < 3:
            raise ValueError("need at least 3 nodes")
        if self.scenario_count < 1:
            raise ValueError("need at least one scenario")
        if self.beta < 0:
            raise ValueError("beta must be non-negative")

    @property
    def name(self) -> str:
        return (f"{self.kind.value}_N{self.node_count}_m{self.scenario_count}"
                f"_b{self.beta:g}_s{self.seed}_r{self.replicate}")


def generate_instance(spec: GeneratorSpec) -> Instance:
    """Complete graph, nominal costs ~ U[1, 2], scenarios = nominal + beta * random unit vector.

    Random numbers come from numpy's PCG64 seeded with ``SeedSequence([seed, replicate])``:
    first the ``n`` nominal costs, then an ``m x n`` block of standard normals
    (row-major) that is normalised row by row.  TSP rows take absolute values
    first so that every distance stays positive.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([spec.seed, spec.replicate])))
    graph = Graph.complete(spec.node_count)
    n = graph.n
    nominal = rng.uniform(1.0, 2.0, size=n)
    g = rng.standard_normal(size=(spec.scenario_count, n))
    if spec.kind is Kind.TSP:
        g = np.abs(g)
    units = g / np.linalg.norm(g, axis=1, keepdims=True)
    costs = nominal + spec.beta * units
    meta = {
        "generator": "pcg64",
        "seed": spec.seed,
        "replicate": spec.replicate,
        "beta": spec.beta,
        "unit_vectors": "nonnegative" if spec.kind is Kind.TSP else "signed",
        "nominal": nominal.tolist(),
    }
    return Instance(name=spec.name, kind=spec.kind, graph=graph,
                    scenarios=ScenarioSet(costs), meta=meta)


@dataclass(frozen=True)
class SolverConfig:
    tag: str
    drop_rule: DropRule
    warmstart: bool = True
    root_only: bool = False

    @classmethod
    def parse(cls, tag: str) -> "SolverConfig":
        """``d0-ws``, ``d2-nows`` (branch-and-bound) or ``root-d1`` (root relaxation only)."""
        m = re.fullmatch(r"(root-)?(d[012])(?:-(ws|nows))?", tag.strip())
        if not m:
            raise ValueError(f"unknown solver tag {tag!r}")
        root, rule, ws = m.groups()
        return cls(tag=tag.strip(), drop_rule=DropRule(rule), warmstart=ws != "nows",
                   root_only=bool(root))


@dataclass
class RunRecord:
    instance: str
    solver: str
    status: str
    time_s: float
    iterations: int = 0
    nodes: int = 0
    bound: float = float("nan")
    value: float = float("nan")
    error: str = ""

    @property
    def solved(self) -> bool:
        return self.status in SOLVED_STATUSES


def run_one(instance: Instance, solver: SolverConfig, time_limit: float,
            oracle_spec: str = "internal") -> RunRecord:
    start = time.perf_counter()
    try:
        oracle = make_oracle(instance, oracle_spec)
        config = BnbConfig(drop_rule=solver.drop_rule, warmstart=solver.warmstart,
                           time_limit=time_limit)
        if solver.root_only:
            root = evaluate_root(instance, oracle, config)
            status = root.status.value if root.status.value != "ITER_LIMIT" else "TIME_LIMIT"
            return RunRecord(instance.name, solver.tag, status, root.time, root.iterations, 1,
                             root.lower_bound, root.relaxation_value)
        res = solve_bnb(instance, oracle, config)
        return RunRecord(instance.name, solver.tag, res.status.value, res.wall_time,
                         res.total_sd_iterations, res.node_count, res.global_lb, res.value)
    except Exception as exc:  # a failed run must not abort the batch
        return RunRecord(instance.name, solver.tag, "ERROR", time.perf_counter() - start,
                         error=f"{type(exc).__name__}: {exc}")


def _run_job(args):
    return run_one(*args)


def run_benchmark(instances: Iterable[Instance], solvers: Sequence[SolverConfig | str],
                  time_limit: float = 3600.0, jobs: int = 1,
                  oracle_spec: str = "internal") -> list[RunRecord]:
    """Run every (instance, solver) pair; records come back sorted by instance then solver order."""
    solvers = [SolverConfig.parse(s) if isinstance(s, str) else s for s in solvers]
    tasks = [(inst, s, time_limit, oracle_spec) for inst in instances for s in solvers]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_job, tasks))
    return [_run_job(t) for t in tasks]


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def records_to_csv(records: Sequence[RunRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_HEADER)
    for r in records:
        w.writerow([_fmt(getattr(r, k)) for k in RESULT_HEADER])
    return buf.getvalue()


def records_from_csv(text: str) -> list[RunRecord]:
    rows = csv.DictReader(io.StringIO(text))
    if rows.fieldnames != RESULT_HEADER:
        raise ValueError(f"unexpected results header {rows.fieldnames}")
    return [RunRecord(r["instance"], r["solver"], r["status"], float(r["time_s"]),
                      int(r["iterations"]), int(r["nodes"]), float(r["bound"]), float(r["value"]))
            for r in rows]


_GROUP = re.compile(r"_N(\d+)_m(\d+)_")


def group_of(instance_name: str) -> tuple[int, int] | tuple[str, str]:
    m = _GROUP.search(instance_name)
    return (int(m.group(1)), int(m.group(2))) if m else ("-", "-")


@dataclass
class SummaryRow:
    group: tuple
    solver: str
    time_s: float
    iterations: float
    nodes: float
    solved: int
    total: int


def _mean(vals) -> float:
    return float(np.mean(vals)) if vals else float("nan")


def summarize(records: Sequence[RunRecord]) -> list[SummaryRow]:
    """Per (|N|, m) and solver averages, taken over solved runs only."""
    buckets: dict[tuple, list[RunRecord]] = {}
    solver_order: dict[str, int] = {}
    for r in records:
        solver_order.setdefault(r.solver, len(solver_order))
        buckets.setdefault((group_of(r.instance), r.solver), []).append(r)
    def order(item):
        (group, solver), _ = item
        return tuple((0, g) if isinstance(g, int) else (1, g) for g in group), solver_order[solver]

    rows = []
    for (group, solver), recs in sorted(buckets.items(), key=order):
        ok = [r for r in recs if r.solved]
        rows.append(SummaryRow(group, solver, _mean([r.time_s for r in ok]),
                               _mean([r.iterations for r in ok]), _mean([r.nodes for r in ok]),
                               len(ok), len(recs)))
    return rows


def format_table(rows: Sequence[SummaryRow]) -> str:
    header = ["|N|", "#sc", "solver", "time", "#it", "#nodes", "#sol"]
    body = [[str(r.group[0]), str(r.group[1]), r.solver, f"{r.time_s:.3f}",
             f"{r.iterations:.1f}", f"{r.nodes:.1f}", f"{r.solved}/{r.total}"] for r in rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.rjust(w) for c, w in zip(b, widths)) for b in body]
    return "\n".join(lines) + "\n"


@dataclass
class Profile:
    solvers: list[str]
    curves: dict[str, list[tuple[float, float]]]
    excluded: int  # instances no solver finished


def performance_profile(times, solvers: Sequence[str] | None = None) -> Profile:
    """Performance profile over a ``solvers x instances`` time matrix.

    Failures are marked by ``inf`` or ``nan``.  For each solver the curve is
    the list of breakpoints ``(tau, rho(tau))`` of the right-continuous step
    function ``rho(tau) = share of instances with time ratio <= tau``; it
    always starts at ``tau = 1``.
    """
    t = np.array(times, dtype=float, ndmin=2)
    t = np.where(np.isnan(t), np.inf, t)
    if np.any(t <= 0):
        raise ValueError("times must be positive")
    if solvers is None:
        solvers = [f"s{i}" for i in range(t.shape[0])]
    keep = np.isfinite(t).any(axis=0)
    t = t[:, keep]
    excluded = int((~keep).sum())
    n_inst = t.shape[1]
    curves = {}
    if n_inst == 0:
        return Profile(list(solvers), {s: [(1.0, 0.0)] for s in solvers}, excluded)
    ratios = t / t.min(axis=0)
    for s, r in zip(solvers, ratios):
        finite = np.sort(r[np.isfinite(r)])
        taus = np.unique(np.concatenate([[1.0], finite]))
        curves[s] = [(float(tau), float(np.count_nonzero(finite <= tau) / n_inst)) for tau in taus]
    return Profile(list(solvers), curves, excluded)


def profile_to_csv(profile: Profile) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(PROFILE_HEADER)
    for s in profile.solvers:
        for tau, rho in profile.curves[s]:
            w.writerow([s, repr(tau), repr(rho)])
    return buf.getvalue()


def profile_from_records(records: Sequence[RunRecord]) -> Profile:
    solvers = list(dict.fromkeys(r.solver for r in records))
    instances = list(dict.fromkeys(r.instance for r in records))
    times = np.full((len(solvers), len(instances)), np.inf)
    for r in records:
        if r.solved:
            times[solvers.index(r.solver), instances.index(r.instance)] = max(r.time_s, 1e-9)
    return performance_profile(times, solvers)
