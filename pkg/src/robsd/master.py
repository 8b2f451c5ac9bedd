"""Minimisation of the worst-case objective over the convex hull of an active vertex set.

For ``V = {v_1, ..., v_k}`` the master LP is, in the convex weights ``alpha``,

    min z   s.t.   sum_v (costs_j @ v + constant_j) alpha_v <= z   (j = 1..m)
                   sum_v alpha_v = 1,  alpha >= 0.

Its scenario-row multipliers ``lam`` form a probability vector and
``sum_j lam_j costs_j`` is a subgradient of the objective at
``x = sum_v alpha_v v`` whose negative lies in the normal cone of ``conv(V)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lp import OPTIMAL, lp_solve
from .model import ScenarioSet

ACTIVE_TOL = 1e-9


class MasterError(RuntimeError):
    """The master LP did not reach optimality (never expected by construction)."""


class ActiveSet:
    """Ordered, duplicate-free vertex list with a cached scenario-value matrix.

    ``cost_cache[j, i]`` is ``costs_j @ vertices[i] + constant_j``; columns are
    appended or removed together with their vertex, never recomputed.
    """

    def __init__(self, scenarios: ScenarioSet, vertices=()):
        self.scenarios = scenarios
        self.vertices: list[np.ndarray] = []
        self._index: dict[bytes, int] = {}
        self._cache = np.empty((scenarios.m, 0))
        for v in vertices:
            self.add(v)

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __contains__(self, v):
        return _key(v) in self._index

    @property
    def cost_cache(self) -> np.ndarray:
        return self._cache[:, :len(self.vertices)]

    def add(self, v) -> bool:
        """Append ``v`` unless an identical vertex is already present."""
        v = np.asarray(v, dtype=np.int8)
        if v.shape != (self.scenarios.n,):
            raise ValueError(f"vertex of shape {v.shape} does not match dimension {self.scenarios.n}")
        key = _key(v)
        if key in self._index:
            return False
        k = len(self.vertices)
        if k == self._cache.shape[1]:
            grown = np.empty((self.scenarios.m, max(4, 2 * k)))
            grown[:, :k] = self._cache[:, :k]
            self._cache = grown
        self._cache[:, k] = self.scenarios.values(v.astype(float))
        self.vertices.append(v)
        self._index[key] = k
        return True

    def keep(self, mask) -> list[np.ndarray]:
        """Retain the vertices where ``mask`` is true; returns the dropped ones."""
        mask = np.asarray(mask, dtype=bool)
        dropped = [v for v, m in zip(self.vertices, mask) if not m]
        if dropped:
            idx = np.flatnonzero(mask)
            self._cache = self._cache[:, idx].copy()
            self.vertices = [self.vertices[i] for i in idx]
            self._index = {_key(v): i for i, v in enumerate(self.vertices)}
        return dropped

    def key(self) -> frozenset:
        return frozenset(self._index)

    def matrix(self) -> np.ndarray:
        """Vertices as rows of a ``|V| x n`` float array."""
        return np.array(self.vertices, dtype=float).reshape(len(self.vertices), self.scenarios.n)

    def copy(self) -> "ActiveSet":
        other = ActiveSet.__new__(ActiveSet)
        other.scenarios = self.scenarios
        other.vertices = list(self.vertices)
        other._index = dict(self._index)
        other._cache = self._cache.copy()
        return other


def _key(v) -> bytes:
    return np.asarray(v, dtype=np.int8).tobytes()


@dataclass
class MasterSolution:
    alpha: np.ndarray
    z: float
    lam: np.ndarray
    x: np.ndarray
    subgradient: np.ndarray


def _preferred_dual(C, w, active, p, tie_kw):
    # vertex of the optimal dual face maximising lam_p; inactive scenarios fixed at 0
    idx = np.flatnonzero(active)
    if p not in set(idx.tolist()):
        return None
    delta = 1e-10 * (1.0 + abs(w))
    k = C.shape[1]
    A = np.vstack([C[idx].T, np.ones((1, idx.size))])
    b = np.concatenate([np.full(k, w - delta), [1.0]])
    obj = np.zeros(idx.size)
    obj[np.searchsorted(idx, p)] = -1.0
    res = lp_solve(A, b, obj, [">"] * k + ["="], **tie_kw)
    if res.status != OPTIMAL:
        return None
    lam = np.zeros(C.shape[0])
    lam[idx] = res.x
    return lam


def _preferred_primal(C, w, support_ok, p, tie_kw):
    # vertex of the optimal primal face maximising alpha_p
    idx = np.flatnonzero(support_ok)
    if p not in set(idx.tolist()):
        return None
    delta = 1e-10 * (1.0 + abs(w))
    m = C.shape[0]
    A = np.vstack([C[:, idx], np.ones((1, idx.size))])
    b = np.concatenate([np.full(m, w + delta), [1.0]])
    obj = np.zeros(idx.size)
    obj[np.searchsorted(idx, p)] = -1.0
    res = lp_solve(A, b, obj, ["<"] * m + ["="], **tie_kw)
    if res.status != OPTIMAL:
        return None
    alpha = np.zeros(C.shape[1])
    alpha[idx] = res.x
    return alpha


def solve_master(V: ActiveSet, scenarios: ScenarioSet | None = None, *,
                 dual_preference: int | None = None,
                 primal_preference: int | None = None,
                 reverse_ties: bool = False, bland: bool = False) -> MasterSolution:
    """Minimise the max-affine objective over ``conv(V)``.

    ``dual_preference`` (a scenario index) selects, among optimal duals, one
    maximising that scenario's weight; ``primal_preference`` (a position in
    ``V``) does the same for the convex weights.  Both only matter on
    degenerate masters and exist to replay hand-worked traces.
    """
    if scenarios is not None and scenarios is not V.scenarios:
        raise ValueError("active set was built for a different scenario set")
    scen = V.scenarios
    k = len(V)
    if k == 0:
        raise ValueError("empty active set")
    C = V.cost_cache
    # shift so every coefficient is >= 1; the weights sum to one so z shifts by the same amount
    shift = float(C.min()) - 1.0
    Cs = C - shift
    m = scen.m
    A = np.zeros((m + 1, k + 1))
    A[:m, :k] = Cs
    A[:m, k] = -1.0
    A[m, :k] = 1.0
    b = np.zeros(m + 1)
    b[m] = 1.0
    obj = np.zeros(k + 1)
    obj[k] = 1.0
    tie_kw = {"reverse_ties": reverse_ties, "bland": bland}
    # crash basis: all weight on the vertex with the smallest worst case, w at that worst case
    v0 = int(np.argmin(Cs.max(axis=0)))
    j0 = int(np.argmax(Cs[:, v0]))
    slack = k + 1 + np.arange(m)
    crash = np.concatenate([slack[:j0], [k], slack[j0 + 1:], [v0]])
    res = lp_solve(A, b, obj, ["<"] * m + ["="], initial_basis=crash, **tie_kw)
    if res.status != OPTIMAL:
        raise MasterError(
            f"master LP ended with status {res.status!r} after {res.iterations} pivots "
            f"(|V|={k}, m={m}, cost range [{C.min():.6g}, {C.max():.6g}])")
    alpha = np.clip(res.x[:k], 0.0, None)
    w = float(res.x[k])
    lam = np.clip(-res.dual[:m], 0.0, None)

    if primal_preference is not None:
        reduced = lam @ Cs - w
        pref = _preferred_primal(Cs, w, reduced <= ACTIVE_TOL * (1.0 + abs(w)),
                                 primal_preference, tie_kw)
        if pref is not None:
            alpha = np.clip(pref, 0.0, None)
    alpha /= alpha.sum()

    if dual_preference is not None:
        rows = Cs @ alpha
        pref = _preferred_dual(Cs, w, rows >= w - ACTIVE_TOL * (1.0 + abs(w)),
                               dual_preference, tie_kw)
        if pref is not None:
            lam = np.clip(pref, 0.0, None)
    lam /= lam.sum()

    x = alpha @ V.matrix()
    return MasterSolution(alpha=alpha, z=w + shift, lam=lam, x=x,
                          subgradient=lam @ scen.costs)
