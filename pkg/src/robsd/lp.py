"""Dense two-phase primal simplex.

Solves ``min c @ x  s.t.  A[i] @ x (<=|=|>=) b[i],  x >= 0`` on a full
tableau.  Dantzig pricing is used until ``2 * (rows + cols)`` consecutive
degenerate pivots have been made; from then on Bland's rule is used for the
rest of the solve, which rules out cycling.

Duals are reported as shadow prices, ``dual[i] = d(objective) / d(b[i])``,
so for a minimisation ``<=`` rows carry non-positive and ``>=`` rows
non-negative multipliers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
OPT_TOL = 1e-7
PIVOT_TOL = 1e-9

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
STALLED = "stalled"


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None
    dual: np.ndarray | None
    objective: float
    basis: np.ndarray
    iterations: int


class _Tableau:
    def __init__(self, T, basis, reverse_ties, bland):
        self.T = T
        self.basis = basis
        self.reverse_ties = reverse_ties
        self.bland = bland
        self.iterations = 0

    def _entering(self, allowed, tol):
        rc = np.where(allowed, self.T[-1, :-1], np.inf)
        if self.bland:
            cand = np.flatnonzero(rc < -tol)
            if cand.size == 0:
                return None
            return int(cand[-1] if self.reverse_ties else cand[0])
        if self.reverse_ties:
            e = rc.size - 1 - int(np.argmin(rc[::-1]))
        else:
            e = int(np.argmin(rc))
        return e if rc[e] < -tol else None

    def _leaving(self, e):
        col = self.T[:-1, e]
        pos = col > PIVOT_TOL
        if not pos.any():
            return None, 0.0
        ratios = np.full(col.shape, np.inf)
        np.divide(self.T[:-1, -1], col, out=ratios, where=pos)
        r = int(np.argmin(ratios))
        rmin = ratios[r]
        tied = np.flatnonzero(ratios <= rmin + 1e-12 * (1.0 + abs(rmin)))
        if tied.size > 1:
            # smallest basic index among ties keeps Bland's guarantee intact
            r = int(tied[np.argmin(self.basis[tied])])
        return r, rmin

    def pivot(self, r, e):
        T = self.T
        T[r] /= T[r, e]
        col = T[:, e].copy()
        col[r] = 0.0
        T -= col[:, None] * T[r]
        T[:, e] = 0.0
        T[r, e] = 1.0
        self.basis[r] = e

    def run(self, allowed, tol, max_iter):
        rows, cols = self.T.shape[0] - 1, self.T.shape[1] - 1
        degenerate_limit = 2 * (rows + cols)
        degenerate_run = 0
        while True:
            if self.iterations >= max_iter:
                return STALLED
            e = self._entering(allowed, tol)
            if e is None:
                return OPTIMAL
            r, step = self._leaving(e)
            if r is None:
                return UNBOUNDED
            self.pivot(r, e)
            self.iterations += 1
            if step <= FEAS_TOL:
                degenerate_run += 1
                if degenerate_run > degenerate_limit:
                    self.bland = True
            else:
                degenerate_run = 0


def lp_solve(A, b, c, sense, *, reverse_ties=False, bland=False, max_iter=None,
             initial_basis=None) -> LPResult:
    """Minimise ``c @ x`` over ``{x >= 0 : A x (sense) b}``.

    ``sense`` holds one of ``"<"``, ``"="``, ``">"`` per row (``"<="`` and
    ``">="`` are accepted too).  ``reverse_ties`` flips every index-based
    tie-break, which yields a different pivot path on degenerate problems;
    ``bland`` forces Bland's rule from the first pivot.

    ``initial_basis`` skips phase one: it lists one column per row, indexing
    the structural variables followed by one slack/surplus per inequality row
    (in row order), and must describe a primal feasible basis.  It is only
    accepted when no right-hand side is negative.
    """
    A = np.array(A, dtype=float, ndmin=2)
    b = np.array(b, dtype=float).reshape(-1)
    c = np.array(c, dtype=float).reshape(-1)
    nrows, nvars = A.shape
    if b.shape[0] != nrows or c.shape[0] != nvars or len(sense) != nrows:
        raise ValueError("inconsistent LP dimensions")
    sense = [s[0] for s in sense]
    if any(s not in "<=>" for s in sense):
        raise ValueError(f"unknown constraint sense in {sense!r}")

    flip = np.where(b < 0, -1.0, 1.0)
    A = A * flip[:, None]
    b = b * flip
    sense = [s if f > 0 or s == "=" else ("<" if s == ">" else ">") for s, f in zip(sense, flip)]

    n_slack = sum(s != "=" for s in sense)
    if initial_basis is not None:
        if np.any(flip < 0):
            raise ValueError("initial_basis requires a non-negative right-hand side")
        art_rows = []
    else:
        art_rows = [i for i, s in enumerate(sense) if s != "<"]
    n_art = len(art_rows)
    ncols = nvars + n_slack + n_art

    # standard-form matrix, kept for the final basis refactorisation
    S = np.zeros((nrows, ncols))
    S[:, :nvars] = A
    basis = np.empty(nrows, dtype=int)
    k = nvars
    for i, s in enumerate(sense):
        if s != "=":
            S[i, k] = 1.0 if s == "<" else -1.0
            if s == "<":
                basis[i] = k
            k += 1
    for a, i in enumerate(art_rows):
        S[i, nvars + n_slack + a] = 1.0
        basis[i] = nvars + n_slack + a
    is_art = np.zeros(ncols, dtype=bool)
    is_art[nvars + n_slack:] = True

    T = np.zeros((nrows + 1, ncols + 1))
    T[:-1, :-1] = S
    T[:-1, -1] = b
    if initial_basis is not None:
        basis[:] = initial_basis
        try:
            T[:-1] = np.linalg.solve(S[:, basis], T[:-1])
        except np.linalg.LinAlgError:
            raise ValueError("initial_basis is singular") from None
        if T[:-1, -1].min() < -FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            raise ValueError("initial_basis is not primal feasible")
        T[:-1, -1] = np.maximum(T[:-1, -1], 0.0)
    if max_iter is None:
        max_iter = 50 * (nrows + ncols) + 100
    tab = _Tableau(T, basis, reverse_ties, bland)
    scale = max(1.0, float(np.abs(c).max(initial=0.0)))

    if n_art:
        T[-1, :] = 0.0
        T[-1, np.flatnonzero(is_art)] = 1.0
        for i in art_rows:
            T[-1] -= T[i]
        status = tab.run(np.ones(ncols, dtype=bool), FEAS_TOL, max_iter)
        if status == STALLED:
            return LPResult(STALLED, None, None, np.nan, basis.copy(), tab.iterations)
        if -T[-1, -1] > FEAS_TOL * max(1.0, float(np.abs(b).max(initial=0.0))):
            return LPResult(INFEASIBLE, None, None, np.nan, basis.copy(), tab.iterations)
        # drive zero-level artificials out of the basis where possible
        for r in np.flatnonzero(is_art[basis]):
            row = np.abs(T[r, :-1])
            row[is_art] = 0.0
            j = int(np.argmax(row))
            if row[j] > PIVOT_TOL:
                tab.pivot(r, j)
            # otherwise the row is redundant; the artificial stays basic at zero

    T[-1, :-1] = 0.0
    T[-1, :nvars] = c
    T[-1, -1] = 0.0
    for r, j in enumerate(basis):
        if T[-1, j] != 0.0:
            T[-1] -= T[-1, j] * T[r]
    status = tab.run(~is_art, FEAS_TOL * scale, max_iter)
    if status != OPTIMAL:
        return LPResult(status, None, None, np.nan, basis.copy(), tab.iterations)

    # refactorise the final basis on the original data for accurate values
    B = S[:, basis]
    cost = np.zeros(ncols)
    cost[:nvars] = c
    try:
        xb = np.linalg.solve(B, b)
        y = np.linalg.solve(B.T, cost[basis])
    except np.linalg.LinAlgError:
        xb = T[:-1, -1].copy()
        y = np.linalg.lstsq(B.T, cost[basis], rcond=None)[0]
    xfull = np.zeros(ncols)
    xfull[basis] = np.where(np.abs(xb) <= FEAS_TOL, 0.0, xb)
    x = xfull[:nvars]
    return LPResult(OPTIMAL, x, y * flip, float(c @ x), basis.copy(), tab.iterations)
