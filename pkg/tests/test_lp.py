import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from robsd.lp import INFEASIBLE, OPTIMAL, UNBOUNDED, lp_solve


def test_tiny_dual():
    # min z  s.t.  z >= 3, z >= 1
    res = lp_solve([[1.0], [1.0]], [3.0, 1.0], [1.0], [">", ">"])
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(3.0)
    assert res.dual == pytest.approx([1.0, 0.0])


def test_infeasible_and_unbounded():
    assert lp_solve([[1.0], [1.0]], [1.0, 2.0], [1.0], ["<", ">"]).status == INFEASIBLE
    assert lp_solve([[1.0]], [1.0], [-1.0], [">"]).status == UNBOUNDED


def test_bad_dimensions():
    with pytest.raises(ValueError):
        lp_solve([[1.0, 2.0]], [1.0], [1.0], ["<"])
    with pytest.raises(ValueError):
        lp_solve([[1.0]], [1.0], [1.0], ["!"])


def _brute_force(A, b, c):
    # min c x  s.t.  A x <= b, x >= 0, by enumerating basic feasible solutions
    m, n = A.shape
    G = np.vstack([A, -np.eye(n)])
    h = np.concatenate([b, np.zeros(n)])
    best = np.inf
    for rows in itertools.combinations(range(m + n), n):
        M = G[list(rows)]
        if abs(np.linalg.det(M)) < 1e-10:
            continue
        x = np.linalg.solve(M, h[list(rows)])
        if np.all(G @ x <= h + 1e-9):
            best = min(best, float(c @ x))
    return best


@pytest.mark.parametrize("seed", range(40))
def test_random_against_vertex_enumeration(seed):
    rng = np.random.default_rng(seed)
    A = rng.uniform(0.1, 2.0, (5, 5))
    b = rng.uniform(1.0, 3.0, 5)
    c = rng.normal(size=5)
    res = lp_solve(A, b, c, ["<"] * 5)
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(_brute_force(A, b, c), abs=1e-8)
    # shadow prices of <= rows in a minimisation are non-positive and certify the bound
    assert np.all(res.dual <= 1e-9)
    assert res.dual @ b == pytest.approx(res.objective, abs=1e-8)
    assert np.all(c - A.T @ res.dual >= -1e-8)


@pytest.mark.parametrize("seed", range(40))
@pytest.mark.parametrize("reverse", [False, True])
def test_mixed_rows_against_scipy(seed, reverse):
    rng = np.random.default_rng(100 + seed)
    m, n = 6, 8
    x0 = rng.uniform(0, 1, n)
    A = rng.normal(size=(m, n))
    sense = rng.choice(["<", "=", ">"], m)
    b = A @ x0 + np.where(sense == "<", 0.5, np.where(sense == ">", -0.5, 0.0))
    c = rng.uniform(0.1, 1.0, n)
    ours = lp_solve(A, b, c, list(sense), reverse_ties=reverse)
    ref = linprog(c, A_ub=np.vstack([A[sense == "<"], -A[sense == ">"]]),
                  b_ub=np.concatenate([b[sense == "<"], -b[sense == ">"]]),
                  A_eq=A[sense == "="], b_eq=b[sense == "="], method="highs")
    assert ours.status == OPTIMAL and ref.status == 0
    assert ours.objective == pytest.approx(ref.fun, abs=1e-7)
    assert np.allclose(A[sense == "="] @ ours.x, b[sense == "="], atol=1e-7)
    assert ours.dual @ b == pytest.approx(ours.objective, abs=1e-7)


def test_degenerate_problem_terminates():
    # many ties in the ratio test; Bland's rule must still finish
    A = np.array([[1, 1, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]], float)
    b = np.array([1, 1, 1, 1.5])
    for bland in (False, True):
        res = lp_solve(A, b, [-1, -1, -1], ["<"] * 4, bland=bland)
        assert res.status == OPTIMAL and res.objective == pytest.approx(-1.5)


def test_initial_basis_matches_phase_one():
    rng = np.random.default_rng(3)
    A = rng.uniform(0.1, 1.0, (4, 3))
    b = np.ones(4)
    c = -np.ones(3)
    warm = lp_solve(A, b, c, ["<"] * 4, initial_basis=[3, 4, 5, 6])
    cold = lp_solve(A, b, c, ["<"] * 4)
    assert warm.objective == pytest.approx(cold.objective)
