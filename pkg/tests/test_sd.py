import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from robsd.cycling import example1, example2, replay, reproduce_example1, reproduce_example2
from robsd.master import ActiveSet, solve_master
from robsd.model import evaluate_f
from robsd.oracles import KruskalOracle, OracleError, enumerate_vertices, make_oracle
from robsd.sd import DropRule, SdConfig, SdStatus, lemma_lower_bound, run_sd

from conftest import random_instance


def _as_set(vs):
    return {tuple(int(a) for a in v) for v in vs}


def test_lemma_bound_example1_first_iteration():
    # x^1 = (0,0), f = 0, c^1 = (-1, 1) (dual preference on the second scenario), x_hat = (1, 0)
    assert lemma_lower_bound(0.0, [-1, 1], [0, 0], [1, 0]) == -1.0


def test_example1_d1_cycles():
    res, trace = reproduce_example1()
    assert res.status is SdStatus.CYCLE_DETECTED
    assert _as_set(res.repeated_set) == {(0, 0), (0, 1)}
    assert _as_set(trace[0].next_vertices) == {(0, 0), (0, 1)}
    assert len(trace) == 3


def test_example1_d0_optimal():
    res, trace = reproduce_example1(drop_rule=DropRule.D0)
    assert res.status is SdStatus.OPTIMAL
    assert res.value == pytest.approx(0.0, abs=1e-9)
    assert res.iterations <= 4


def test_example2_d1_keeps_only_start():
    res, trace = reproduce_example2()
    assert _as_set(trace[1].kept) == {(1, 1)} == _as_set(trace[0].vertices)
    assert res.status is SdStatus.CYCLE_DETECTED


def test_example2_d0_value():
    # min max{x1, x2} over the triangle with corners (1,1), (0,1), (1,0) is attained at (1/2, 1/2)
    res, _ = reproduce_example2(drop_rule=DropRule.D0)
    assert res.status is SdStatus.OPTIMAL
    assert res.value == pytest.approx(0.5, abs=1e-9)
    assert res.x_star == pytest.approx([0.5, 0.5])


@pytest.mark.parametrize("problem", [example1, example2])
@pytest.mark.parametrize("seed", range(10))
def test_perturbation_terminates(problem, seed):
    res, _ = replay(problem(), perturbation=1e-4, seed=seed)
    ref, _ = replay(problem(), drop_rule=DropRule.D0)
    assert res.status is SdStatus.OPTIMAL
    assert res.value == pytest.approx(ref.value, abs=1e-3)
    assert res.best_lb <= ref.value + 1e-9


def test_k4_matches_full_enumeration():
    rng = np.random.default_rng(4)
    inst = random_instance("mst", 4, 6, 2.0, rng)
    full = ActiveSet(inst.scenarios, enumerate_vertices(inst))
    assert len(full) == 16
    res = run_sd(KruskalOracle(inst), inst.scenarios)
    assert res.status is SdStatus.OPTIMAL
    assert res.value == pytest.approx(solve_master(full).z, abs=1e-6)


def _postconditions(res, tol=1e-6):
    assert abs(res.value - res.best_lb) <= tol * (1 + abs(res.value))
    assert max(res.lb_history) <= res.value + 1e-6
    assert res.incumbent_value >= res.value - 1e-6
    assert res.incumbent_value == pytest.approx(evaluate_f(res.incumbent_vertex, res.final_V.scenarios)[0])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.sampled_from([4, 5]), st.integers(1, 12), st.sampled_from([1.0, 2.0, 3.0]))
def test_rules_agree_and_bounds_hold(seed, nodes, m, beta):
    inst = random_instance("mst", nodes, m, beta, np.random.default_rng(seed))
    oracle = KruskalOracle(inst)
    d0 = run_sd(oracle, inst.scenarios, config=SdConfig(drop_rule="d0"))
    d2 = run_sd(oracle, inst.scenarios, config=SdConfig(drop_rule="d2"))
    d1p = run_sd(oracle, inst.scenarios, config=SdConfig(drop_rule="d1", perturbation_magnitude=1e-7,
                                                         rng_seed=seed))
    for res in (d0, d2):
        assert res.status is SdStatus.OPTIMAL
        _postconditions(res)
    assert d1p.status is SdStatus.OPTIMAL
    assert d2.value == pytest.approx(d0.value, abs=1e-5)
    assert d1p.value == pytest.approx(d0.value, abs=1e-5)
    assert d1p.best_lb <= d0.value + 1e-6


def test_d0_active_set_grows_by_one():
    inst = random_instance("mst", 5, 8, 3.0, np.random.default_rng(1))
    sizes = []
    run_sd(KruskalOracle(inst), inst.scenarios,
           config=SdConfig(observer=lambda r: sizes.append((len(r.vertices), len(r.next_vertices)))))
    for before, after in sizes[:-1]:
        assert after == before + 1
    assert sizes[-1][0] == sizes[-1][1]


def test_tsp_root_matches_enumeration():
    inst = random_instance("tsp", 6, 5, 1.0, np.random.default_rng(2), nonneg=True)
    full = ActiveSet(inst.scenarios, enumerate_vertices(inst))
    res = run_sd(make_oracle(inst), inst.scenarios)
    assert res.value == pytest.approx(solve_master(full).z, abs=1e-6)


def test_fixings_restrict_the_relaxation():
    inst = random_instance("mst", 4, 3, 1.0, np.random.default_rng(3))
    fix = {0: 1, 5: 0}
    verts = [v for v in enumerate_vertices(inst) if v[0] == 1 and v[5] == 0]
    res = run_sd(KruskalOracle(inst), inst.scenarios, fixings=fix)
    assert all(v[0] == 1 and v[5] == 0 for v in res.final_V)
    assert res.value == pytest.approx(solve_master(ActiveSet(inst.scenarios, verts)).z, abs=1e-6)


def test_cutoff_and_callbacks():
    inst = random_instance("mst", 5, 10, 3.0, np.random.default_rng(5))
    seen = []
    full = run_sd(KruskalOracle(inst), inst.scenarios)
    res = run_sd(KruskalOracle(inst), inst.scenarios,
                 config=SdConfig(cutoff=full.value - 1.0, lb_callback=seen.append))
    assert res.status is SdStatus.CUTOFF
    assert res.best_lb >= full.value - 1.0
    assert seen == res.lb_history


def test_iteration_limit():
    inst = random_instance("mst", 6, 20, 3.0, np.random.default_rng(6))
    res = run_sd(KruskalOracle(inst), inst.scenarios, config=SdConfig(max_iterations=1))
    assert res.status is SdStatus.ITER_LIMIT and res.iterations == 1


def test_infeasible_fixings_raise():
    inst = random_instance("mst", 3, 2, 1.0, np.random.default_rng(0))
    with pytest.raises(OracleError):
        run_sd(KruskalOracle(inst), inst.scenarios, fixings={0: 0, 1: 0})


def test_config_validation():
    with pytest.raises(ValueError):
        SdConfig(d2_epsilon=0)
    with pytest.raises(ValueError):
        SdConfig(drop_rule="d9")


def test_explicit_preferences_override():
    res, trace = reproduce_example2(dual_preference=[0], primal_preference=[0])
    assert _as_set(trace[1].kept) == {(1, 1)}
    free, _ = reproduce_example1(use_preferences=False, drop_rule=DropRule.D0)
    assert free.status is SdStatus.OPTIMAL and abs(free.value) <= 1e-9
