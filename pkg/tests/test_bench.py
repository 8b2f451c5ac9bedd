import numpy as np
import pytest

from robsd.bench import (GeneratorSpec, RunRecord, SolverConfig, format_table, generate_instance,
                         group_of, performance_profile, profile_from_records, profile_to_csv,
                         records_from_csv, records_to_csv, run_benchmark, run_one, summarize)
from robsd.model import save_instance


@pytest.mark.parametrize("kind", ["mst", "tsp"])
@pytest.mark.parametrize("beta", [0.0, 1.0, 2.5])
def test_scenario_distance(kind, beta):
    inst = generate_instance(GeneratorSpec(kind, 6, 9, beta, seed=1, replicate=2))
    nominal = np.array(inst.meta["nominal"])
    assert np.all((nominal >= 1) & (nominal <= 2))
    dist = np.linalg.norm(inst.scenarios.costs - nominal, axis=1)
    assert np.allclose(dist, beta, atol=1e-9)
    if kind == "tsp":
        assert np.all(inst.scenarios.costs > 0)
        assert np.all(inst.scenarios.costs >= nominal - 1e-12)


def test_generation_is_reproducible():
    a = GeneratorSpec("mst", 5, 4, 1.0, seed=3, replicate=1)
    assert save_instance(generate_instance(a)) == save_instance(generate_instance(a))
    b = GeneratorSpec("mst", 5, 4, 1.0, seed=3, replicate=2)
    assert save_instance(generate_instance(a)) != save_instance(generate_instance(b))
    assert generate_instance(a).name == "mst_N5_m4_b1_s3_r1"


def test_generator_rejects_bad_specs():
    for args in [("generic", 5, 2, 1.0), ("mst", 2, 2, 1.0), ("mst", 5, 0, 1.0), ("mst", 5, 2, -1.0)]:
        with pytest.raises(ValueError):
            GeneratorSpec(*args)


def test_solver_tags():
    s = SolverConfig.parse("d2-nows")
    assert s.drop_rule.value == "d2" and not s.warmstart and not s.root_only
    assert SolverConfig.parse("root-d1").root_only
    with pytest.raises(ValueError):
        SolverConfig.parse("d7")


def test_profile_hand_example():
    prof = performance_profile([[1.0, 2.0], [2.0, 1.0]], ["A", "B"])
    assert prof.curves["A"] == [(1.0, 0.5), (2.0, 1.0)]
    assert prof.curves["B"] == [(1.0, 0.5), (2.0, 1.0)]


def test_profile_failures_and_monotonicity():
    rng = np.random.default_rng(0)
    t = rng.uniform(0.1, 10, (3, 20))
    t[rng.random((3, 20)) < 0.3] = np.inf
    t[:, 0] = np.inf  # solved by no one
    prof = performance_profile(t)
    assert prof.excluded == 1
    kept = t[:, 1:][:, np.isfinite(t[:, 1:]).any(axis=0)]
    for i, s in enumerate(prof.solvers):
        rhos = [r for _, r in prof.curves[s]]
        taus = [tau for tau, _ in prof.curves[s]]
        assert rhos == sorted(rhos) and taus == sorted(taus) and taus[0] == 1.0
        assert rhos[-1] == pytest.approx(np.isfinite(kept[i]).mean())


def test_profile_rejects_nonpositive():
    with pytest.raises(ValueError):
        performance_profile([[0.0, 1.0]])


def test_summary_averages_solved_only():
    recs = [RunRecord("mst_N4_m2_b1_s0_r0", "a", "SOLVED", 1.0, 10, 3),
            RunRecord("mst_N4_m2_b2_s0_r0", "a", "SOLVED", 3.0, 20, 5),
            RunRecord("mst_N4_m2_b3_s0_r0", "a", "TIME_LIMIT", 100.0, 999, 999)]
    (row,) = summarize(recs)
    assert row.time_s == 2.0 and row.iterations == 15.0 and row.solved == 2 and row.total == 3
    assert "2/3" in format_table([row])


def test_group_ordering_is_numeric():
    recs = [RunRecord(f"mst_N{n}_m2_b1_s0_r0", "a", "SOLVED", 1.0) for n in (10, 4)]
    assert [r.group for r in summarize(recs)] == [(4, 2), (10, 2)]
    assert group_of("custom") == ("-", "-")


def test_tiny_time_limit_reports_time_limit():
    inst = generate_instance(GeneratorSpec("mst", 9, 40, 3.0, seed=1))
    rec = run_one(inst, SolverConfig.parse("d0-ws"), 0.001)
    assert rec.status == "TIME_LIMIT" and not rec.solved


def test_benchmark_table_and_csv_agree():
    insts = [generate_instance(GeneratorSpec("mst", 4, 3, b, seed=0)) for b in (1.0, 2.0)]
    recs = run_benchmark(insts, ["d0-ws", "root-d1"], time_limit=60)
    assert len(recs) == 4 and all(r.solved for r in recs)
    back = records_from_csv(records_to_csv(recs))
    assert [(r.instance, r.solver, r.value) for r in back] == [(r.instance, r.solver, r.value) for r in recs]
    for row in summarize(back):
        mine = [r for r in back if r.solver == row.solver]
        assert row.time_s == pytest.approx(np.mean([r.time_s for r in mine]), abs=1e-9)
        assert row.iterations == pytest.approx(np.mean([r.iterations for r in mine]), abs=1e-9)
    text = profile_to_csv(profile_from_records(back))
    assert text.startswith("solver,tau,rho\n")


def test_run_one_captures_errors():
    inst = generate_instance(GeneratorSpec("mst", 4, 2, 1.0))
    rec = run_one(inst, SolverConfig.parse("d0-ws"), 10, oracle_spec="bogus")
    assert rec.status == "ERROR" and "bogus" in rec.error


def test_parallel_matches_serial():
    insts = [generate_instance(GeneratorSpec("mst", 4, 3, 2.0, seed=0, replicate=r)) for r in range(2)]
    a = run_benchmark(insts, ["d2-ws"], jobs=1)
    b = run_benchmark(insts, ["d2-ws"], jobs=2)
    assert [(r.instance, r.value, r.iterations) for r in a] == [(r.instance, r.value, r.iterations) for r in b]
