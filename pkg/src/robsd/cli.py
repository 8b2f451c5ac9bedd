"""Command line entry point: ``robsd generate|solve|root|bench|profile``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import bench
from .bnb import BnbConfig, evaluate_root, solve_bnb
from .model import InstanceError, load_instance, save_instance
from .oracles import OracleError, make_oracle


def _write(out: str | None, data: str | bytes):
    if out is None or out == "-":
        sys.stdout.write(data.decode() if isinstance(data, bytes) else data)
        return
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(out, mode) as fh:
        fh.write(data)


def _solver_flags(p):
    p.add_argument("instance", help="instance JSON file")
    p.add_argument("--drop", choices=["d0", "d1", "d2"], default="d0")
    p.add_argument("--warmstart", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--perturb", type=float, default=0.0, metavar="EPS")
    p.add_argument("--seed", type=int, default=0, help="seed for the scenario perturbation")
    p.add_argument("--time-limit", type=float, default=3600.0)
    p.add_argument("--oracle", default="internal", help="internal | external:<cmd>")
    p.add_argument("--out")
    p.add_argument("--trace", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robsd", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random robust MST/TSP instance")
    g.add_argument("--problem", choices=["mst", "tsp"], default="mst")
    g.add_argument("--nodes", type=int, required=True)
    g.add_argument("--scenarios", type=int, required=True)
    g.add_argument("--beta", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--replicate", type=int, default=0)
    g.add_argument("--out")

    _solver_flags(sub.add_parser("solve", help="solve an instance to optimality"))
    _solver_flags(sub.add_parser("root", help="solve the root relaxation only"))

    b = sub.add_parser("bench", help="run a generated benchmark")
    b.add_argument("--problem", choices=["mst", "tsp"], default="mst")
    b.add_argument("--nodes", type=int, nargs="+", required=True)
    b.add_argument("--scenarios", type=int, nargs="+", default=[10])
    b.add_argument("--beta", type=float, nargs="+", default=[1.0, 2.0, 3.0])
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--replicates", type=int, default=1)
    b.add_argument("--solvers", default="d0-ws,d2-ws",
                   help="comma separated tags: d0-ws, d2-nows, root-d1, ...")
    b.add_argument("--time-limit", type=float, default=3600.0)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--oracle", default="internal")
    b.add_argument("--out", help="results CSV (stdout if omitted)")
    b.add_argument("--table", help="also write the aligned summary table here")
    b.add_argument("--trace", action="store_true")

    pr = sub.add_parser("profile", help="performance profile from a results CSV")
    pr.add_argument("results")
    pr.add_argument("--out")
    return parser


def _config(args) -> BnbConfig:
    return BnbConfig(drop_rule=args.drop, warmstart=args.warmstart, time_limit=args.time_limit,
                     perturbation=args.perturb, seed=args.seed)


def _cmd_generate(args):
    spec = bench.GeneratorSpec(args.problem, args.nodes, args.scenarios, args.beta,
                               args.seed, args.replicate)
    _write(args.out, save_instance(bench.generate_instance(spec)))


def _cmd_solve(args):
    instance = load_instance(Path(args.instance).read_bytes())
    res = solve_bnb(instance, make_oracle(instance, args.oracle), _config(args))
    report = {
        "instance": instance.name,
        "status": res.status.value,
        "value": res.value,
        "global_lb": res.global_lb,
        "nodes": res.node_count,
        "iterations": res.total_sd_iterations,
        "incumbent": [int(b) for b in res.incumbent],
    }
    print(f"status {res.status.value}  value {res.value!r}  bound {res.global_lb!r}  "
          f"nodes {res.node_count}  iterations {res.total_sd_iterations}")
    print(f"time {res.wall_time:.3f} s", file=sys.stderr)
    if args.out:
        _write(args.out, json.dumps(report, indent=1, sort_keys=True) + "\n")


def _cmd_root(args):
    instance = load_instance(Path(args.instance).read_bytes())
    res = evaluate_root(instance, make_oracle(instance, args.oracle), _config(args))
    print(f"status {res.status.value}  relaxation {res.relaxation_value!r}  "
          f"bound {res.lower_bound!r}  iterations {res.iterations}")
    print(f"time {res.time:.3f} s", file=sys.stderr)
    if args.out:
        report = {"instance": instance.name, "status": res.status.value,
                  "relaxation_value": res.relaxation_value, "lower_bound": res.lower_bound,
                  "iterations": res.iterations}
        _write(args.out, json.dumps(report, indent=1, sort_keys=True) + "\n")


def _cmd_bench(args):
    solvers = [bench.SolverConfig.parse(t) for t in args.solvers.split(",") if t.strip()]
    instances = [bench.generate_instance(bench.GeneratorSpec(args.problem, nn, m, beta, args.seed, r))
                 for nn in args.nodes for m in args.scenarios for beta in args.beta
                 for r in range(args.replicates)]
    records = bench.run_benchmark(instances, solvers, args.time_limit, args.jobs, args.oracle)
    for r in records:
        if r.error:
            print(f"{r.instance} {r.solver}: {r.error}", file=sys.stderr)
    _write(args.out, bench.records_to_csv(records))
    table = bench.format_table(bench.summarize(records))
    if args.table:
        _write(args.table, table)
    sys.stderr.write(table)


def _cmd_profile(args):
    records = bench.records_from_csv(Path(args.results).read_text())
    prof = bench.profile_from_records(records)
    if prof.excluded:
        print(f"{prof.excluded} instance(s) solved by no solver were excluded", file=sys.stderr)
    _write(args.out, bench.profile_to_csv(prof))


COMMANDS = {"generate": _cmd_generate, "solve": _cmd_solve, "root": _cmd_root,
            "bench": _cmd_bench, "profile": _cmd_profile}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if getattr(args, "trace", False) else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except (InstanceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2 if isinstance(exc, (InstanceError, OSError)) else 1
    except (OracleError, RuntimeError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
