"""Command-line entry point: generate, solve, exact, bench, report."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from .bench import BenchOptions, ExperimentMatrix, format_table, run_bench, write_report, write_results
from .constructive import PIPELINES, PipelineConfig, run_all_pipelines, run_pipeline, stage2_rule
from .exact import InfeasibleError, solve_exact
from .improve import PIVOT_BOUNDS, VNS_METRICS, VnsConfig, local_x, vns_transport
from .instance import GenConfig, InstanceError, generate_instance, load_instance, save_instance
from .model import clean_shipping_costs, save_solution
from .sa import ACCEPTANCE, SaConfig, estimate_initial_temperature, sa_solve, sample_costs

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_PARTIAL = 0, 1, 2, 3
ALGOS = (*PIPELINES, "local-x", "vns", "sa", "exact")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_sa_flags(p):
    g = p.add_argument_group("simulated annealing")
    g.add_argument("--t0", type=float, default=8000.0, help="initial temperature")
    g.add_argument("--theta", type=float, default=0.75, help="cooling factor")
    g.add_argument("--t-final", type=float, default=0.01, help="stop once the temperature reaches this")
    g.add_argument("--iters", type=int, default=None, help="iteration cap (default 100 up to 5 facilities, else 350)")
    g.add_argument("--acceptance", choices=ACCEPTANCE, default="metropolis")
    g.add_argument("--auto-t0", action="store_true", help="estimate T0 from sampled cost differences")


def _add_vns_flags(p):
    p.add_argument("--kmax", type=int, default=50, help="VNS failure limit per scenario")
    p.add_argument("--vns-metric", choices=VNS_METRICS, default="clean",
                   help="clean: clean-shipping cost; coeff: full per-unit coefficient")
    p.add_argument("--pivot-bound", choices=PIVOT_BOUNDS, default="losing",
                   help="cap each pivot by the two losing corners or by all four")


def _sa_config(args, seed) -> SaConfig:
    return SaConfig(T0=args.t0, theta=args.theta, T_final=args.t_final, max_iter=args.iters,
                    seed=seed, acceptance=args.acceptance)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="scdopt", description=__doc__)
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write a random instance")
    g.add_argument("--facilities", type=int, required=True)
    g.add_argument("--consumers", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--allow-large", action="store_true", help="permit more than 16 facilities")

    s = sub.add_parser("solve", help="run one algorithm on an instance")
    s.add_argument("instance")
    s.add_argument("--algo", required=True, choices=ALGOS, metavar="ALGO",
                   help="one of: " + ", ".join(ALGOS))
    s.add_argument("--out", help="solution JSON path")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--allow-large", action="store_true")
    _add_vns_flags(s)
    _add_sa_flags(s)

    e = sub.add_parser("exact", help="solve an instance to optimality")
    e.add_argument("instance")
    e.add_argument("--out")
    e.add_argument("--time-budget", type=float, default=None, help="seconds; returns the incumbent if hit")
    e.add_argument("--allow-large", action="store_true")

    b = sub.add_parser("bench", help="run the experiment matrix")
    b.add_argument("--consumers", type=int, nargs="+", default=[2, 5, 10, 20])
    b.add_argument("--facilities", type=int, nargs="+", default=[2, 5, 10])
    b.add_argument("--instances", type=int, default=10)
    b.add_argument("--replications", type=int, default=30)
    b.add_argument("--seed", type=int, default=0, help="master seed")
    b.add_argument("--out", default="results.csv")
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--exact-max-facilities", type=int, default=10)
    b.add_argument("--exact-budget", type=float, default=600.0, help="seconds per exact solve")
    _add_vns_flags(b)
    _add_sa_flags(b)

    r = sub.add_parser("report", help="gap tables and plot data from a results CSV")
    r.add_argument("results")
    r.add_argument("--out-dir", default="report")
    return ap


def _print_solution(sol, wall):
    for k, v in sol.cost.as_dict().items():
        print(f"{k:>14}: {v:,.2f}")
    print(f"{'wall_time_s':>14}: {wall:.4f}")


def cmd_generate(args) -> int:
    cfg = GenConfig(args.facilities, args.consumers, seed=args.seed, allow_large=args.allow_large)
    try:
        inst = generate_instance(cfg)
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    save_instance(inst, args.out)
    print(f"total capacity {inst.capacity.sum():g}, total demand {inst.total_demand:g}, "
          f"scenarios {inst.num_scenarios}")
    return EXIT_OK


def _best_start(inst, seed):
    sols = run_all_pipelines(inst, seed=seed)
    name = min(sols, key=lambda k: sols[k].total)
    return name, sols[name]


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    t = time.perf_counter()
    if args.algo == "exact":
        try:
            sol = solve_exact(inst, allow_large=args.allow_large).best
        except InfeasibleError as exc:
            print(f"infeasible: {exc}", file=sys.stderr)
            return EXIT_INFEASIBLE
    elif args.algo in PIPELINES:
        sol = run_pipeline(inst, PipelineConfig.from_name(args.algo, seed=args.seed))
    else:
        name, start = _best_start(inst, args.seed)
        if args.algo == "local-x":
            sol = local_x(inst, start, stage2_rule(PipelineConfig.from_name(name, seed=args.seed)))
        elif args.algo == "vns":
            sol, _ = vns_transport(inst, start, VnsConfig(args.kmax, args.seed, args.vns_metric, args.pivot_bound))
            before, after = clean_shipping_costs(inst, start.p), clean_shipping_costs(inst, sol.p)
            print("scenario clean_before clean_after")
            for s_idx, (a, b) in enumerate(zip(before, after)):
                print(f"{s_idx} {a:.6f} {b:.6f}")
        else:
            cfg = _sa_config(args, args.seed)
            if args.auto_t0:
                t0 = estimate_initial_temperature(sample_costs(inst, start, seed=args.seed))
                if t0 > cfg.T_final:
                    cfg = SaConfig(**{**cfg.__dict__, "T0": t0})
                print(f"T0 = {cfg.T0:.4f}")
            sol, _ = sa_solve(inst, start, cfg)
    wall = time.perf_counter() - t
    _print_solution(sol, wall)
    if args.out:
        save_solution(sol, args.out)
    return EXIT_OK


def cmd_exact(args) -> int:
    inst = load_instance(args.instance)
    try:
        res = solve_exact(inst, time_budget=args.time_budget, allow_large=args.allow_large)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    if res.best is None:
        print("time budget ran out before any feasible selection was found", file=sys.stderr)
        return EXIT_INFEASIBLE
    _print_solution(res.best, res.wall_time)
    print(f"{'proven':>14}: {res.proven}")
    print(f"{'selections':>14}: {res.enumerated_x}")
    if args.out:
        save_solution(res.best, args.out)
    return EXIT_OK


def cmd_bench(args) -> int:
    matrix = ExperimentMatrix(tuple(args.consumers), tuple(args.facilities), args.instances, args.replications)
    opts = BenchOptions(master_seed=args.seed, exact_max_facilities=args.exact_max_facilities,
                        exact_time_budget=args.exact_budget, kmax=args.kmax, vns_metric=args.vns_metric,
                        pivot_bound=args.pivot_bound, auto_t0=args.auto_t0,
                        sa=_sa_config(args, 0))
    rows, failures = run_bench(matrix, opts, jobs=args.jobs)
    write_results(args.out, rows, matrix, args.seed)
    print(f"{len(rows)} rows written to {args.out}")
    if failures:
        print(f"{failures} runs failed; see NaN rows", file=sys.stderr)
        return EXIT_PARTIAL
    return EXIT_OK


def cmd_report(args) -> int:
    try:
        table = write_report(args.results, args.out_dir)
    except (ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(format_table(table))
    print(f"\nwritten to {Path(args.out_dir)}/")
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "solve": cmd_solve, "exact": cmd_exact,
            "bench": cmd_bench, "report": cmd_report}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    np.seterr(all="ignore")
    try:
        return COMMANDS[args.cmd](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
