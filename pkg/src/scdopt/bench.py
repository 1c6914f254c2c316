"""Benchmark harness: experiment matrix, result rows, gap tables and plot data."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from . import __version__
from .constructive import PIPELINES, PipelineConfig, run_pipeline, stage2_rule
from .exact import solve_exact
from .improve import VnsConfig, local_x, vns_transport
from .instance import GenConfig, generate_instance
from .sa import SaConfig, estimate_initial_temperature, sa_solve, sample_costs, split_seeds

CSV_VERSION = "1"
COLUMNS = ["set_id", "instance_id", "algorithm", "replication", "cost", "gap", "time_ms", "seed"]
# stable column order for reports
ALGORITHMS = (*PIPELINES, "local-x", "vns", "sa")


@dataclass(frozen=True)
class ExperimentMatrix:
    consumers: tuple = (2, 5, 10, 20)
    facilities: tuple = (2, 5, 10)
    instances_per_set: int = 10
    replications: int = 30

    def sets(self) -> dict[int, tuple[int, int]]:
        """set_id -> (num_consumers, num_facilities), consumers varying slowest."""
        out = {}
        for C in self.consumers:
            for L in self.facilities:
                out[len(out) + 1] = (C, L)
        return out


@dataclass
class ResultRow:
    set_id: int
    instance_id: int
    algorithm: str
    replication: int
    cost: float
    gap: float
    time_ms: float
    seed: int


@dataclass(frozen=True)
class BenchOptions:
    master_seed: int = 0
    exact_max_facilities: int = 10
    exact_time_budget: float | None = 600.0
    kmax: int = 50
    vns_metric: str = "clean"
    pivot_bound: str = "losing"
    auto_t0: bool = False
    sa: SaConfig = field(default_factory=SaConfig)


def instance_seed(master: int, set_id: int, instance_id: int) -> int:
    return split_seeds(master, 1, set_id, instance_id)[0]


def _timed(fn, *args):
    t = time.perf_counter()
    out = fn(*args)
    return out, (time.perf_counter() - t) * 1000.0


def run_instance(set_id: int, instance_id: int, num_consumers: int, num_facilities: int,
                 replications: int, opts: BenchOptions) -> tuple[list[ResultRow], int]:
    """Every algorithm on one generated instance. Returns (rows, failure_count)."""
    seed = instance_seed(opts.master_seed, set_id, instance_id)
    inst = generate_instance(GenConfig(num_facilities, num_consumers, seed=seed))
    rep_seeds = split_seeds(opts.master_seed, replications, set_id, instance_id, 1)
    raw: list[tuple[str, int, float, float, int]] = []
    failures = 0

    def attempt(name, rep, rseed, fn, *args):
        nonlocal failures
        try:
            sol, ms = _timed(fn, *args)
        except Exception:  # recorded per row, the bench keeps going
            failures += 1
            raw.append((name, rep, math.nan, math.nan, rseed))
            return None
        raw.append((name, rep, sol.total, ms, rseed))
        return sol

    if num_facilities <= opts.exact_max_facilities:
        try:
            res, ms = _timed(solve_exact, inst, opts.exact_time_budget)
            if res.best is not None:
                raw.append(("exact" if res.proven else "exact-incumbent", 0, res.optimum, ms, seed))
        except Exception:
            failures += 1
            raw.append(("exact", 0, math.nan, math.nan, seed))

    start = None
    for rep, rseed in enumerate(rep_seeds):
        sols = {}
        for name in PIPELINES:
            cfg = PipelineConfig.from_name(name, seed=rseed)
            # only the randomised rule needs more than one replication
            if cfg.stage2 != "rgih" and rep > 0:
                continue
            sols[name] = attempt(name, rep, rseed, run_pipeline, inst, cfg)
        if rep == 0:
            ok = {k: v for k, v in sols.items() if v is not None}
            if not ok:
                break
            best_name = min(ok, key=lambda k: ok[k].total)
            start = ok[best_name]
            rule = stage2_rule(PipelineConfig.from_name(best_name, seed=rseed))
            attempt("local-x", 0, rseed, local_x, inst, start, rule)
            sa_base = asdict(opts.sa)
            if opts.auto_t0:
                t0 = estimate_initial_temperature(sample_costs(inst, start, seed=rseed))
                if t0 > opts.sa.T_final:
                    sa_base["T0"] = t0
        attempt("vns", rep, rseed, lambda i, s, c: vns_transport(i, s, c)[0], inst, start,
                VnsConfig(opts.kmax, rseed, opts.vns_metric, opts.pivot_bound))
        sa_cfg = SaConfig(**{**sa_base, "seed": rseed})
        attempt("sa", rep, rseed, lambda i, s, c: sa_solve(i, s, c)[0], inst, start, sa_cfg)

    ref = reference_value(pd.DataFrame(raw, columns=["algorithm", "replication", "cost", "t", "s"]))
    rows = [
        ResultRow(set_id, instance_id, a, r, c, (c - ref) / ref if ref > 0 else math.nan, ms, s)
        for a, r, c, ms, s in raw
    ]
    return rows, failures


def reference_value(df: pd.DataFrame) -> float:
    """Proven exact optimum if present, else the cheapest cost any algorithm reached."""
    exact = df.loc[df["algorithm"] == "exact", "cost"].dropna()
    if len(exact):
        return float(exact.iloc[0])
    costs = df["cost"].dropna()
    return float(costs.min()) if len(costs) else math.nan


def run_bench(matrix: ExperimentMatrix, opts: BenchOptions, jobs: int = 1) -> tuple[list[ResultRow], int]:
    tasks = [
        (sid, i, C, L, matrix.replications, opts)
        for sid, (C, L) in matrix.sets().items()
        for i in range(1, matrix.instances_per_set + 1)
    ]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(run_instance, *zip(*tasks)))
    else:
        results = [run_instance(*t) for t in tasks]
    rows = [r for rs, _ in results for r in rs]
    rows.sort(key=lambda r: (r.set_id, r.instance_id, r.algorithm, r.replication))
    return rows, sum(f for _, f in results)


def header_line(matrix: ExperimentMatrix, master_seed: int) -> str:
    sets = ",".join(f"{sid}:{C}x{L}" for sid, (C, L) in matrix.sets().items())
    return (f"# scdopt-bench csv={CSV_VERSION} version={__version__} master_seed={master_seed} "
            f"instances={matrix.instances_per_set} replications={matrix.replications} sets={sets}")


def write_results(path, rows: list[ResultRow], matrix: ExperimentMatrix, master_seed: int) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(header_line(matrix, master_seed) + "\n")
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([r.set_id, r.instance_id, r.algorithm, r.replication,
                        repr(float(r.cost)), repr(float(r.gap)), f"{r.time_ms:.3f}", r.seed])


def parse_header(line: str) -> dict:
    """Key/value fields of the ``#`` header line; ``sets`` becomes {id: (C, L)}."""
    out = {}
    for tok in line.lstrip("#").split():
        if "=" in tok:
            k, v = tok.split("=", 1)
            out[k] = v
    if "sets" in out:
        sets = {}
        for item in out["sets"].split(","):
            sid, dims = item.split(":")
            C, L = dims.split("x")
            sets[int(sid)] = (int(C), int(L))
        out["sets"] = sets
    return out


def read_results(path) -> tuple[dict, pd.DataFrame]:
    text = Path(path).read_text()
    lines = text.splitlines()
    meta = parse_header(lines[0]) if lines and lines[0].startswith("#") else {}
    body = "\n".join(ln for ln in lines if not ln.startswith("#"))
    df = pd.read_csv(io.StringIO(body), float_precision="round_trip") if body.strip() else pd.DataFrame(columns=COLUMNS)
    if df.empty:
        raise ValueError("results file has no rows")
    return meta, df


def summarize(df: pd.DataFrame, sets: dict | None = None) -> pd.DataFrame:
    """Min/avg/max gap and mean time per (set, algorithm).

    Replications are averaged per instance first, so randomised algorithms count once
    per instance with their mean cost.
    """
    per_inst = (df.groupby(["set_id", "instance_id", "algorithm"], as_index=False)
                  .agg(gap=("gap", "mean"), time_ms=("time_ms", "mean")))
    table = (per_inst.groupby(["set_id", "algorithm"])
                     .agg(min_gap=("gap", "min"), avg_gap=("gap", "mean"),
                          max_gap=("gap", "max"), avg_time_ms=("time_ms", "mean"),
                          instances=("gap", "size"))
                     .reset_index())
    if sets:
        table.insert(1, "consumers", table["set_id"].map(lambda s: sets[s][0]))
        table.insert(2, "facilities", table["set_id"].map(lambda s: sets[s][1]))
    order = {a: i for i, a in enumerate(("exact", "exact-incumbent", *ALGORITHMS))}
    table["_o"] = table["algorithm"].map(lambda a: order.get(a, len(order)))
    return table.sort_values(["set_id", "_o"]).drop(columns="_o").reset_index(drop=True)


def plot_data(table: pd.DataFrame) -> dict[str, dict[str, pd.DataFrame]]:
    """{metric: {algorithm: DataFrame(facilities, value)}} for gap and time plots."""
    if "facilities" not in table:
        raise ValueError("summary lacks facility counts; the CSV header carries them")
    out = {"gap": {}, "time": {}}
    for algo, grp in table.groupby("algorithm"):
        by_l = grp.groupby("facilities")
        out["gap"][algo] = by_l["avg_gap"].mean().reset_index(name="value")
        out["time"][algo] = by_l["avg_time_ms"].mean().reset_index(name="value")
    return out


def format_table(table: pd.DataFrame) -> str:
    shown = table.copy()
    for col in ("min_gap", "avg_gap", "max_gap"):
        shown[col] = shown[col].map(lambda g: f"{100 * g:.2f}%")
    shown["avg_time_ms"] = shown["avg_time_ms"].map(lambda t: f"{t:.2f}")
    return shown.to_string(index=False)


def write_report(results_path, out_dir) -> pd.DataFrame:
    meta, df = read_results(results_path)
    table = summarize(df, meta.get("sets"))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    table.to_csv(out / "summary.csv", index=False)
    (out / "summary.txt").write_text(format_table(table) + "\n")
    if "facilities" in table:
        for metric, per_algo in plot_data(table).items():
            for algo, frame in per_algo.items():
                frame.to_csv(out / f"plot_{metric}_{algo}.csv", index=False, header=["facilities", "value"])
    return table


def rows_frame(rows: list[ResultRow]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in rows], columns=COLUMNS)


def gap_consistent(df: pd.DataFrame) -> bool:
    """True when every row's gap equals (cost - reference) / reference exactly."""
    for _, grp in df.groupby(["set_id", "instance_id"]):
        ref = reference_value(grp)
        expect = (grp["cost"] - ref) / ref
        ok = np.isclose(grp["gap"], expect, rtol=0, atol=0, equal_nan=True)
        if not ok.all():
            return False
    return True
