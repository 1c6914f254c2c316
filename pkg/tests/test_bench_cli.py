import json
import math

import numpy as np
import pandas as pd
import pytest

from scdopt.bench import (
    COLUMNS,
    BenchOptions,
    ExperimentMatrix,
    ResultRow,
    gap_consistent,
    parse_header,
    read_results,
    reference_value,
    rows_frame,
    run_bench,
    summarize,
    write_report,
    write_results,
)
from scdopt.cli import EXIT_INFEASIBLE, EXIT_OK, EXIT_USAGE, main
from scdopt.sa import SaConfig


@pytest.fixture
def inst_path(tmp_path):
    path = tmp_path / "inst.json"
    assert main(["generate", "--facilities", "3", "--consumers", "4", "--seed", "9", "--out", str(path)]) == EXIT_OK
    return path


def solve(inst_path, tmp_path, algo, *extra):
    out = tmp_path / f"{algo}.json"
    assert main(["solve", str(inst_path), "--algo", algo, "--out", str(out), *extra]) == EXIT_OK
    return json.loads(out.read_text())


def test_generate_is_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        main(["generate", "--facilities", "4", "--consumers", "5", "--seed", "42", "--out", str(p)])
    assert a.read_bytes() == b.read_bytes()


def test_generate_refuses_twenty_facilities(tmp_path, capsys):
    code = main(["generate", "--facilities", "20", "--consumers", "2", "--out", str(tmp_path / "x.json")])
    assert code == EXIT_USAGE
    assert "2^20" in capsys.readouterr().err
    assert not (tmp_path / "x.json").exists()


def test_bad_arguments_exit_usage(inst_path):
    with pytest.raises(SystemExit) as ei:
        main(["solve", str(inst_path), "--algo", "nope"])
    assert ei.value.code == EXIT_USAGE


def test_exact_not_above_heuristics(inst_path, tmp_path):
    opt = solve(inst_path, tmp_path, "exact")["cost"]["total"]
    for algo in ("bgh-fsih", "cbgh-gih", "sa", "vns", "local-x"):
        assert solve(inst_path, tmp_path, algo)["cost"]["total"] >= opt * (1 - 1e-9)


def test_exact_command(inst_path, tmp_path, capsys):
    out = tmp_path / "e.json"
    assert main(["exact", str(inst_path), "--out", str(out)]) == EXIT_OK
    assert "proven" in capsys.readouterr().out
    assert json.loads(out.read_text())["x"]


def test_exact_infeasible_exit(inst_path, tmp_path):
    data = json.loads(inst_path.read_text())
    for f in data["facilities"]:
        f["capacity"] = 1
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(data))
    assert main(["exact", str(path)]) == EXIT_INFEASIBLE


def test_sa_seed_determinism(inst_path, tmp_path):
    a = solve(inst_path, tmp_path, "sa", "--seed", "4")
    b = solve(inst_path, tmp_path, "sa", "--seed", "4")
    assert a == b


def test_vns_prints_per_scenario_costs(inst_path, capsys):
    assert main(["solve", str(inst_path), "--algo", "vns", "--kmax", "30"]) == EXIT_OK
    lines = capsys.readouterr().out.splitlines()
    i = lines.index("scenario clean_before clean_after")
    rows = [ln.split() for ln in lines[i + 1:i + 9]]
    assert len(rows) == 8
    for _, before, after in rows:
        assert float(after) <= float(before) * (1 + 1e-12)


def small_matrix():
    return ExperimentMatrix(consumers=(2, 3), facilities=(2,), instances_per_set=2, replications=3)


def fast_opts(**kw):
    return BenchOptions(master_seed=3, kmax=20, sa=SaConfig(max_iter=15), **kw)


def test_bench_rows_and_gaps():
    rows, failures = run_bench(small_matrix(), fast_opts())
    assert failures == 0
    df = rows_frame(rows)
    assert gap_consistent(df)
    assert set(df["algorithm"]) >= {"exact", "bgh-fsih", "sgh-rgih", "local-x", "vns", "sa"}
    # randomised rows per replication, deterministic pipelines once
    one = df[(df.set_id == 1) & (df.instance_id == 1)]
    assert (one.algorithm == "sa").sum() == 3 and (one.algorithm == "bgh-fsih").sum() == 1
    assert (one.algorithm == "cbgh-rgih").sum() == 3
    for _, grp in df.groupby(["set_id", "instance_id"]):
        ref = grp.loc[grp.algorithm == "exact", "cost"].iloc[0]
        assert (grp["cost"] >= ref * (1 - 1e-9)).all()
        start = grp[(grp.replication == 0) & grp.algorithm.str.contains("-")
                    & ~grp.algorithm.isin(["local-x"])]["cost"].min()
        assert grp.loc[grp.algorithm == "local-x", "cost"].iloc[0] <= start


def test_bench_jobs_match_serial():
    a, _ = run_bench(small_matrix(), fast_opts(), jobs=1)
    b, _ = run_bench(small_matrix(), fast_opts(), jobs=2)
    key = lambda rs: [(r.set_id, r.instance_id, r.algorithm, r.replication, r.cost, r.seed) for r in rs]
    assert key(a) == key(b)


def test_bench_without_exact_uses_best_found():
    rows, _ = run_bench(small_matrix(), fast_opts(exact_max_facilities=1))
    df = rows_frame(rows)
    assert "exact" not in set(df.algorithm)
    assert gap_consistent(df)
    for _, grp in df.groupby(["set_id", "instance_id"]):
        assert grp["gap"].min() == 0.0


def test_bench_cli_writes_csv(tmp_path):
    out = tmp_path / "r.csv"
    code = main(["bench", "--consumers", "2", "--facilities", "2", "--instances", "1", "--replications", "2",
                 "--seed", "1", "--out", str(out), "--kmax", "10", "--iters", "5"])
    assert code == EXIT_OK
    lines = out.read_text().splitlines()
    meta = parse_header(lines[0])
    assert meta["csv"] == "1" and meta["master_seed"] == "1" and meta["sets"] == {1: (2, 2)}
    assert lines[1].split(",") == COLUMNS
    _, df = read_results(out)
    assert gap_consistent(df)


def test_matrix_set_order():
    sets = ExperimentMatrix().sets()
    assert len(sets) == 12
    assert sets[1] == (2, 2) and sets[3] == (2, 10) and sets[4] == (5, 2) and sets[12] == (20, 10)


def hand_rows():
    rows = [ResultRow(1, 1, "exact", 0, 100.0, 0.0, 5.0, 0)]
    rows += [ResultRow(1, 1, "sa", k, c, (c - 100) / 100, 1.0, k) for k, c in enumerate([110.0, 120.0, 130.0])]
    rows += [ResultRow(1, 2, "bgh-fsih", 0, 90.0, 0.0, 1.0, 0),
             ResultRow(1, 2, "sa", 0, 99.0, 0.1, 1.0, 0)]
    return rows


def test_reference_rule():
    df = rows_frame(hand_rows())
    assert reference_value(df[df.instance_id == 1]) == 100.0
    assert reference_value(df[df.instance_id == 2]) == 90.0
    assert math.isnan(reference_value(df.iloc[0:0]))


def test_summary_averages_replications_first():
    table = summarize(rows_frame(hand_rows()), {1: (2, 2)})
    sa = table[table.algorithm == "sa"].iloc[0]
    # instance 1 mean gap 0.2, instance 2 gap 0.1
    assert sa.min_gap == pytest.approx(0.1) and sa.max_gap == pytest.approx(0.2)
    assert sa.avg_gap == pytest.approx(0.15) and sa.instances == 2


def test_report_single_row_and_negative_gap(tmp_path):
    rows = [ResultRow(1, 1, "exact-incumbent", 0, 100.0, 0.0, 1.0, 0),
            ResultRow(1, 1, "sa", 0, 95.0, -0.05, 1.0, 0)]
    path = tmp_path / "r.csv"
    write_results(path, rows, ExperimentMatrix((2,), (2,), 1, 1), 0)
    table = write_report(path, tmp_path / "rep")
    assert table.loc[table.algorithm == "sa", "min_gap"].iloc[0] == pytest.approx(-0.05)
    plot = pd.read_csv(tmp_path / "rep" / "plot_gap_sa.csv")
    assert list(plot.columns) == ["facilities", "value"]
    assert (tmp_path / "rep" / "summary.txt").exists()


def test_report_cli_exit_codes(tmp_path):
    rows = [ResultRow(1, 1, "exact", 0, 100.0, 0.0, 1.0, 0)]
    path = tmp_path / "r.csv"
    write_results(path, rows, ExperimentMatrix((2,), (2,), 1, 1), 0)
    assert main(["report", str(path), "--out-dir", str(tmp_path / "o")]) == EXIT_OK
    empty = tmp_path / "empty.csv"
    empty.write_text("# scdopt-bench csv=1\n" + ",".join(COLUMNS) + "\n")
    assert main(["report", str(empty), "--out-dir", str(tmp_path / "o2")]) == EXIT_USAGE
    assert main(["report", str(tmp_path / "missing.csv")]) == EXIT_USAGE


def test_results_round_trip_exact_floats(tmp_path):
    c = 1234567.891011121
    rows = [ResultRow(1, 1, "exact", 0, c, 0.0, 1.0, 0), ResultRow(1, 1, "sa", 0, c * 1.01, 0.01, 1.0, 0)]
    path = tmp_path / "r.csv"
    write_results(path, rows, ExperimentMatrix((2,), (2,), 1, 1), 0)
    _, df = read_results(path)
    assert df.loc[0, "cost"] == c
    assert np.isfinite(df["gap"]).all()
