"""Benchmark harness and CLI tests on generated instance files."""

import csv
import io
import json
import os

import numpy as np
import pytest

from cvrpls.cli import main
from cvrpls.harness import (AGGREGATE_COLUMNS, REPORT_COLUMNS, RunConfig,
                            aggregate_rows, emit_report, run_benchmark)
from cvrpls.model import parse_solution


def _write_instance(path, name, rng, n=12, capacity=30, side=100):
    coords = rng.integers(0, side, size=(n + 1, 2))
    demands = rng.integers(1, 8, size=n)
    lines = [f"NAME : {name}", "TYPE : CVRP", f"DIMENSION : {n + 1}",
             "EDGE_WEIGHT_TYPE : EUC_2D", f"CAPACITY : {capacity}",
             "NODE_COORD_SECTION"]
    lines += [f"{i + 1} {coords[i][0]} {coords[i][1]}" for i in range(n + 1)]
    lines.append("DEMAND_SECTION")
    lines.append("1 0")
    lines += [f"{i + 2} {demands[i]}" for i in range(n)]
    lines += ["DEPOT_SECTION", "1", "-1", "EOF"]
    path.write_text("\n".join(lines) + "\n")
    return str(path)


@pytest.fixture
def two_instances(tmp_path):
    rng = np.random.default_rng(90)
    a = _write_instance(tmp_path / "alpha.vrp", "alpha", rng, n=10)
    b = _write_instance(tmp_path / "bravo.vrp", "bravo", rng, n=12)
    return tmp_path, [a, b]


def _strip_timing(rows):
    out = []
    for r in rows:
        r = dict(r)
        r.pop("time", None)
        out.append(r)
    return out


def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(instances=["x"], runs=0)
    with pytest.raises(ValueError):
        RunConfig(instances=["x"], time_limit=0)
    with pytest.raises(ValueError):
        RunConfig(instances=["x"], format="xml")


def test_rows_have_schema_and_reruns_are_identical(two_instances):
    _, paths = two_instances
    cfg = RunConfig(instances=paths, space="bs:2", runs=2, seed=7,
                    gamma=6, filter="off", time_limit=60.0)
    rows1, fail1 = run_benchmark(cfg)
    rows2, fail2 = run_benchmark(cfg)
    assert fail1 == fail2 == []
    assert len(rows1) == 4  # two instances x two runs
    for row in rows1:
        assert list(row) == REPORT_COLUMNS
        assert row["space"] == "bs:2" and row["k"] == 2
        assert row["converged"] == 1
        assert row["cost"] > 0
    assert [r["seed"] for r in rows1] == [7, 8, 7, 8]
    assert _strip_timing(rows1) == _strip_timing(rows2)


def test_parse_failure_is_isolated(two_instances, tmp_path):
    base, paths = two_instances
    bad = tmp_path / "broken.vrp"
    bad.write_text("NAME : broken\nTYPE : CVRP\nGIBBERISH\n")
    cfg = RunConfig(instances=[paths[0], str(bad)], runs=1,
                    filter="off", time_limit=60.0)
    rows, failures = run_benchmark(cfg)
    assert len(rows) == 1 and rows[0]["instance"] == "alpha"
    assert len(failures) == 1
    assert failures[0][0] == str(bad)


def test_missing_file_reported_as_failure(tmp_path):
    cfg = RunConfig(instances=[str(tmp_path / "nope.vrp")],
                    time_limit=60.0)
    rows, failures = run_benchmark(cfg)
    assert rows == []
    assert len(failures) == 1


def test_glob_expansion(two_instances):
    base, paths = two_instances
    cfg = RunConfig(instances=[str(base / "*.vrp")], runs=1,
                    filter="off", time_limit=60.0)
    rows, failures = run_benchmark(cfg)
    assert [r["instance"] for r in rows] == ["alpha", "bravo"]


def test_gap_column_with_bks_sidecar(two_instances, tmp_path):
    base, paths = two_instances
    cfg0 = RunConfig(instances=[paths[0]], runs=1, filter="off",
                     time_limit=60.0)
    rows0, _ = run_benchmark(cfg0)
    z = rows0[0]["cost"]
    bks = tmp_path / "bks.txt"
    bks.write_text(f"# name value\nalpha {z - 10}\n")
    cfg = RunConfig(instances=[paths[0]], runs=1, filter="off",
                    time_limit=60.0, bks=str(bks))
    rows, _ = run_benchmark(cfg)
    want = round(100.0 * (z - (z - 10)) / (z - 10), 4)
    assert rows[0]["gap"] == want


def test_aggregate_block():
    rows = [
        {"instance": "a", "space": "classic", "k": "", "cost": 10,
         "gap": 1.0, "time": 2.0},
        {"instance": "a", "space": "classic", "k": "", "cost": 14,
         "gap": 3.0, "time": 4.0},
        {"instance": "a", "space": "bs:2", "k": 2, "cost": 9,
         "gap": "", "time": 1.0},
    ]
    aggs = aggregate_rows(rows)
    assert [list(a) for a in aggs] == [AGGREGATE_COLUMNS] * 2
    by_space = {a["space"]: a for a in aggs}
    cl = by_space["classic"]
    assert (cl["runs"], cl["mean_cost"], cl["best_cost"]) == (2, 12.0, 10)
    assert (cl["mean_gap"], cl["mean_time"]) == (2.0, 3.0)
    assert by_space["bs:2"]["mean_gap"] == ""


def test_emit_report_csv_shape(two_instances):
    _, paths = two_instances
    cfg = RunConfig(instances=[paths[0]], runs=2, filter="off",
                    time_limit=60.0)
    rows, _ = run_benchmark(cfg)
    text = emit_report(rows, "csv")
    blocks = text.split("\n\n")
    assert len(blocks) == 2
    head = list(csv.reader(io.StringIO(blocks[0])))
    assert head[0] == REPORT_COLUMNS
    assert len(head) == 3
    agg = list(csv.reader(io.StringIO(blocks[1])))
    assert agg[0] == AGGREGATE_COLUMNS
    assert len(agg) == 2


def test_emit_report_empty_is_header_only():
    text = emit_report([], "csv")
    head, agg = text.split("\n\n")
    assert head.strip() == ",".join(REPORT_COLUMNS)
    assert agg.strip() == ",".join(AGGREGATE_COLUMNS)


def test_emit_report_jsonl(two_instances):
    _, paths = two_instances
    cfg = RunConfig(instances=[paths[0]], runs=1, filter="off",
                    time_limit=60.0, format="jsonl")
    rows, _ = run_benchmark(cfg)
    text = emit_report(rows, "jsonl")
    lines = [json.loads(l) for l in text.strip().split("\n")]
    assert set(lines[0]) == {"row"}
    assert set(lines[-1]) == {"aggregate"}
    assert lines[0]["row"]["instance"] == "alpha"


def test_emit_solutions_files_parse_back(two_instances, tmp_path):
    _, paths = two_instances
    sol_dir = tmp_path / "sols"
    cfg = RunConfig(instances=[paths[0]], space="bs:1", runs=2, seed=3,
                    filter="off", time_limit=60.0,
                    emit_solutions=str(sol_dir))
    rows, _ = run_benchmark(cfg)
    names = sorted(os.listdir(sol_dir))
    assert names == ["alpha.bs1.s3.sol", "alpha.bs1.s4.sol"]
    for name, row in zip(names, rows):
        routes, z = parse_solution((sol_dir / name).read_text())
        assert z == row["cost"]
        assert sorted(v for r in routes for v in r) == list(range(1, 11))


def test_worker_pool_matches_serial(two_instances, monkeypatch):
    _, paths = two_instances
    cfg = RunConfig(instances=paths, runs=2, seed=1, filter="off",
                    time_limit=60.0)
    serial, _ = run_benchmark(cfg)
    monkeypatch.setenv("CVRPLS_WORKERS", "2")
    pooled, _ = run_benchmark(cfg)
    assert _strip_timing(serial) == _strip_timing(pooled)


def test_cli_end_to_end(two_instances, tmp_path, capsys):
    _, paths = two_instances
    out = tmp_path / "report.csv"
    rc = main(["--instances", paths[0], "--space", "exact",
               "--runs", "1", "--seed", "5", "--filter", "off",
               "--time-limit", "60", "--out", str(out)])
    assert rc == 0
    text = out.read_text()
    assert text.startswith(",".join(REPORT_COLUMNS))
    assert "exact" in text


def test_cli_exit_code_on_parse_failure(tmp_path, capsys):
    bad = tmp_path / "bad.vrp"
    bad.write_text("not a cvrp file\n")
    rc = main(["--instances", str(bad), "--time-limit", "60"])
    assert rc == 1
    err = capsys.readouterr().err
    assert "bad.vrp" in err


def test_cli_stdout_when_no_out(two_instances, capsys):
    _, paths = two_instances
    rc = main(["--instances", paths[0], "--runs", "1",
               "--filter", "off", "--time-limit", "60"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith(",".join(REPORT_COLUMNS))
