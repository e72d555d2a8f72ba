"""Benchmark driver: multi-start runs over instance files with reports.

One run = parse instance, Clarke-Wright start, decode per space, local
search to convergence or the time limit. Runs are independent and seeded
as seed_base + run_index, so reports are reproducible modulo the timing
columns. Rows stream to CSV or JSON lines, followed by per-(instance,
space, k) aggregates.
"""

import csv
import glob as _glob
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .instances import (build_distance_matrix, build_neighbor_lists,
                        parse_bks, parse_cvrplib_file)
from .memory import GlobalMemory
from .model import format_solution, gap_to_bks, solution_cost
from .savings import clarke_wright
from .search import (FilterState, SpaceConfig, decode_solution,
                     make_hash_params, parse_space, run_local_search)

WORKERS_ENV = "CVRPLS_WORKERS"

REPORT_COLUMNS = [
    "instance", "seed", "space", "k", "cost", "gap", "time",
    "sweeps", "accepted", "evaluations", "decoder_calls", "bs_passes",
    "hit_rate", "tunnel_hits", "fallback_decodes", "final_psi", "windows",
    "converged",
]

AGGREGATE_COLUMNS = [
    "instance", "space", "k", "runs", "mean_cost", "best_cost",
    "mean_gap", "mean_time",
]


@dataclass
class RunConfig:
    instances: list
    space: str = "classic"
    runs: int = 1
    seed: int = 0
    gamma: int = 20
    filter: str = "adaptive:0.90,0.95"
    tunneling: bool = False
    m_max: int = 10 ** 6
    time_limit: float = 600.0
    out: str | None = None
    format: str = "csv"
    bks: str | None = None
    emit_solutions: str | None = None

    def __post_init__(self):
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if self.time_limit <= 0:
            raise ValueError("time limit must be positive")
        if self.format not in ("csv", "jsonl"):
            raise ValueError(f"unknown report format {self.format!r}")


def _space_from_config(cfg):
    base = parse_space(cfg.space)
    return SpaceConfig(kind=base.kind, k=base.k, tunneling=cfg.tunneling,
                       max_exact=base.max_exact, fallback_k=base.fallback_k,
                       max_passes=base.max_passes)


def run_single(inst, dm, nl, space, cfg, seed, bks_value=None):
    """One seeded run; returns (report row dict, final Solution)."""
    hp = make_hash_params(inst.n)
    mem = GlobalMemory(m_max=cfg.m_max, tunneling=space.tunneling)
    rng = np.random.default_rng(seed)
    fs = FilterState.from_mode(cfg.filter)
    x0 = clarke_wright(inst, dm)
    x0 = decode_solution(x0, inst, dm, space, mem, hp)
    res = run_local_search(x0, inst, dm, nl, space, fs, mem, rng,
                           time_limit=cfg.time_limit, hp=hp)
    z_check = solution_cost(res.solution, dm)
    if z_check != res.z:
        raise AssertionError(
            f"reported cost {res.z} != recomputed {z_check} "
            f"({inst.name}, seed {seed})")
    st = res.stats
    row = {
        "instance": inst.name,
        "seed": seed,
        "space": space.label,
        "k": space.k if space.kind == "bs" else "",
        "cost": res.z,
        "gap": (round(gap_to_bks(res.z, bks_value), 4)
                if bks_value else ""),
        "time": round(res.wall_time, 3),
        "sweeps": res.sweeps,
        "accepted": st["accepted"],
        "evaluations": st["evaluations"],
        "decoder_calls": st["decoder_calls"],
        "bs_passes": st["bs_passes"],
        "hit_rate": round(st["hit_rate"], 4),
        "tunnel_hits": st["tunnel_hits"],
        "fallback_decodes": st["fallback_decodes"],
        "final_psi": ("inf" if st["final_psi"] == float("inf")
                      else round(st["final_psi"], 6)),
        "windows": st["windows"],
        "converged": int(res.converged),
    }
    return row, res.solution


def _run_cell(args):
    path, cfg, seed, bks_value = args
    inst = parse_cvrplib_file(path)
    dm = build_distance_matrix(inst)
    nl = build_neighbor_lists(dm, cfg.gamma)
    space = _space_from_config(cfg)
    row, sol = run_single(inst, dm, nl, space, cfg, seed, bks_value)
    sol_text = format_solution(sol) if cfg.emit_solutions else None
    return row, sol_text


def run_benchmark(cfg):
    """Execute all (instance, seed) cells; returns (rows, failures).

    Parse failures are isolated per instance and reported; rows stay
    ordered by (instance path, seed). Worker count comes from the
    CVRPLS_WORKERS environment variable (default 1).
    """
    paths = []
    for pattern in cfg.instances:
        hits = sorted(_glob.glob(pattern))
        paths.extend(hits if hits else [pattern])
    bks_table = parse_bks(cfg.bks) if cfg.bks else {}

    cells = []
    failures = []
    for path in paths:
        try:
            inst = parse_cvrplib_file(path)
        except Exception as exc:  # noqa: BLE001 - isolate per instance
            failures.append((path, str(exc)))
            continue
        bks_value = bks_table.get(inst.name)
        for r in range(cfg.runs):
            cells.append((path, cfg, cfg.seed + r, bks_value))

    workers = int(os.environ.get(WORKERS_ENV, "1") or "1")
    if workers > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, cells))
    else:
        results = [_run_cell(c) for c in cells]

    rows = []
    for (path, _, seed, _), (row, sol_text) in zip(cells, results):
        rows.append(row)
        if cfg.emit_solutions and sol_text is not None:
            os.makedirs(cfg.emit_solutions, exist_ok=True)
            name = f"{row['instance']}.{row['space'].replace(':', '')}.s{seed}.sol"
            with open(os.path.join(cfg.emit_solutions, name), "w",
                      encoding="utf-8") as fh:
                fh.write(sol_text + "\n")
    return rows, failures


def aggregate_rows(rows):
    """Per-(instance, space, k) mean/best cost, mean gap, mean time."""
    groups = {}
    for row in rows:
        groups.setdefault((row["instance"], row["space"], row["k"]),
                          []).append(row)
    out = []
    for (inst, space, k) in sorted(groups, key=lambda g: (g[0], g[1], str(g[2]))):
        rs = groups[(inst, space, k)]
        costs = [r["cost"] for r in rs]
        gaps = [r["gap"] for r in rs if r["gap"] != ""]
        out.append({
            "instance": inst,
            "space": space,
            "k": k,
            "runs": len(rs),
            "mean_cost": round(sum(costs) / len(costs), 2),
            "best_cost": min(costs),
            "mean_gap": round(sum(gaps) / len(gaps), 4) if gaps else "",
            "mean_time": round(sum(r["time"] for r in rs) / len(rs), 3),
        })
    return out


def emit_report(rows, fmt, out=None):
    """Render rows plus the aggregate block; returns the text, and writes
    it to `out` when given."""
    aggs = aggregate_rows(rows)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS)
        w.writeheader()
        w.writerows(rows)
        buf.write("\n")
        wa = csv.DictWriter(buf, fieldnames=AGGREGATE_COLUMNS)
        wa.writeheader()
        wa.writerows(aggs)
        text = buf.getvalue()
    else:
        lines = [json.dumps({"row": r}, sort_keys=True) for r in rows]
        lines += [json.dumps({"aggregate": a}, sort_keys=True) for a in aggs]
        text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return text
