"""Command line entry point for the benchmark harness."""

import argparse
import sys

from .harness import RunConfig, emit_report, run_benchmark


def build_parser():
    p = argparse.ArgumentParser(
        prog="cvrpls",
        description="Capacitated VRP local search benchmark runner")
    p.add_argument("--instances", required=True, nargs="+",
                   metavar="GLOB", help="instance file paths or globs")
    p.add_argument("--space", default="classic",
                   help="search space: classic | bs:K | exact")
    p.add_argument("--runs", type=int, default=1,
                   help="independent runs per instance")
    p.add_argument("--seed", type=int, default=0, help="base random seed")
    p.add_argument("--gamma", type=int, default=20,
                   help="granular neighborhood size")
    p.add_argument("--filter", default="adaptive:0.90,0.95",
                   help="move filter: off | strict | adaptive[:LO,HI]")
    p.add_argument("--tunneling", choices=("on", "off"), default="off",
                   help="return best-known order per visit set")
    p.add_argument("--mmax", type=int, default=10 ** 6,
                   help="global memory entry cap")
    p.add_argument("--time-limit", type=float, default=600.0,
                   metavar="SECS", help="wall time per run")
    p.add_argument("--out", default=None, help="report file (default stdout)")
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--bks", default=None,
                   help="best-known-solution sidecar file for gaps")
    p.add_argument("--emit-solutions", default=None, metavar="DIR",
                   help="write final solutions here in CVRPLIB format")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    cfg = RunConfig(
        instances=args.instances,
        space=args.space,
        runs=args.runs,
        seed=args.seed,
        gamma=args.gamma,
        filter=args.filter,
        tunneling=args.tunneling == "on",
        m_max=args.mmax,
        time_limit=args.time_limit,
        out=args.out,
        format=args.format,
        bks=args.bks,
        emit_solutions=args.emit_solutions,
    )
    rows, failures = run_benchmark(cfg)
    text = emit_report(rows, cfg.format, cfg.out)
    if not cfg.out:
        sys.stdout.write(text)
    for path, err in failures:
        print(f"error: {path}: {err}", file=sys.stderr)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
