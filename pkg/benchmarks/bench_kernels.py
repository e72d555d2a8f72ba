"""Time the compiled DP kernels against their interpreted twins.

Runs each kernel on a fixed workload with both backends and prints a
small table with the speedup. With CVRPLS_NO_NUMBA=1 (or numba missing)
only the interpreted path exists, so the script reports that and times
just the python column.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from cvrpls import kernels
from cvrpls.hashing import make_hash_params
from cvrpls.kernels import python_kernels


def _workloads(rng):
    n = 200
    d = rng.integers(1, 500, size=(n + 1, n + 1)).astype(np.int64)
    np.fill_diagonal(d, 0)
    demands = rng.integers(1, 10, size=n + 1).astype(np.int64)
    demands[0] = 0
    hp = make_hash_params(n)
    pow1, pow2 = hp.pow1, hp.pow2

    def seq(m):
        verts = rng.choice(np.arange(1, n + 1), size=m, replace=False)
        return np.concatenate([[0], verts]).astype(np.int32)

    return [
        ("build_subseq_tables (m=100)",
         "build_subseq_tables", (seq(100), d, demands, pow1, pow2)),
        ("held_karp (m=12)",
         "held_karp", (np.sort(seq(12)[1:]), d)),
        ("bs_dp_windowed (m=40, k=4)",
         "bs_dp_windowed", (seq(40), 4, d)),
        ("bs_dp_full (m=12, k=6)",
         "bs_dp_full", (seq(12), 6, d)),
    ]


def _time_call(fn, args, repeats):
    fn(*args)  # warmup; for numba this also covers compilation
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=20,
                    help="timed calls per kernel; best is reported")
    opts = ap.parse_args()

    rng = np.random.default_rng(1)
    have_numba = kernels.BACKEND == "numba"
    print(f"active backend: {kernels.BACKEND}")
    if have_numba:
        print(f"{'kernel':32} {'numba':>10} {'python':>10} {'speedup':>8}")
    else:
        print("numba path unavailable; timing the interpreted path only")
        print(f"{'kernel':32} {'python':>10}")

    for label, name, args in _workloads(rng):
        t_py = _time_call(python_kernels[name], args, opts.repeats)
        if not have_numba:
            print(f"{label:32} {t_py * 1e3:9.2f}ms")
            continue
        t_nb = _time_call(getattr(kernels, name), args, opts.repeats)
        print(f"{label:32} {t_nb * 1e3:9.2f}ms {t_py * 1e3:9.2f}ms "
              f"{t_py / t_nb:7.1f}x")


if __name__ == "__main__":
    main()
