"""Bounded-displacement route reordering.

A pass over a route finds the cheapest reordering in which no visit moves
more than k positions from where it started (the depot stays pinned).
Iterating passes to a fixed point defines the decoder for the bs(k)
search space; k large enough makes a single pass an exact TSP solve.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels

# widest bitmask either DP regime may allocate (memory guard)
BS_MAX_BITS = 18


@dataclass(frozen=True)
class BsConfig:
    k: int
    max_passes: int = 1000

    def __post_init__(self):
        if self.k < 0:
            raise ValueError(f"k must be nonnegative, got {self.k}")
        if self.max_passes < 1:
            raise ValueError("max_passes must be positive")


def _route_cost(visits, dm):
    v = np.asarray(visits, dtype=np.int64)
    c = int(dm[0, v[0]]) + int(dm[v[-1], 0])
    if v.shape[0] > 1:
        c += int(dm[v[:-1], v[1:]].sum())
    return c


def bs_pass(visits, k, dm):
    """One reordering pass. Returns (cost, new_visits int32 array).

    k = 0 leaves the order unchanged; k >= len(visits)−1 makes the
    displacement bound vacuous, so the result is the exact optimum.
    """
    v = np.asarray(visits, dtype=np.int32)
    m = v.shape[0]
    if m == 0:
        raise ValueError("empty route")
    if k == 0 or m <= 1:
        return _route_cost(v, dm), v.copy()
    seq = np.empty(m + 1, np.int32)
    seq[0] = 0
    seq[1:] = v
    if m <= 2 * k:
        if m > BS_MAX_BITS:
            raise ValueError(
                f"route of {m} visits with k={k} exceeds the DP bit budget "
                f"({BS_MAX_BITS}); use the exact solver or a smaller k")
        cost, perm = kernels.bs_dp_full(seq, k, dm)
    else:
        if 2 * k > BS_MAX_BITS:
            raise ValueError(
                f"k={k} exceeds the sliding-window bit budget "
                f"({BS_MAX_BITS // 2}); use the exact solver instead")
        cost, perm = kernels.bs_dp_windowed(seq, k, dm)
    return int(cost), seq[perm[1:]]


def bs_fixed_point(visits, k, dm, max_passes=1000):
    """Iterate bs_pass while it strictly improves.

    Returns (cost, visits, n_passes) where n_passes counts every pass
    executed. A pass that matches the current cost (even with a different
    order) stops the iteration and the current order is kept. Integer
    costs make termination certain; hitting max_passes therefore raises.
    """
    cur = np.asarray(visits, dtype=np.int32)
    cost = _route_cost(cur, dm)
    if k == 0 or cur.shape[0] <= 1:
        return cost, cur.copy(), 0
    passes = 0
    while passes < max_passes:
        new_cost, new_v = bs_pass(cur, k, dm)
        passes += 1
        if new_cost >= cost:
            return cost, cur, passes
        cur, cost = new_v, new_cost
    raise RuntimeError(
        f"bs_fixed_point exceeded {max_passes} passes on a route of "
        f"{len(cur)} visits with k={k}; costs are integers and must "
        "strictly decrease, so this indicates a defect in the pass")


_PERM_CACHE = {}


def _feasible_perms(m, k):
    """All emission orders of m slots obeying the displacement rule, in
    lexicographic order, as an (n, m) int array. Cached per (m, k)."""
    key = (m, min(k, m - 1))  # the rule is vacuous for any k >= m-1
    if key not in _PERM_CACHE:
        perms = np.array(list(itertools.permutations(range(m))), dtype=np.int64)
        perms = perms.reshape(-1, m)
        inv = np.argsort(perms, axis=1)  # inv[:, s] = step at which slot s is emitted
        keep = np.ones(perms.shape[0], dtype=bool)
        for s in range(m):
            for t in range(s + 1, m):
                if t - s > k:
                    keep &= inv[:, s] < inv[:, t]
        _PERM_CACHE[key] = perms[keep]
    return _PERM_CACHE[key]


def bs_brute_oracle(visits, k, dm):
    """Reference implementation by exhaustive enumeration (routes <= 9).

    Independent of the DP: feasibility is the raw pairwise rule (a visit
    originally at position i must precede one at position j whenever
    j − i > k) applied to materialized permutations. Ties resolve to the
    lexicographically smallest emission order, like the DP.
    """
    v = np.asarray(visits, dtype=np.int64)
    m = v.shape[0]
    if m == 0:
        raise ValueError("empty route")
    if m > 9:
        raise ValueError(f"brute oracle limited to 9 visits, got {m}")
    if k == 0 or m == 1:
        return _route_cost(v, dm), v.astype(np.int32)
    perms = _feasible_perms(m, k)
    orders = v[perms]  # (n_perms, m) vertex sequences
    costs = dm[0, orders[:, 0]] + dm[orders[:, -1], 0]
    if m > 1:
        costs = costs + dm[orders[:, :-1], orders[:, 1:]].sum(axis=1)
    best = int(np.argmin(costs))  # first minimum = lexicographically smallest
    return int(costs[best]), orders[best].astype(np.int32)


def windowed_layer_sizes(n_positions, k):
    """Reachable DP states per layer for the sliding-window formulation."""
    if k < 1 or 2 * k > BS_MAX_BITS:
        raise ValueError(f"k must be in 1..{BS_MAX_BITS // 2}")
    return kernels.bs_layer_counts(n_positions, k)
