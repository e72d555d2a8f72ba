"""Shared builders and reference oracles for the test suite.

The oracles here are deliberately independent of the package internals:
costs by direct summation, hashes by modular exponentiation, tours by
factorial enumeration. Tests compare package output against these.
"""

import itertools

import numpy as np
import pytest

from cvrpls.instances import (DistanceMatrix, ProblemInstance,
                              build_distance_matrix)

M64 = (1 << 64) - 1

# 3-customer asymmetric toy: unit demands, capacity 3. The single route
# [3,1,2] (cost 11) is the unique optimum over all route collections;
# from the two-route start [2],[1,3] every maximal strictly-improving
# Relocate1 path ends there in at most five moves; with k=1 the order
# [1,2,3] is a strict fixed point (cost 35), which makes the
# best-known-order bypass observable.
TOY_D = np.array([
    [0, 12, 14, 3],
    [1, 0, 4, 13],
    [1, 12, 0, 13],
    [6, 3, 12, 0],
], dtype=np.int64)
TOY_OPT_ORDER = (3, 1, 2)
TOY_OPT_COST = 11
TOY_TSP_COSTS = {
    (1, 2, 3): 35, (1, 3, 2): 38, (2, 1, 3): 45,
    (2, 3, 1): 31, (3, 1, 2): 11, (3, 2, 1): 28,
}


def explicit_instance(d, demands, capacity, name="explicit"):
    d = np.asarray(d, dtype=np.int64)
    return ProblemInstance(
        name=name, capacity=capacity,
        demands=np.asarray(demands, dtype=np.int64),
        coords=None, explicit=d, edge_weight_kind="explicit-matrix")


def toy_instance():
    return explicit_instance(TOY_D, [0, 1, 1, 1], 3, name="toy3")


@pytest.fixture
def toy():
    inst = toy_instance()
    return inst, build_distance_matrix(inst)


def random_matrix(rng, n, symmetric=False, lo=1, hi=60):
    d = rng.integers(lo, hi, size=(n + 1, n + 1)).astype(np.int64)
    if symmetric:
        d = np.minimum(d, d.T)
    np.fill_diagonal(d, 0)
    return d


def random_instance(rng, n, capacity=None, symmetric=False, hi=60):
    demands = np.concatenate([[0], rng.integers(1, 10, size=n)]).astype(np.int64)
    if capacity is None:
        capacity = int(demands.max()) * 4
    inst = explicit_instance(random_matrix(rng, n, symmetric, hi=hi),
                             demands, capacity, name=f"rand{n}")
    return inst, build_distance_matrix(inst)


def euclidean_instance(rng, n, capacity=30, side=200):
    coords = rng.integers(0, side, size=(n + 1, 2)).astype(np.float64)
    demands = np.concatenate([[0], rng.integers(1, 10, size=n)]).astype(np.int64)
    inst = ProblemInstance(
        name=f"euc{n}", capacity=capacity, demands=demands,
        coords=coords, explicit=None, edge_weight_kind="rounded-euclidean")
    return inst, build_distance_matrix(inst)


def naive_route_cost(visits, d):
    """Depot round trip cost by direct summation."""
    visits = [int(v) for v in visits]
    c = int(d[0][visits[0]]) + int(d[visits[-1]][0])
    for a, b in zip(visits, visits[1:]):
        c += int(d[a][b])
    return c


def brute_tsp(visits, d):
    """Factorial-enumeration optimum; first minimum in lexicographic
    order of the tried permutations."""
    best = None
    border = None
    for p in itertools.permutations(sorted(int(v) for v in visits)):
        c = naive_route_cost(p, d)
        if best is None or c < best:
            best, border = c, p
    return best, border


def power_hash(visits, rho):
    """Position-weighted hash by modular exponentiation (no tables)."""
    h = 0
    for pos, v in enumerate(visits, start=1):
        h = (h + pow(rho, pos, 1 << 64) * int(v)) & M64
    return h


def set_hash(visits, rho):
    h = 0
    for v in visits:
        h = (h + pow(rho, int(v), 1 << 64)) & M64
    return h


def random_solution(rng, inst, dm):
    """Feasible random partition: shuffled customers, greedy route cuts."""
    from cvrpls.model import Solution, make_route
    order = rng.permutation(np.arange(1, inst.n + 1))
    routes = []
    cur = []
    load = 0
    for v in order:
        q = int(inst.demands[v])
        if cur and load + q > inst.capacity:
            routes.append(cur)
            cur, load = [], 0
        cur.append(int(v))
        load += q
    if cur:
        routes.append(cur)
    rs = [make_route(r, inst, dm) for r in routes]
    return Solution(routes=rs, z=sum(r.cost for r in rs))
