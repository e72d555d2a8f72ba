"""Routes, solutions, costs, feasibility checks, and the benchmark gap metric."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .instances import DistanceMatrix, ProblemInstance


@dataclass
class Route:
    visits: np.ndarray  # int32 customer ids, depot implicit at both ends
    load: int = 0
    cost: int = 0

    def copy(self) -> "Route":
        return Route(self.visits.copy(), self.load, self.cost)


@dataclass
class Solution:
    routes: list[Route]
    z: int = 0

    def copy(self) -> "Solution":
        return Solution([r.copy() for r in self.routes], self.z)


def route_cost(visits, dm: DistanceMatrix) -> int:
    """Depot -> visits -> depot distance, exact integer."""
    v = np.asarray(visits, dtype=np.int64)
    if len(v) == 0:
        return 0
    d = dm.d
    c = int(d[0, v[0]]) + int(d[v[-1], 0])
    if len(v) > 1:
        c += int(d[v[:-1], v[1:]].sum())
    return c


def route_load(visits, inst: ProblemInstance) -> int:
    v = np.asarray(visits, dtype=np.int64)
    return int(inst.demands[v].sum()) if len(v) else 0


def make_route(visits, inst: ProblemInstance, dm: DistanceMatrix) -> Route:
    v = np.asarray(visits, dtype=np.int32)
    return Route(v, route_load(v, inst), route_cost(v, dm))


def solution_cost(sol: Solution, dm: DistanceMatrix) -> int:
    """Total distance; refreshes each route's cached cost as a side effect."""
    z = 0
    for r in sol.routes:
        r.cost = route_cost(r.visits, dm)
        z += r.cost
    sol.z = z
    return z


@dataclass
class FeasibilityReport:
    feasible: bool
    violations: list[str] = field(default_factory=list)


def check_feasibility(sol: Solution, inst: ProblemInstance) -> FeasibilityReport:
    """Partition and capacity audit. Report style, never raises."""
    violations: list[str] = []
    seen = np.zeros(inst.n + 1, dtype=np.int64)
    for k, r in enumerate(sol.routes):
        if len(r.visits) == 0:
            violations.append(f"route {k} is empty")
            continue
        for v in r.visits:
            v = int(v)
            if v < 1 or v > inst.n:
                violations.append(f"route {k} visits unknown customer {v}")
            else:
                seen[v] += 1
        load = route_load(r.visits, inst)
        if load > inst.capacity:
            violations.append(f"route {k} load {load} exceeds capacity {inst.capacity}")
    missing = np.flatnonzero(seen[1:] == 0) + 1
    for v in missing:
        violations.append(f"customer {int(v)} not visited")
    dup = np.flatnonzero(seen[1:] > 1) + 1
    for v in dup:
        violations.append(f"customer {int(v)} visited {int(seen[v])} times")
    return FeasibilityReport(feasible=not violations, violations=violations)


def gap_to_bks(z: int, z_bks: int) -> float:
    """Percentage gap 100 * (z - z_bks) / z_bks; negative when beating the BKS."""
    if z_bks <= 0:
        raise ValueError("z_bks must be positive")
    return 100.0 * (z - z_bks) / z_bks


def format_solution(sol: Solution) -> str:
    lines = []
    for k, r in enumerate(sol.routes, start=1):
        lines.append(f"Route #{k}: " + " ".join(str(int(v)) for v in r.visits))
    lines.append(f"Cost {sol.z}")
    return "\n".join(lines) + "\n"


def parse_solution(text: str) -> tuple[list[list[int]], int | None]:
    """Read the canonical text form back: route visit lists plus declared cost."""
    routes: list[list[int]] = []
    cost: int | None = None
    for raw in text.splitlines():
        s = raw.strip()
        if not s:
            continue
        low = s.lower()
        if low.startswith("route"):
            _, _, rest = s.partition(":")
            routes.append([int(t) for t in rest.split()])
        elif low.startswith("cost"):
            cost = int(round(float(s.split()[1])))
    return routes, cost
