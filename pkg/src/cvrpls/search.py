"""Granular first-improvement local search over decoder-defined spaces.

Candidate moves anchor on vertex pairs (i, j) with j among i's nearest
neighbors. Each candidate passes through staged checks: structural
guards, an O(1) capacity check from the subsequence tables, an O(1)
pre-decoder cost check against the adaptive psi threshold, and only then
a (memoized) decode of the changed routes. A move is applied as soon as
its decoded cost strictly improves the solution; the sweep continues in
place and the search stops when a full sweep applies nothing.

The search space is set by the decoder: classic keeps candidate orders
as-is, bs(k) drives them to a fixed point of the bounded-displacement
pass, exact replaces each changed route by its optimal order.
"""

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bs import bs_fixed_point
from .hashing import SubseqTable, eval_concatenation, make_hash_params
from .memory import GlobalMemory, RouteKey
from .model import Route, Solution
from .tsp import RouteTooLarge, solve_exact

MOVE_KINDS = ("relocate1", "relocate2", "swap11", "swap21", "swap22",
              "twoopt", "twooptstar")


@dataclass(frozen=True)
class SpaceConfig:
    kind: str = "classic"  # classic | bs | exact
    k: int = 0
    tunneling: bool = False
    max_exact: int = 20
    fallback_k: int = 8
    max_passes: int = 1000

    def __post_init__(self):
        if self.kind not in ("classic", "bs", "exact"):
            raise ValueError(f"unknown space kind {self.kind!r}")
        if self.kind == "bs" and self.k < 0:
            raise ValueError("bs space needs k >= 0")

    @property
    def label(self):
        return f"bs:{self.k}" if self.kind == "bs" else self.kind


def parse_space(text):
    """Parse a space spec: 'classic', 'bs:K', or 'exact'."""
    t = text.strip().lower()
    if t == "classic":
        return SpaceConfig(kind="classic")
    if t == "exact":
        return SpaceConfig(kind="exact")
    if t.startswith("bs:"):
        try:
            k = int(t[3:])
        except ValueError:
            raise ValueError(f"bad space spec {text!r}: K must be an integer")
        return SpaceConfig(kind="bs", k=k)
    raise ValueError(f"bad space spec {text!r} (expected classic|bs:K|exact)")


@dataclass
class FilterState:
    """Move filter threshold psi with windowed adaptation.

    Every cost-stage evaluation is registered; after each window of 1000
    the filtered fraction xi steers psi: too few filtered -> shrink psi
    (filter more), too many -> grow it. Modes: 'off' (psi = inf, never
    adapts), 'strict' (psi = 0, never adapts), 'adaptive'.
    """
    mode: str = "adaptive"
    psi: float = 0.10
    alpha: float = 0.9
    xi_minus: float = 0.90
    xi_plus: float = 0.95
    window_size: int = 1000
    window: int = 0
    filtered_count: int = 0
    xi_trace: list = field(default_factory=list)
    psi_min: float = math.inf
    psi_max: float = 0.0

    def __post_init__(self):
        if self.mode not in ("off", "strict", "adaptive"):
            raise ValueError(f"unknown filter mode {self.mode!r}")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0.0 <= self.xi_minus < self.xi_plus <= 1.0:
            raise ValueError("need 0 <= xi_minus < xi_plus <= 1")
        if self.mode == "off":
            self.psi = math.inf
        elif self.mode == "strict":
            self.psi = 0.0
        if self.psi < 0:
            raise ValueError("psi must be nonnegative")

    @classmethod
    def from_mode(cls, text):
        """'off' | 'strict' | 'adaptive' | 'adaptive:LO,HI'."""
        t = text.strip().lower()
        if t in ("off", "strict", "adaptive"):
            return cls(mode=t)
        if t.startswith("adaptive:"):
            try:
                lo, hi = (float(x) for x in t[len("adaptive:"):].split(","))
            except ValueError:
                raise ValueError(f"bad filter spec {text!r}")
            return cls(mode="adaptive", xi_minus=lo, xi_plus=hi)
        raise ValueError(
            f"bad filter spec {text!r} (expected off|strict|adaptive[:LO,HI])")

    def passes(self, z_new, z):
        """Cost check: the classical move result may exceed z by at most
        a factor 1+psi."""
        if math.isinf(self.psi):
            return True
        return z_new <= (1.0 + self.psi) * z

    def register(self, filtered):
        self.window += 1
        if filtered:
            self.filtered_count += 1
        if self.window >= self.window_size:
            self.update_psi()

    def update_psi(self):
        xi = self.filtered_count / self.window_size
        self.xi_trace.append(xi)
        if self.mode == "adaptive":
            if xi <= self.xi_minus:
                self.psi *= self.alpha
            elif xi >= self.xi_plus:
                self.psi /= self.alpha
            self.psi_min = min(self.psi_min, self.psi)
            self.psi_max = max(self.psi_max, self.psi)
        self.window = 0
        self.filtered_count = 0


@dataclass
class RoutePlan:
    """One route as it would look after a move: concatenation parts
    (route_idx, lo, hi, reversed) in table coordinates, their fold, and
    derived scalars. n_visits == 0 marks the route for removal."""
    idx: int
    parts: list
    meta: object
    load: int
    classical_cost: int
    n_visits: int


@dataclass
class Evaluation:
    kind: str
    i: int
    j: int
    plans: list
    z_new_classical: int
    z_move: int
    new_routes: list  # (idx, visits int32 array, cost, load); drops excluded
    drops: list


@dataclass
class SearchResult:
    solution: Solution
    z: int
    converged: bool
    sweeps: int
    stats: dict
    wall_time: float


def enumerate_moves(sol, nl, rng):
    """All (kind, i, j) anchor triples, uniformly shuffled.

    Every move kind pairs each customer i with each granular neighbor
    j of i; structural applicability is checked at evaluation time.
    Returns an (N, 3) int array of (kind_index, i, j).
    """
    present = sorted(int(v) for r in sol.routes for v in r.visits)
    cols = nl.neighbors.shape[1]
    ivals = np.repeat(np.asarray(present, dtype=np.int64), cols)
    jvals = nl.neighbors[present].reshape(-1).astype(np.int64)
    ok = jvals >= 1
    pairs = np.stack([ivals[ok], jvals[ok]], axis=1)
    nk = len(MOVE_KINDS)
    rows = np.concatenate(
        [np.concatenate([np.full((pairs.shape[0], 1), kid, dtype=np.int64),
                         pairs], axis=1)
         for kid in range(nk)], axis=0)
    return rows[rng.permutation(rows.shape[0])]


class LocalSearch:
    """Mutable search state bound to one instance, space, and memory."""

    def __init__(self, sol, inst, dm, nl, space, fs, mem, rng, hp=None):
        self.inst = inst
        self.dm = dm
        self.d = dm.d
        self.nl = nl
        self.space = space
        self.fs = fs
        self.mem = mem
        self.rng = rng
        self.hp = hp if hp is not None else make_hash_params(inst.n)
        self.sol = sol.copy()
        self.tables = [SubseqTable(r.visits, inst, dm, self.hp)
                       for r in self.sol.routes]
        self.z = sum(r.cost for r in self.sol.routes)
        self.stats = {
            "candidates": 0, "evaluations": 0, "cap_filtered": 0,
            "cost_filtered": 0, "decoded": 0, "rejected": 0,
            "accepted": 0, "sweeps": 0, "fallback_decodes": 0,
        }
        self._reindex()
        self._decoder = self._make_decoder()

    # ---- bookkeeping ----

    def _reindex(self):
        n = self.inst.n
        self.route_of = np.full(n + 1, -1, dtype=np.int64)
        self.pos_of = np.full(n + 1, -1, dtype=np.int64)
        for r, route in enumerate(self.sol.routes):
            for p, v in enumerate(route.visits):
                self.route_of[v] = r
                self.pos_of[v] = p

    def _make_decoder(self):
        space = self.space
        if space.kind == "bs":
            def dec(visits):
                return bs_fixed_point(visits, space.k, self.d,
                                      space.max_passes)
            return dec
        if space.kind == "exact":
            def dec(visits):
                try:
                    c, order = solve_exact(visits, self.d, space.max_exact)
                    return c, order, 0
                except RouteTooLarge:
                    self.stats["fallback_decodes"] += 1
                    kfb = max(1, min(space.fallback_k, len(visits) - 1))
                    return bs_fixed_point(visits, kfb, self.d,
                                          space.max_passes)
            return dec
        return None  # classic: identity, no decoder

    # ---- move composition ----

    def _compose(self, kind, i, j):
        """Structural stage: the after-routes of move (kind, i, j) as
        concatenation parts, or None when the move does not apply."""
        ri = int(self.route_of[i])
        rj = int(self.route_of[j])
        pi = int(self.pos_of[i])
        pj = int(self.pos_of[j])
        ti, tj = pi + 1, pj + 1
        Li = len(self.tables[ri])
        Lj = len(self.tables[rj])
        same = ri == rj

        if kind == "relocate1":
            if same:
                if pj == pi - 1:
                    return None  # already right after j
                if pi < pj:
                    parts = [(ri, 0, ti - 1), (ri, ti + 1, tj),
                             (ri, ti, ti), (ri, tj + 1, Li - 1)]
                else:
                    parts = [(ri, 0, tj), (ri, ti, ti),
                             (ri, tj + 1, ti - 1), (ri, ti + 1, Li - 1)]
                return [(ri, parts)]
            donor = [(ri, 0, ti - 1), (ri, ti + 1, Li - 1)]
            target = [(rj, 0, tj), (ri, ti, ti), (rj, tj + 1, Lj - 1)]
            return [(ri, donor), (rj, target)]

        if kind == "relocate2":
            if pi + 1 >= Li - 1:
                return None  # i has no successor
            succ = int(self.sol.routes[ri].visits[pi + 1])
            if j == succ:
                return None
            if same:
                if pj == pi - 1:
                    return None
                if pi < pj:
                    parts = [(ri, 0, ti - 1), (ri, ti + 2, tj),
                             (ri, ti, ti + 1), (ri, tj + 1, Li - 1)]
                else:
                    parts = [(ri, 0, tj), (ri, ti, ti + 1),
                             (ri, tj + 1, ti - 1), (ri, ti + 2, Li - 1)]
                return [(ri, parts)]
            donor = [(ri, 0, ti - 1), (ri, ti + 2, Li - 1)]
            target = [(rj, 0, tj), (ri, ti, ti + 1), (rj, tj + 1, Lj - 1)]
            return [(ri, donor), (rj, target)]

        if kind == "swap11":
            if same:
                a, b = (ti, tj) if ti < tj else (tj, ti)
                parts = [(ri, 0, a - 1), (ri, b, b), (ri, a + 1, b - 1),
                         (ri, a, a), (ri, b + 1, Li - 1)]
                return [(ri, parts)]
            pi_parts = [(ri, 0, ti - 1), (rj, tj, tj), (ri, ti + 1, Li - 1)]
            pj_parts = [(rj, 0, tj - 1), (ri, ti, ti), (rj, tj + 1, Lj - 1)]
            return [(ri, pi_parts), (rj, pj_parts)]

        if kind == "swap21":
            if pi + 1 >= Li - 1:
                return None
            succ = int(self.sol.routes[ri].visits[pi + 1])
            if j == succ:
                return None
            if same:
                if tj > ti:  # j after the pair (tj >= ti+2 since j != succ)
                    parts = [(ri, 0, ti - 1), (ri, tj, tj),
                             (ri, ti + 2, tj - 1), (ri, ti, ti + 1),
                             (ri, tj + 1, Li - 1)]
                else:
                    parts = [(ri, 0, tj - 1), (ri, ti, ti + 1),
                             (ri, tj + 1, ti - 1), (ri, tj, tj),
                             (ri, ti + 2, Li - 1)]
                return [(ri, parts)]
            pi_parts = [(ri, 0, ti - 1), (rj, tj, tj), (ri, ti + 2, Li - 1)]
            pj_parts = [(rj, 0, tj - 1), (ri, ti, ti + 1),
                        (rj, tj + 1, Lj - 1)]
            return [(ri, pi_parts), (rj, pj_parts)]

        if kind == "swap22":
            if pi + 1 >= Li - 1 or pj + 1 >= Lj - 1:
                return None
            if same:
                if abs(pi - pj) < 2:
                    return None  # pairs overlap
                a, b = (ti, tj) if ti < tj else (tj, ti)
                parts = [(ri, 0, a - 1), (ri, b, b + 1),
                         (ri, a + 2, b - 1), (ri, a, a + 1),
                         (ri, b + 2, Li - 1)]
                return [(ri, parts)]
            pi_parts = [(ri, 0, ti - 1), (rj, tj, tj + 1),
                        (ri, ti + 2, Li - 1)]
            pj_parts = [(rj, 0, tj - 1), (ri, ti, ti + 1),
                        (rj, tj + 2, Lj - 1)]
            return [(ri, pi_parts), (rj, pj_parts)]

        if kind == "twoopt":
            if not same or pi == pj:
                return None
            a, b = (ti, tj) if ti < tj else (tj, ti)
            parts = [(ri, 0, a - 1), (-ri - 1, a, b), (ri, b + 1, Li - 1)]
            return [(ri, parts)]

        if kind == "twooptstar":
            if same:
                return None
            if ti == Li - 1 and tj == Lj - 1:
                return None  # both tails empty
            pi_parts = [(ri, 0, ti), (rj, tj + 1, Lj - 1)]
            pj_parts = [(rj, 0, tj), (ri, ti + 1, Li - 1)]
            return [(ri, pi_parts), (rj, pj_parts)]

        raise ValueError(f"unknown move kind {kind!r}")

    def _fold(self, parts):
        metas = []
        for (r, a, b) in ((p[0], p[1], p[2]) for p in parts):
            if a > b:
                continue
            if r < 0:  # reversed segment marker
                metas.append(self.tables[-r - 1].meta_rev(a, b))
            else:
                metas.append(self.tables[r].meta(a, b))
        return eval_concatenation(metas, self.dm, self.hp)

    def plan_move(self, kind, i, j):
        """Compose + fold: the full O(1) pre-decoder picture of a move.

        Returns a list of RoutePlan or None when structurally invalid.
        """
        composed = self._compose(kind, i, j)
        if composed is None:
            return None
        plans = []
        for idx, parts in composed:
            meta = self._fold(parts)
            ccost = meta.c + int(self.d[meta.last, 0])
            plans.append(RoutePlan(idx, parts, meta, meta.q, ccost,
                                   meta.length - 1))
        return plans

    def materialize(self, parts):
        chunks = []
        for (r, a, b) in ((p[0], p[1], p[2]) for p in parts):
            if a > b:
                continue
            rev = r < 0
            if rev:
                r = -r - 1
            visits = self.sol.routes[r].visits
            lo = max(a, 1)  # table row 0 is the depot, not a visit
            chunk = visits[lo - 1:b]
            chunks.append(chunk[::-1] if rev else chunk)
        if not chunks:
            return np.empty(0, dtype=np.int32)
        return np.concatenate(chunks).astype(np.int32)

    # ---- staged evaluation ----

    def evaluate(self, kind, i, j):
        """Run a candidate through guards, filters, and decoding.

        Returns an accepted Evaluation or None. Filter window accounting
        happens here; callers apply accepted moves via apply().
        """
        self.stats["candidates"] += 1
        if i == j or self.route_of[i] < 0 or self.route_of[j] < 0:
            return None
        plans = self.plan_move(kind, i, j)
        if plans is None:
            return None
        self.stats["evaluations"] += 1

        cap = self.inst.capacity
        for p in plans:
            if p.load > cap:
                self.stats["cap_filtered"] += 1
                return None

        old_cost = sum(self.sol.routes[p.idx].cost for p in plans)
        z_new_classical = self.z - old_cost + sum(
            p.classical_cost for p in plans)
        filtered = not self.fs.passes(z_new_classical, self.z)
        self.fs.register(filtered)
        if filtered:
            self.stats["cost_filtered"] += 1
            return None

        self.stats["decoded"] += 1
        new_routes = []
        drops = []
        z_move = self.z - old_cost
        for p in plans:
            if p.n_visits == 0:
                drops.append(p.idx)
                continue
            visits = self.materialize(p.parts)
            if self.space.kind == "classic":
                cost, order = p.classical_cost, visits
            else:
                key = RouteKey(p.meta.hp1, p.meta.hp2, p.meta.hs1,
                               p.meta.hs2, p.meta.length, p.classical_cost)
                cost, order = self.mem.decode_with_tunneling(
                    visits, key, p.load, self._decoder)
                order = np.asarray(order, dtype=np.int32)
            z_move += cost
            new_routes.append((p.idx, order, cost, p.load))

        if z_move >= self.z:
            self.stats["rejected"] += 1
            return None
        return Evaluation(kind, i, j, plans, z_new_classical, z_move,
                          new_routes, drops)

    def apply(self, ev):
        """Install an accepted move: replace routes, drop emptied ones,
        rebuild the touched tables, refresh the position index."""
        for idx, visits, cost, load in ev.new_routes:
            self.sol.routes[idx] = Route(visits=visits, load=load, cost=cost)
            self.tables[idx] = SubseqTable(visits, self.inst, self.dm,
                                           self.hp)
        for idx in sorted(ev.drops, reverse=True):
            del self.sol.routes[idx]
            del self.tables[idx]
        self.z = ev.z_move
        self.sol.z = self.z
        self.stats["accepted"] += 1
        self._reindex()

    def sweep(self, deadline=None):
        """One full shuffled enumeration with immediate acceptance.

        Returns (accepted_count, timed_out).
        """
        accepted = 0
        rows = enumerate_moves(self.sol, self.nl, self.rng)
        for r, row in enumerate(rows):
            if deadline is not None and r % 64 == 0:
                if time.monotonic() >= deadline:
                    return accepted, True
            ev = self.evaluate(MOVE_KINDS[int(row[0])], int(row[1]),
                               int(row[2]))
            if ev is not None:
                self.apply(ev)
                accepted += 1
        self.stats["sweeps"] += 1
        return accepted, False


def decode_solution(sol, inst, dm, space, mem, hp=None):
    """Decode every route of a solution per the space (identity for
    classic). Returns a new Solution whose routes are decoder outputs."""
    if space.kind == "classic":
        out = sol.copy()
        out.z = sum(r.cost for r in out.routes)
        return out
    if hp is None:
        hp = make_hash_params(inst.n)
    ls = LocalSearch(sol, inst, dm, _EmptyNeighbors(inst.n), space,
                     FilterState(mode="off"), mem,
                     np.random.default_rng(0), hp)
    routes = []
    for r, route in enumerate(ls.sol.routes):
        meta = ls.tables[r].meta(0, len(ls.tables[r]) - 1)
        ccost = meta.c + int(dm.d[meta.last, 0])
        key = RouteKey(meta.hp1, meta.hp2, meta.hs1, meta.hs2,
                       meta.length, ccost)
        cost, order = mem.decode_with_tunneling(
            route.visits, key, route.load, ls._decoder)
        routes.append(Route(visits=np.asarray(order, dtype=np.int32),
                            load=route.load, cost=cost))
    return Solution(routes=routes, z=sum(r.cost for r in routes))


class _EmptyNeighbors:
    """Placeholder neighbor lists for decode-only LocalSearch use."""

    def __init__(self, n):
        self.gamma = 0
        self.neighbors = np.full((n + 1, 1), -1, dtype=np.int32)


def run_local_search(x0, inst, dm, nl, space, fs, mem, rng,
                     time_limit=600.0, hp=None):
    """Drive sweeps until a full sweep accepts nothing or time runs out.

    x0 should already be decoded for the chosen space (see
    decode_solution); the trajectory is then monotone in z with every
    route a decoder fixed point.
    """
    t0 = time.monotonic()
    deadline = t0 + time_limit
    ls = LocalSearch(x0, inst, dm, nl, space, fs, mem, rng, hp)
    converged = False
    while True:
        accepted, timed_out = ls.sweep(deadline)
        if timed_out:
            break
        if accepted == 0:
            converged = True
            break
    stats = dict(ls.stats)
    stats.update(ls.mem.stats())
    stats["final_psi"] = ls.fs.psi
    stats["windows"] = len(ls.fs.xi_trace)
    return SearchResult(solution=ls.sol, z=ls.z, converged=converged,
                        sweeps=ls.stats["sweeps"], stats=stats,
                        wall_time=time.monotonic() - t0)


def find_improving_move(sol, inst, dm, nl, space, hp=None):
    """Exhaustive unfiltered scan; the convergence certificate.

    Evaluates every granular move in deterministic order with psi = inf
    and a fresh memory (tunneling off). Returns the first strictly
    improving (kind, i, j, z_move) or None.
    """
    space = SpaceConfig(kind=space.kind, k=space.k, tunneling=False,
                        max_exact=space.max_exact,
                        fallback_k=space.fallback_k,
                        max_passes=space.max_passes)
    ls = LocalSearch(sol, inst, dm, nl, space, FilterState(mode="off"),
                     GlobalMemory(tunneling=False),
                     np.random.default_rng(0), hp)
    present = sorted(int(v) for r in sol.routes for v in r.visits)
    for kind in MOVE_KINDS:
        for i in present:
            for j in nl.neighbors[i]:
                j = int(j)
                if j < 1:
                    continue
                ev = ls.evaluate(kind, i, j)
                if ev is not None:
                    return kind, i, int(j), ev.z_move
    return None
