"""Clarke-Wright parallel savings construction.

Starts from one round trip per customer and merges route ends while the
saving s_ij = d[i][0] + d[0][j] - d[i][j] is nonnegative and the merge
keeps the combined load within capacity. A merge joins the route ending
at i to the route starting at j (directed, so asymmetric matrices work).

A single pass over the pairs sorted by (-saving, i, j) is equivalent to
repeatedly extracting the maximum feasible pair: merging never makes an
infeasible pair feasible again (tail/head status and load headroom only
ever shrink), so when the scan reaches a pair, every better pair has
already been applied or become permanently infeasible.
"""

import numpy as np

from .model import Route, Solution, make_route


def clarke_wright(inst, dm):
    """Deterministic savings construction; returns a feasible Solution."""
    n = inst.n
    d = dm.d
    q = inst.demands
    cap = inst.capacity
    if n == 0:
        return Solution(routes=[], z=0)

    # route bookkeeping: members[r] is a list, alive via route_of
    route_of = np.arange(n + 1)
    members = {r: [r] for r in range(1, n + 1)}
    loads = {r: int(q[r]) for r in range(1, n + 1)}
    is_head = np.ones(n + 1, dtype=bool)
    is_tail = np.ones(n + 1, dtype=bool)

    idx = np.arange(1, n + 1)
    ii, jj = np.meshgrid(idx, idx, indexing="ij")
    ii, jj = ii.ravel(), jj.ravel()
    keep = ii != jj
    ii, jj = ii[keep], jj[keep]
    s = d[ii, 0] + d[0, jj] - d[ii, jj]
    pos = s >= 0
    ii, jj, s = ii[pos], jj[pos], s[pos]
    order = np.lexsort((jj, ii, -s))

    for t in order:
        i, j = int(ii[t]), int(jj[t])
        ri, rj = int(route_of[i]), int(route_of[j])
        if ri == rj:
            continue
        if not (is_tail[i] and is_head[j]):
            continue
        if loads[ri] + loads[rj] > cap:
            continue
        # append rj onto ri: i stops being a tail, j stops being a head
        mi, mj = members[ri], members[rj]
        is_tail[i] = False
        is_head[j] = False
        mi.extend(mj)
        loads[ri] += loads[rj]
        for c in mj:
            route_of[c] = ri
        del members[rj], loads[rj]

    routes = [make_route(members[r], inst, dm) for r in sorted(members)]
    z = sum(r.cost for r in routes)
    return Solution(routes=routes, z=z)
