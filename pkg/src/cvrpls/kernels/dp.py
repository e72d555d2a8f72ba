"""Hot numeric kernels, written in a numba-compilable subset of Python.

The package-level __init__ compiles these with numba.njit unless the
CVRPLS_NO_NUMBA environment flag selects the plain interpreted versions.
Every function here is self-contained (no calls into the rest of the
package) so both compilation modes behave identically.

Conventions shared by the route kernels:
- a route sequence is an int32 array [0, v1, ..., vm] with the depot first;
- distances are an int64 (n+1)x(n+1) matrix;
- hash values are uint64 and rely on natural wraparound.
"""

import numpy as np

INF = np.int64(1) << np.int64(60)


def build_subseq_tables(seq, d, demands, pow1, pow2):
    """Quantities of every contiguous range seq[i..j], forward and reversed.

    Returns (Q, C, CR, H) where Q[i, j] is the load, C[i, j] the internal
    distance, CR[i, j] the internal distance of the reversed range, and
    H[i, j, :] holds (hp1, hp2, hs1, hs2, hp1_rev, hp2_rev). Only i <= j
    entries are meaningful.
    """
    L = seq.shape[0]
    Q = np.zeros((L, L), np.int64)
    C = np.zeros((L, L), np.int64)
    CR = np.zeros((L, L), np.int64)
    H = np.zeros((L, L, 6), np.uint64)
    r1 = pow1[1]
    r2 = pow2[1]
    for i in range(L):
        v = np.uint64(seq[i])
        Q[i, i] = demands[seq[i]]
        hp1 = r1 * v
        hp2 = r2 * v
        H[i, i, 0] = hp1
        H[i, i, 1] = hp2
        H[i, i, 2] = pow1[seq[i]]
        H[i, i, 3] = pow2[seq[i]]
        H[i, i, 4] = hp1
        H[i, i, 5] = hp2
        for j in range(i + 1, L):
            a = seq[j - 1]
            b = seq[j]
            w = np.uint64(b)
            Q[i, j] = Q[i, j - 1] + demands[b]
            C[i, j] = C[i, j - 1] + d[a, b]
            CR[i, j] = CR[i, j - 1] + d[b, a]
            # element b sits at relative position j-i+1 of the range
            H[i, j, 0] = H[i, j - 1, 0] + pow1[j - i + 1] * w
            H[i, j, 1] = H[i, j - 1, 1] + pow2[j - i + 1] * w
            H[i, j, 2] = H[i, j - 1, 2] + pow1[b]
            H[i, j, 3] = H[i, j - 1, 3] + pow2[b]
            # reversed range = [b] followed by reversed(i..j-1)
            H[i, j, 4] = r1 * w + r1 * H[i, j - 1, 4]
            H[i, j, 5] = r2 * w + r2 * H[i, j - 1, 5]
    return Q, C, CR, H


def held_karp(vs, d):
    """Exact depot-anchored tour over the customer array vs (subset DP).

    vs must arrive in canonical (ascending) order so tie-breaks are
    deterministic. Returns (cost, order) with order a reordering of vs.
    """
    m = vs.shape[0]
    out = np.empty(m, np.int32)
    if m == 1:
        out[0] = vs[0]
        return d[0, vs[0]] + d[vs[0], 0], out
    full = (1 << m) - 1
    dp = np.full((full + 1, m), INF, np.int64)
    par = np.full((full + 1, m), -1, np.int8)
    for j in range(m):
        dp[1 << j, j] = d[0, vs[j]]
    for mask in range(1, full + 1):
        for j in range(m):
            if (mask >> j) & 1 == 0:
                continue
            cur = dp[mask, j]
            if cur >= INF:
                continue
            vj = vs[j]
            for t in range(m):
                if (mask >> t) & 1:
                    continue
                nm = mask | (1 << t)
                cand = cur + d[vj, vs[t]]
                if cand < dp[nm, t]:
                    dp[nm, t] = cand
                    par[nm, t] = j
    best = INF
    bj = -1
    for j in range(m):
        cand = dp[full, j] + d[vs[j], 0]
        if cand < best:
            best = cand
            bj = j
    mask = full
    j = bj
    for pos in range(m - 1, -1, -1):
        out[pos] = vs[j]
        pj = int(par[mask, j])
        mask ^= 1 << j
        j = pj
    return best, out


def bs_dp_windowed(seq, k, d):
    """Minimum-cost reordering with displacement bound k, sliding-window DP.

    Positions are 1..N over seq (position 1 = depot, pinned). A layer-t
    state records, for the window of positions around t, which have been
    emitted (bitmask; positions <= t-k implicitly emitted, virtual
    positions <= 0 count as emitted) plus the offset of the position
    emitted at step t. Three sweeps: forward reachability, backward
    cost-to-go, then a greedy walk that realizes the lexicographically
    smallest optimal emission order.

    Returns (cost, perm) where perm[t] is the 0-based seq index emitted
    at step t+1; cost includes the closing arc to the depot.
    """
    N = seq.shape[0]
    W = 2 * k
    SW = 2 * k + 1
    space = (1 << W) * SW
    stamp = np.full(space, np.int64(-1), np.int64)
    slot = np.zeros(space, np.int64)

    cap = 1024
    st_mask = np.empty(cap, np.int64)
    st_last = np.empty(cap, np.int64)
    layer_off = np.zeros(N + 2, np.int64)

    # layer 1: depot emitted at position 1 (window offset k); lower bits virtual
    st_mask[0] = (1 << k) - 1
    st_last[0] = k
    total = 1
    layer_off[1] = 0
    layer_off[2] = 1

    for t in range(1, N):
        nxt = t + 1
        for s in range(layer_off[t], layer_off[t + 1]):
            mask = st_mask[s]
            for op in range(SW):
                p = nxt - k + op
                if p < 2 or p > N:
                    continue
                oo = op + 1  # offset of p in the layer-t window
                if oo <= W and (mask >> (oo - 1)) & 1:
                    continue  # already emitted
                if op > k:
                    need = (np.int64(1) << (op - k)) - 1
                    if (mask & need) != need:
                        continue  # precedence: an earlier position still open
                if op != 0 and (mask & 1) == 0:
                    continue  # window base would leave unemitted
                nm = mask >> 1
                if op >= 1:
                    nm |= np.int64(1) << (op - 1)
                sid = nm * SW + op
                if stamp[sid] != nxt:
                    stamp[sid] = nxt
                    if total >= cap:
                        cap2 = cap * 2
                        g1 = np.empty(cap2, np.int64)
                        g1[:cap] = st_mask
                        st_mask = g1
                        g2 = np.empty(cap2, np.int64)
                        g2[:cap] = st_last
                        st_last = g2
                        cap = cap2
                    st_mask[total] = nm
                    st_last[total] = op
                    slot[sid] = total
                    total += 1
        layer_off[nxt + 1] = total

    g = np.empty(total, np.int64)
    for s in range(layer_off[N], layer_off[N + 1]):
        lp = N - k + st_last[s]
        g[s] = d[seq[lp - 1], seq[0]]

    for t in range(N - 1, 0, -1):
        marker = N + t
        for s2 in range(layer_off[t + 1], layer_off[t + 2]):
            stamp[st_mask[s2] * SW + st_last[s2]] = marker
            slot[st_mask[s2] * SW + st_last[s2]] = s2
        for s in range(layer_off[t], layer_off[t + 1]):
            mask = st_mask[s]
            lp = t - k + st_last[s]
            vfrom = seq[lp - 1]
            best = INF
            for op in range(SW):
                p = t + 1 - k + op
                if p < 2 or p > N:
                    continue
                oo = op + 1
                if oo <= W and (mask >> (oo - 1)) & 1:
                    continue
                if op > k:
                    need = (np.int64(1) << (op - k)) - 1
                    if (mask & need) != need:
                        continue
                if op != 0 and (mask & 1) == 0:
                    continue
                nm = mask >> 1
                if op >= 1:
                    nm |= np.int64(1) << (op - 1)
                cand = d[vfrom, seq[p - 1]] + g[slot[nm * SW + op]]
                if cand < best:
                    best = cand
            g[s] = best

    perm = np.empty(N, np.int32)
    perm[0] = 0
    cur = 0
    for t in range(1, N):
        marker = 2 * N + t
        for s2 in range(layer_off[t + 1], layer_off[t + 2]):
            stamp[st_mask[s2] * SW + st_last[s2]] = marker
            slot[st_mask[s2] * SW + st_last[s2]] = s2
        mask = st_mask[cur]
        lp = t - k + st_last[cur]
        vfrom = seq[lp - 1]
        target = g[cur]
        for op in range(SW):
            p = t + 1 - k + op
            if p < 2 or p > N:
                continue
            oo = op + 1
            if oo <= W and (mask >> (oo - 1)) & 1:
                continue
            if op > k:
                need = (np.int64(1) << (op - k)) - 1
                if (mask & need) != need:
                    continue
            if op != 0 and (mask & 1) == 0:
                continue
            nm = mask >> 1
            if op >= 1:
                nm |= np.int64(1) << (op - 1)
            s2 = slot[nm * SW + op]
            if d[vfrom, seq[p - 1]] + g[s2] == target:
                perm[t] = p - 1
                cur = s2
                break
    return g[0], perm


def bs_dp_full(seq, k, d):
    """Same contract as bs_dp_windowed, static bitmask over all positions.

    Used when the whole sequence fits in the mask (short routes or large
    k); avoids the window-shift bookkeeping.
    """
    N = seq.shape[0]
    B = N - 1  # bits cover positions 2..N
    SW = N + 1
    space = (1 << B) * SW
    stamp = np.full(space, np.int64(-1), np.int64)
    slot = np.zeros(space, np.int64)

    cap = 1024
    st_mask = np.empty(cap, np.int64)
    st_last = np.empty(cap, np.int64)
    layer_off = np.zeros(N + 2, np.int64)

    st_mask[0] = 0
    st_last[0] = 1
    total = 1
    layer_off[1] = 0
    layer_off[2] = 1

    for t in range(1, N):
        nxt = t + 1
        for s in range(layer_off[t], layer_off[t + 1]):
            mask = st_mask[s]
            for p in range(2, N + 1):
                if (mask >> (p - 2)) & 1:
                    continue
                if p >= k + 3:
                    need = (np.int64(1) << (p - k - 2)) - 1
                    if (mask & need) != need:
                        continue
                nm = mask | (np.int64(1) << (p - 2))
                sid = nm * SW + p
                if stamp[sid] != nxt:
                    stamp[sid] = nxt
                    if total >= cap:
                        cap2 = cap * 2
                        g1 = np.empty(cap2, np.int64)
                        g1[:cap] = st_mask
                        st_mask = g1
                        g2 = np.empty(cap2, np.int64)
                        g2[:cap] = st_last
                        st_last = g2
                        cap = cap2
                    st_mask[total] = nm
                    st_last[total] = p
                    slot[sid] = total
                    total += 1
        layer_off[nxt + 1] = total

    g = np.empty(total, np.int64)
    for s in range(layer_off[N], layer_off[N + 1]):
        g[s] = d[seq[st_last[s] - 1], seq[0]]

    for t in range(N - 1, 0, -1):
        marker = N + t
        for s2 in range(layer_off[t + 1], layer_off[t + 2]):
            stamp[st_mask[s2] * SW + st_last[s2]] = marker
            slot[st_mask[s2] * SW + st_last[s2]] = s2
        for s in range(layer_off[t], layer_off[t + 1]):
            mask = st_mask[s]
            vfrom = seq[st_last[s] - 1]
            best = INF
            for p in range(2, N + 1):
                if (mask >> (p - 2)) & 1:
                    continue
                if p >= k + 3:
                    need = (np.int64(1) << (p - k - 2)) - 1
                    if (mask & need) != need:
                        continue
                nm = mask | (np.int64(1) << (p - 2))
                cand = d[vfrom, seq[p - 1]] + g[slot[nm * SW + p]]
                if cand < best:
                    best = cand
            g[s] = best

    perm = np.empty(N, np.int32)
    perm[0] = 0
    cur = 0
    for t in range(1, N):
        marker = 2 * N + t
        for s2 in range(layer_off[t + 1], layer_off[t + 2]):
            stamp[st_mask[s2] * SW + st_last[s2]] = marker
            slot[st_mask[s2] * SW + st_last[s2]] = s2
        mask = st_mask[cur]
        vfrom = seq[st_last[cur] - 1]
        target = g[cur]
        for p in range(2, N + 1):
            if (mask >> (p - 2)) & 1:
                continue
            if p >= k + 3:
                need = (np.int64(1) << (p - k - 2)) - 1
                if (mask & need) != need:
                    continue
            nm = mask | (np.int64(1) << (p - 2))
            s2 = slot[nm * SW + p]
            if d[vfrom, seq[p - 1]] + g[s2] == target:
                perm[t] = p - 1
                cur = s2
                break
    return g[0], perm


def bs_layer_counts(N, k):
    """Reachable state count per DP layer for the windowed formulation.

    Pure combinatorics (no distances); rolling layers so memory stays
    O(states per layer) even for very long sequences.
    """
    W = 2 * k
    SW = 2 * k + 1
    space = (1 << W) * SW
    stamp = np.full(space, np.int64(-1), np.int64)
    counts = np.zeros(N, np.int64)

    cap = 4096
    cm = np.empty(cap, np.int64)
    cl = np.empty(cap, np.int64)
    cm[0] = (1 << k) - 1
    cl[0] = k
    cn = 1
    counts[0] = 1
    for t in range(1, N):
        nxt = t + 1
        nm_arr = np.empty(cap, np.int64)
        nl_arr = np.empty(cap, np.int64)
        ncap = cap
        nn = 0
        for s in range(cn):
            mask = cm[s]
            for op in range(SW):
                p = nxt - k + op
                if p < 2 or p > N:
                    continue
                oo = op + 1
                if oo <= W and (mask >> (oo - 1)) & 1:
                    continue
                if op > k:
                    need = (np.int64(1) << (op - k)) - 1
                    if (mask & need) != need:
                        continue
                if op != 0 and (mask & 1) == 0:
                    continue
                nm = mask >> 1
                if op >= 1:
                    nm |= np.int64(1) << (op - 1)
                sid = nm * SW + op
                if stamp[sid] != nxt:
                    stamp[sid] = nxt
                    if nn >= ncap:
                        ncap2 = ncap * 2
                        t1 = np.empty(ncap2, np.int64)
                        t1[:ncap] = nm_arr
                        nm_arr = t1
                        t2 = np.empty(ncap2, np.int64)
                        t2[:ncap] = nl_arr
                        nl_arr = t2
                        ncap = ncap2
                    nm_arr[nn] = nm
                    nl_arr[nn] = op
                    nn += 1
        cm = nm_arr
        cl = nl_arr
        cap = ncap
        cn = nn
        counts[t] = nn
    return counts
