"""Constant-time sequence evaluation: demand, distance, and hash folds.

Every contiguous subsequence of every route carries a small bundle of
quantities (load Q, internal distance C, permutation hashes Hp and set
hashes Hs under two bases) that compose under concatenation. Move
evaluation then never walks a route: it folds a handful of precomputed
parts.

Hashes live in fixed-width 64-bit arithmetic and simply wrap around; the
python-level functions here mask explicitly so results match the uint64
kernels bit for bit.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .instances import DistanceMatrix, ProblemInstance

M64 = (1 << 64) - 1


def _next_prime(x: int) -> int:
    """Smallest prime strictly greater than x."""
    c = x + 1
    while True:
        if c < 4:
            if c > 1:
                return c
            c += 1
            continue
        if c % 2 and all(c % f for f in range(3, int(c**0.5) + 1, 2)):
            return c
        c += 1


class HashParams(NamedTuple):
    rho1: int  # smallest prime above the customer count
    rho2: int  # fixed small base
    pow1: np.ndarray  # uint64, pow1[e] = rho1^e mod 2^64
    pow2: np.ndarray


def make_hash_params(n: int, rho2: int = 31) -> HashParams:
    """Hash bases for an instance with n customers.

    Exponents go up to n+1 so both position indices (up to route length)
    and vertex indices (up to n) are covered.
    """
    rho1 = _next_prime(n)
    size = n + 2
    pw1 = np.empty(size, dtype=np.uint64)
    pw2 = np.empty(size, dtype=np.uint64)
    a = b = 1
    for e in range(size):
        pw1[e] = a
        pw2[e] = b
        a = (a * rho1) & M64
        b = (b * rho2) & M64
    return HashParams(rho1, rho2, pw1, pw2)


class SeqMeta(NamedTuple):
    q: int
    c: int
    first: int
    last: int
    length: int
    hp1: int
    hp2: int
    hs1: int
    hs2: int


def meta_singleton(i: int, inst: ProblemInstance, hp: HashParams) -> SeqMeta:
    """Base case for a one-visit sequence [i]."""
    q = int(inst.demands[i])
    return SeqMeta(
        q=q, c=0, first=i, last=i, length=1,
        hp1=(hp.rho1 * i) & M64,
        hp2=(hp.rho2 * i) & M64,
        hs1=int(hp.pow1[i]),
        hs2=int(hp.pow2[i]),
    )


def concat(a: SeqMeta, b: SeqMeta, dm: DistanceMatrix, hp: HashParams) -> SeqMeta:
    """Compose the quantities of a followed by b in O(1)."""
    link = int(dm.d[a.last, b.first])
    sh1 = int(hp.pow1[a.length])
    sh2 = int(hp.pow2[a.length])
    return SeqMeta(
        q=a.q + b.q,
        c=a.c + link + b.c,
        first=a.first,
        last=b.last,
        length=a.length + b.length,
        hp1=(a.hp1 + sh1 * b.hp1) & M64,
        hp2=(a.hp2 + sh2 * b.hp2) & M64,
        hs1=(a.hs1 + b.hs1) & M64,
        hs2=(a.hs2 + b.hs2) & M64,
    )


def eval_concatenation(parts: list[SeqMeta], dm: DistanceMatrix, hp: HashParams) -> SeqMeta:
    """Left-fold of concat over a move's route parts."""
    if not parts:
        raise ValueError("parts must be non-empty")
    acc = parts[0]
    for p in parts[1:]:
        acc = concat(acc, p, dm, hp)
    return acc


def hash_direct(visits, hp: HashParams) -> tuple[int, int, int, int]:
    """Direct evaluation of the permutation and set hashes, positions from 1.

    Independent of the concatenation laws; used as the oracle against them.
    """
    hp1 = hp2 = hs1 = hs2 = 0
    r1, r2 = hp.rho1, hp.rho2
    p1 = r1
    p2 = r2
    for v in visits:
        v = int(v)
        hp1 = (hp1 + p1 * v) & M64
        hp2 = (hp2 + p2 * v) & M64
        hs1 = (hs1 + pow(r1, v, 1 << 64)) & M64
        hs2 = (hs2 + pow(r2, v, 1 << 64)) & M64
        p1 = (p1 * r1) & M64
        p2 = (p2 * r2) & M64
    return hp1, hp2, hs1, hs2


def meta_direct(visits, inst: ProblemInstance, dm: DistanceMatrix, hp: HashParams) -> SeqMeta:
    """Naive SeqMeta of a sequence by folding singletons left to right."""
    vs = [int(v) for v in visits]
    if not vs:
        raise ValueError("empty sequence")
    acc = meta_singleton(vs[0], inst, hp)
    for v in vs[1:]:
        acc = concat(acc, meta_singleton(v, inst, hp), dm, hp)
    return acc


class SubseqTable:
    """All contiguous subsequences of one route, depot-anchored prefix included.

    The stored sequence is [0, v1, ..., vm]; entry (i, j) covers positions
    i..j inclusive. Reversed-range variants are kept alongside because one
    move kind reverses a segment and the permutation hash of a reversed
    segment differs.
    """

    __slots__ = ("seq", "Q", "C", "CR", "H")

    def __init__(self, visits, inst: ProblemInstance, dm: DistanceMatrix, hp: HashParams):
        from .kernels import build_subseq_tables

        seq = np.empty(len(visits) + 1, dtype=np.int32)
        seq[0] = 0
        seq[1:] = visits
        self.seq = seq
        self.Q, self.C, self.CR, self.H = build_subseq_tables(
            seq, dm.d, inst.demands, hp.pow1, hp.pow2
        )

    def __len__(self) -> int:
        return len(self.seq)

    def meta(self, i: int, j: int) -> SeqMeta:
        H = self.H
        return SeqMeta(
            q=int(self.Q[i, j]), c=int(self.C[i, j]),
            first=int(self.seq[i]), last=int(self.seq[j]), length=j - i + 1,
            hp1=int(H[i, j, 0]), hp2=int(H[i, j, 1]),
            hs1=int(H[i, j, 2]), hs2=int(H[i, j, 3]),
        )

    def meta_rev(self, i: int, j: int) -> SeqMeta:
        """Meta of positions i..j traversed backwards (set hashes unchanged)."""
        H = self.H
        return SeqMeta(
            q=int(self.Q[i, j]), c=int(self.CR[i, j]),
            first=int(self.seq[j]), last=int(self.seq[i]), length=j - i + 1,
            hp1=int(H[i, j, 4]), hp2=int(H[i, j, 5]),
            hs1=int(H[i, j, 2]), hs2=int(H[i, j, 3]),
        )


def preprocess(sol, inst: ProblemInstance, dm: DistanceMatrix, hp: HashParams) -> list[SubseqTable]:
    """Tables for every route of a solution. After a move is applied only the
    touched routes need a rebuilt table."""
    return [SubseqTable(r.visits, inst, dm, hp) for r in sol.routes]
