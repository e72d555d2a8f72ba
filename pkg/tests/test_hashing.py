"""Sequence metadata: O(1) concatenation algebra and the four hashes."""

import itertools

import numpy as np

from conftest import (M64, naive_route_cost, power_hash, random_instance,
                      set_hash)
from cvrpls.hashing import (SubseqTable, concat, eval_concatenation,
                            hash_direct, make_hash_params, meta_direct,
                            meta_singleton, preprocess)
from cvrpls.model import Solution, make_route


def test_hash_params_primes_and_tables():
    hp = make_hash_params(10)
    assert hp.rho1 == 11  # smallest prime above n
    assert hp.rho2 == 31
    assert make_hash_params(11).rho1 == 13
    assert make_hash_params(30).rho1 == 31
    assert len(hp.pow1) == 12  # exponents 0..n+1
    assert hp.pow1[0] == 1 and hp.pow1[1] == 11
    # wraparound mod 2^64, checked against modular exponentiation
    hp_big = make_hash_params(200)
    for e in (0, 1, 7, 100, 201):
        assert int(hp_big.pow1[e]) == pow(int(hp_big.rho1), e, 1 << 64)
        assert int(hp_big.pow2[e]) == pow(31, e, 1 << 64)


def test_frozen_singleton_and_pair_values():
    rng = np.random.default_rng(0)
    inst, dm = random_instance(rng, 40)
    hp = make_hash_params(40)
    a = meta_singleton(1, inst, hp)
    b = meta_singleton(2, inst, hp)
    # rho2 = 31: singleton hashes are rho*i and rho^i
    assert a.hp2 == 31 and a.hs2 == 31
    assert b.hp2 == 62 and b.hs2 == 31 ** 2
    ab = concat(a, b, dm, hp)
    # position hash of [1, 2] with rho=31: 31*1 + 31^2*2 = 1953
    assert ab.hp2 == 1953
    assert ab.hs2 == 31 + 31 ** 2
    assert ab.q == int(inst.demands[1] + inst.demands[2])
    assert ab.c == int(dm.d[1, 2])
    assert (ab.first, ab.last, ab.length) == (1, 2, 2)


def test_concat_matches_direct_formulas():
    rng = np.random.default_rng(1)
    inst, dm = random_instance(rng, 60)
    hp = make_hash_params(60)
    for _ in range(200):
        m = int(rng.integers(1, 20))
        visits = rng.choice(np.arange(1, 61), size=m, replace=False)
        parts = [meta_singleton(int(v), inst, hp) for v in visits]
        meta = eval_concatenation(parts, dm, hp)
        r1, r2 = int(hp.rho1), int(hp.rho2)
        assert meta.hp1 == power_hash(visits, r1)
        assert meta.hp2 == power_hash(visits, r2)
        assert meta.hs1 == set_hash(visits, r1)
        assert meta.hs2 == set_hash(visits, r2)
        assert meta.q == int(inst.demands[visits].sum())
        assert meta.c == naive_route_cost(visits, dm.d) - int(
            dm.d[0, visits[0]]) - int(dm.d[visits[-1], 0])
        assert hash_direct(visits, hp) == (meta.hp1, meta.hp2,
                                           meta.hs1, meta.hs2)


def test_concat_associativity_at_every_split():
    rng = np.random.default_rng(2)
    inst, dm = random_instance(rng, 50)
    hp = make_hash_params(50)
    for _ in range(30):
        m = int(rng.integers(2, 16))
        visits = [int(v) for v in
                  rng.choice(np.arange(1, 51), size=m, replace=False)]
        whole = meta_direct(visits, inst, dm, hp)
        for cut in range(1, m):
            left = meta_direct(visits[:cut], inst, dm, hp)
            right = meta_direct(visits[cut:], inst, dm, hp)
            assert concat(left, right, dm, hp) == whole


def test_set_hash_permutation_invariance():
    rng = np.random.default_rng(3)
    inst, dm = random_instance(rng, 12)
    hp = make_hash_params(12)
    visits = [3, 7, 9, 1, 11]
    ref = meta_direct(visits, inst, dm, hp)
    for p in itertools.permutations(visits):
        meta = meta_direct(list(p), inst, dm, hp)
        assert meta.hs1 == ref.hs1 and meta.hs2 == ref.hs2
        if list(p) != visits:
            # position hashes must separate different orders here
            assert (meta.hp1, meta.hp2) != (ref.hp1, ref.hp2)


def test_subseq_table_ranges_and_reversal():
    rng = np.random.default_rng(4)
    inst, dm = random_instance(rng, 25)
    hp = make_hash_params(25)
    visits = [int(v) for v in
              rng.choice(np.arange(1, 26), size=9, replace=False)]
    tbl = SubseqTable(visits, inst, dm, hp)
    seq = [0] + visits
    L = len(seq)
    assert len(tbl) == L
    for i in range(L):
        for j in range(i, L):
            sub = seq[i:j + 1]
            want = meta_direct(sub, inst, dm, hp)
            assert tbl.meta(i, j) == want
            wrev = meta_direct(sub[::-1], inst, dm, hp)
            got = tbl.meta_rev(i, j)
            assert got == wrev
            # set hashes ignore order by construction
            assert got.hs1 == want.hs1 and got.hs2 == want.hs2


def test_preprocess_builds_one_table_per_route():
    rng = np.random.default_rng(5)
    inst, dm = random_instance(rng, 10)
    hp = make_hash_params(10)
    sol = Solution(routes=[make_route([1, 2, 3], inst, dm),
                           make_route([4, 5], inst, dm),
                           make_route([6, 7, 8, 9, 10], inst, dm)], z=0)
    tables = preprocess(sol, inst, dm, hp)
    assert [len(t) for t in tables] == [4, 3, 6]
    m0 = tables[0].meta(0, 3)
    assert m0.q == int(inst.demands[[1, 2, 3]].sum())


def test_uint64_wraparound_is_exact():
    # large vertex ids and long sequences overflow 64 bits many times;
    # table values must equal modular arithmetic regardless
    rng = np.random.default_rng(6)
    inst, dm = random_instance(rng, 80)
    hp = make_hash_params(80)
    visits = [int(v) for v in rng.permutation(np.arange(1, 81))[:30]]
    meta = meta_direct(visits, inst, dm, hp)
    assert meta.hp1 == power_hash(visits, int(hp.rho1))
    assert 0 <= meta.hp1 <= M64
