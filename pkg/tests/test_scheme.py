import itertools
import random
from fractions import Fraction
from types import MappingProxyType

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pcd2d import scheme
from pcd2d.combinat import binom
from pcd2d.scheme import CacheContents, CodedSubfileId, derive_params

from conftest import make_library


def test_example_params():
    p = derive_params(6, 2, 6, 2)
    assert (p.F, p.n_coded, p.Q, p.Q_z, p.Q_T_nonselfish) == (48, 60, 48, 30, 18)
    assert p.Q_T_selfish == 24
    assert p.M == Fraction(15, 4) and p.R == Fraction(5, 6)


def test_small_params():
    p = derive_params(4, 2, 4, 1)
    assert (p.F, p.n_coded, p.Q_z) == (8, 12, 6)


@pytest.mark.parametrize("K,S", [(3, 0), (5, 2), (7, 6)])
def test_full_memory_params(K, S):
    p = derive_params(K, S, K + 1, K - 1)
    assert p.transmissions == 0 and p.M == K + 1 and p.R == 0


@pytest.mark.parametrize("args", [(1, 0, 1, 0), (4, 4, 4, 1), (4, -1, 4, 1), (4, 1, 3, 1), (4, 1, 4, 4),
                                  (4, 1, 4, -1)])
def test_invalid_params(args):
    with pytest.raises(ValueError):
        derive_params(*args)


@given(st.integers(2, 30).flatmap(lambda K: st.tuples(
    st.just(K), st.integers(0, K - 1), st.integers(0, K - 1))))
def test_counting_identities(args):
    K, S, t = args
    p = derive_params(K, S, K, t)
    assert p.Q_z + p.Q_T_nonselfish == p.Q
    if binom(K - 2, t) > 0:
        assert p.Q_z + p.Q_T_selfish > p.Q
    else:
        assert p.Q_z + p.Q_T_selfish == p.Q
    assert p.R == Fraction((K - S) * (K - 1), (K - S) * (K - 1) + t * S) * Fraction(K - t - 1, t + 1)


def test_example_cache_layout_user1():
    own = [(1, T) for T in itertools.combinations(range(2, 7), 2)]
    others = [
        (2, (1, 3)), (2, (1, 4)), (2, (1, 5)), (2, (1, 6)),
        (3, (1, 2)), (3, (1, 4)), (3, (1, 5)), (3, (1, 6)),
        (4, (1, 2)), (4, (1, 3)), (4, (1, 5)), (4, (1, 6)),
        (5, (1, 2)), (5, (1, 3)), (5, (1, 4)), (5, (1, 6)),
        (6, (1, 2)), (6, (1, 3)), (6, (1, 4)), (6, (1, 5)),
    ]
    assert list(scheme.cache_layout(6, 2, 1)) == own + others


def test_example_cache_sizes(example_setup):
    params, code, library, caches = example_setup
    for c in caches:
        assert len(c) == 180
        assert Fraction(len(c), params.F) == Fraction(15, 4)


def test_cached_payloads_are_the_coded_subfiles(example_setup):
    params, code, library, caches = example_setup
    coded = scheme.encode_library(params, library, code)
    for c in caches:
        for e, y in c.entries.items():
            assert np.array_equal(y, coded[e.n - 1][scheme.position(params, e.k, e.T) - 1])


@pytest.mark.parametrize("K,S,t", [(5, 1, 0), (5, 3, 0), (5, 2, 4), (4, 0, 3), (5, 2, 2)])
def test_placement_multiplicity_and_memory(K, S, t):
    p = derive_params(K, S, K, t)
    caches = scheme.place(p, make_library(p, 1), scheme.code_for(p))
    count = {}
    for c in caches:
        assert len(c) == p.N * p.Q_z
        for e in c.entries:
            count[e] = count.get(e, 0) + 1
    assert len(count) == p.N * p.n_coded
    assert set(count.values()) == {t + 1}
    assert Fraction(len(caches[0]), p.F) == p.M
    if t == 0:
        assert p.M == Fraction(K, K - S)
        assert all(e.k == c.user for c in caches for e in c.entries)
    if t == K - 1:
        assert p.M == K


def test_place_rejects_bad_inputs():
    p = derive_params(4, 1, 4, 1)
    code = scheme.code_for(p)
    with pytest.raises(ValueError, match="divisible"):
        scheme.place(p, np.zeros((4, p.F + 1), np.uint8), code)
    with pytest.raises(ValueError, match="code is"):
        scheme.place(p, make_library(p), scheme.code_for(derive_params(4, 2, 4, 1)))


def test_example_transmission(example_setup):
    params, code, library, caches = example_setup
    d = (1, 2, 3, 4, 5, 6)
    txs = scheme.deliver(params, caches[1], d)
    assert len(txs) == 10
    assert [tx.targets for tx in txs] == list(itertools.combinations([1, 3, 4, 5, 6], 3))
    tx = next(tx for tx in txs if tx.targets == (1, 3, 4))
    Y = scheme.encode_library(params, library, code)
    j = lambda k, T: scheme.position(params, k, T) - 1
    want = Y[0][j(2, (3, 4))] ^ Y[2][j(2, (1, 4))] ^ Y[3][j(2, (1, 3))]
    assert tx.sender == 2 and np.array_equal(tx.payload, want)


def test_full_memory_has_no_transmissions():
    p = derive_params(4, 1, 4, 3)
    caches = scheme.place(p, make_library(p), scheme.code_for(p))
    assert scheme.deliver(p, caches[0], (1, 2, 3, 4)) == []
    res = scheme.run_round(p, make_library(p), [1, 2, 3], (4, 4, 1, 2), caches=caches)
    assert res.observed_load == 0 and res.transmissions == []


def test_deliver_missing_entry_is_protocol_error(example_setup):
    params, code, library, caches = example_setup
    entries = dict(caches[1].entries)
    del entries[CodedSubfileId(3, 2, (1, 4))]
    broken = CacheContents(2, MappingProxyType(entries))
    with pytest.raises(scheme.ProtocolError):
        scheme.deliver(params, broken, (1, 2, 3, 4, 5, 6))


def test_example_gather_counts(example_setup):
    params, code, library, caches = example_setup
    d = (1, 2, 3, 4, 5, 6)
    senders = [1, 2, 3, 6]
    txs = scheme.deliver_all(params, caches, senders, d)
    assert len(txs) == 40
    pool = scheme.gather(params, caches[0], txs, senders, d)
    cached = {scheme.position(params, k, T) for k, T in scheme.cache_layout(6, 2, 1)}
    delivered = [j for j in pool if j not in cached]
    assert len(pool) == 48 and len(delivered) == 18
    for kp in (2, 3, 6):
        assert sum(1 for j in delivered if (j - 1) // 10 + 1 == kp) == binom(4, 2)
    # a selfish user collects Q_z + (K-S) C(K-2,t) distinct subfiles
    assert len(scheme.gather(params, caches[3], txs, senders, d)) == 30 + 4 * 6


def test_one_shot_extraction_is_exact(example_setup):
    params, code, library, caches = example_setup
    d = (6, 6, 1, 2, 2, 5)
    senders = [2, 3, 4, 5]
    txs = scheme.deliver_all(params, caches, senders, d)
    Y = scheme.encode_library(params, library, code)
    index = {tx.key: tx for tx in txs}
    for cache in caches:
        k = cache.user
        pool = scheme.gather(params, cache, txs, senders, d)
        for kp in senders:
            if kp == k:
                continue
            for T in itertools.combinations([x for x in range(1, 7) if x not in (k, kp)], 2):
                # exactly one transmission carries this subfile
                assert (kp, tuple(sorted(T + (k,)))) in index
                j = scheme.position(params, kp, T)
                assert np.array_equal(pool[j], Y[d[k - 1] - 1][j - 1])


def test_decode_fails_without_enough_transmitters(example_setup):
    params, code, library, caches = example_setup
    d = (1, 2, 3, 4, 5, 6)
    txs = [tx for tx in scheme.deliver_all(params, caches, [1, 2, 3, 6], d) if tx.sender != 6]
    with pytest.raises(scheme.DecodeFailure) as err:
        scheme.decode_user(params, caches[0], txs, [1, 2, 3, 6], d, code)
    assert err.value.user == 1 and "42" in str(err.value)


def test_example_round_load(example_setup):
    params, code, library, caches = example_setup
    res = scheme.run_round(params, library, [1, 2, 3, 6], (1, 2, 3, 4, 5, 6), code, caches=caches)
    assert res.observed_load == Fraction(5, 6)
    assert len(res.transmissions) == 40
    for k, out in res.decoded.items():
        assert np.array_equal(out, library[k - 1])


def test_exhaustive_4_1_4_1():
    p = derive_params(4, 1, 4, 1)
    lib = make_library(p, 2, seed=3)
    code = scheme.code_for(p)
    caches = scheme.place(p, lib, code)
    rounds = 0
    for senders in itertools.combinations(range(1, 5), 3):
        for d in itertools.product(range(1, 5), repeat=4):
            res = scheme.run_round(p, lib, senders, d, code, caches=caches)
            assert res.observed_load == Fraction(9, 10)
            rounds += 1
    assert rounds == 4 * 256


def test_delivery_independence(example_setup):
    params, code, library, caches = example_setup
    d = (2, 2, 5, 1, 6, 3)
    senders = [1, 3, 5, 6]
    joint = scheme.deliver_all(params, caches, senders, d)
    order = senders[:]
    random.Random(4).shuffle(order)
    isolated = {k: scheme.deliver(params, caches[k - 1], d) for k in order}
    assert joint == [tx for k in senders for tx in isolated[k]]


def test_coordinated_mode_loads():
    p = derive_params(6, 4, 6, 2)
    res = scheme.run_round(p, make_library(p), [2, 5], (1, 1, 2, 3, 4, 5), mode="coordinated")
    assert res.observed_load == Fraction(7, 18)
    p0 = derive_params(6, 2, 6, 0)
    res = scheme.run_round(p0, make_library(p0), [1, 2, 3, 6], (1, 2, 3, 4, 5, 6), mode="coordinated")
    assert res.observed_load == Fraction(9, 2)


def test_omitted_transmissions_only_serve_selfish_users():
    p = derive_params(6, 4, 6, 2)
    dropped = scheme.omitted_transmissions(p, [2, 5])
    assert len(dropped) == min(2 * binom(4, 3), binom(4, 2)) == 6
    assert all(set(S) <= {1, 3, 4, 6} for _, S in dropped)
    assert dropped[0] == (2, (1, 3, 4))


def test_unknown_mode_rejected(example_setup):
    params, code, library, caches = example_setup
    with pytest.raises(ValueError):
        scheme.deliver_all(params, caches, [1, 2, 3, 6], (1,) * 6, mode="greedy")


def test_bad_demands_and_senders(example_setup):
    params, code, library, caches = example_setup
    with pytest.raises(ValueError):
        scheme.deliver(params, caches[0], (1, 2, 3))
    with pytest.raises(ValueError):
        scheme.deliver(params, caches[0], (1, 2, 3, 4, 5, 7))
    with pytest.raises(ValueError):
        scheme.deliver_all(params, caches, [1, 2, 3], (1,) * 6)
