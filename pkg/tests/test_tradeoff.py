from fractions import Fraction as Fr

import pytest
from hypothesis import given, strategies as st

from pcd2d import scheme, tradeoff
from pcd2d.tradeoff import (
    InfeasibleMemoryError,
    achievable_curve,
    feasibility_check,
    lower_bound,
    memory_grid,
    optimal_load_high_memory,
    optimal_threshold,
    remark1_point,
    theorem1_point,
)

from conftest import make_library


def brute_lower_bound(K, S, N, M):
    """Max over every (s, ell) cut, no closed-form shortcut."""
    best = None
    for s in range(1, K):
        for ell in range(max(0, s - (K - S) + 1), min(s, S) + 1):
            users_u = (K - S) - (s - ell)
            ceil_ns = -(-N // s)
            v = (N - s * M) / (Fr(users_u, K - S) * ceil_ns)
            # a cut gives a valid bound only through its positive part
            best = v if best is None else max(best, v)
    return max(best, Fr(0)) if best is not None else Fr(0)


def test_theorem1_examples():
    p = theorem1_point(6, 2, 6, 2)
    assert (p.M, p.R) == (Fr(15, 4), Fr(5, 6))
    p = theorem1_point(7, 3, 9, 6)
    assert (p.M, p.R) == (9, 0)
    p = theorem1_point(7, 3, 9, 0)
    assert (p.M, p.R) == (Fr(9, 4), 6)


def test_remark1_examples():
    p = remark1_point(6, 2, 6, 0)
    assert (p.M, p.R) == (Fr(3, 2), Fr(9, 2))
    assert remark1_point(6, 4, 6, 2).R == Fr(7, 18)
    assert remark1_point(6, 2, 6, 2).R == Fr(5, 6)


@given(st.integers(2, 20).flatmap(lambda K: st.tuples(
    st.just(K), st.integers(0, K - 1), st.integers(0, K - 1))))
def test_remark1_dominates_and_matches_scheme(args):
    K, S, t = args
    a, b = theorem1_point(K, S, K, t), remark1_point(K, S, K, t)
    assert a.M == b.M and b.R <= a.R
    p = scheme.derive_params(K, S, K, t)
    assert (a.M, a.R) == (p.M, p.R)


@pytest.mark.parametrize("K,S,N", [(4, 1, 4), (4, 2, 5), (5, 3, 5), (5, 0, 5), (4, 3, 4)])
def test_formulas_match_simulated_loads(K, S, N):
    for t in range(K):
        p = scheme.derive_params(K, S, N, t)
        lib = make_library(p, 1)
        code = scheme.code_for(p)
        caches = scheme.place(p, lib, code)
        senders = list(range(S + 1, K + 1))
        d = tuple((3 * k) % N + 1 for k in range(K))
        for mode, point in (("default", theorem1_point), ("coordinated", remark1_point)):
            res = scheme.run_round(p, lib, senders, d, code, mode=mode, caches=caches)
            assert res.observed_load == point(K, S, N, t).R, (t, mode)


def test_feasibility():
    assert feasibility_check(6, 2, 6, Fr(3, 2)) == (True, "feasible")
    ok, why = feasibility_check(6, 2, 6, 1)
    assert not ok and "below N/(K-S)" in why
    ok, why = feasibility_check(6, 2, 6, 7)
    assert not ok and "above N" in why


def test_hull_example_segment():
    c = achievable_curve(6, 2, 6)
    assert c.hull[-2:] == ((Fr(75, 14), Fr(1, 7)), (Fr(6), Fr(0)))
    assert c(6) == 0
    assert c(Fr(75, 14)) == Fr(1, 7)
    mid = (Fr(75, 14) + 6) / 2
    assert c(mid) == Fr(1, 14)


@pytest.mark.parametrize("K,S,N", [(6, 2, 6), (10, 0, 10), (10, 8, 12), (25, 20, 25), (9, 4, 9)])
@pytest.mark.parametrize("remark", [False, True])
def test_hull_convex_nonincreasing_below_corners(K, S, N, remark):
    c = achievable_curve(K, S, N, use_remark1=remark)
    h = c.hull
    assert h[0][0] == Fr(N, K - S) and h[-1] == (N, 0)
    slopes = [(y2 - y1) / (x2 - x1) for (x1, y1), (x2, y2) in zip(h, h[1:])]
    assert all(s <= 0 for s in slopes)
    assert slopes == sorted(slopes)
    for p in c.points:
        assert c(p.M) <= p.R


def test_hull_rejects_infeasible_memory():
    c = achievable_curve(6, 2, 6)
    with pytest.raises(InfeasibleMemoryError):
        c(1)
    with pytest.raises(InfeasibleMemoryError):
        c(Fr(61, 10))


def test_lower_bound_examples():
    assert lower_bound(6, 2, 6, 6).R == 0
    lb = lower_bound(6, 2, 6, Fr(15, 4))
    assert (lb.R, lb.argmax_s) == (Fr(1, 2), 1)
    with pytest.raises(InfeasibleMemoryError):
        lower_bound(6, 2, 6, 1)


@pytest.mark.parametrize("K,S,N", [(5, 1, 5), (6, 2, 6), (7, 5, 9), (8, 0, 8), (10, 3, 13)])
def test_lower_bound_matches_bruteforce_and_argmax(K, S, N):
    for M in memory_grid(K, S, N, 41):
        lb = lower_bound(K, S, N, M, cross_check=True)
        assert lb.R == brute_lower_bound(K, S, N, M)
        terms = [(N - s * M) / (Fr(max(K - S - s, 1), K - S) * -(-N // s)) for s in range(1, K)]
        assert terms[lb.argmax_s - 1] == max(terms)
        assert terms.index(max(terms)) == lb.argmax_s - 1


def test_s1_term_closed_form():
    K, S, N = 9, 3, 11
    for M in memory_grid(K, S, N, 17):
        family = tradeoff.lower_bound_family(K, S, N, M)
        assert family[(1, 0)] == Fr(K - S, K - S - 1) * (1 - M / N)


def test_optimal_regime():
    assert optimal_threshold(6, 2, 6) == Fr(75, 14)
    assert optimal_load_high_memory(6, 2, 6, 6) == 0
    assert optimal_load_high_memory(6, 2, 6, Fr(75, 14)) == Fr(1, 7)
    assert theorem1_point(6, 2, 6, 4).M == Fr(75, 14)
    with pytest.raises(InfeasibleMemoryError):
        optimal_load_high_memory(6, 2, 6, 5)
    with pytest.raises(ValueError):
        optimal_threshold(6, 5, 6)


@pytest.mark.parametrize("K", range(2, 11))
def test_sandwich_and_optimality_small(K):
    for S in range(K - 1):
        N = K
        c = achievable_curve(K, S, N)
        thr = optimal_threshold(K, S, N)
        for M in memory_grid(K, S, N, 60) + [thr]:
            lb = lower_bound(K, S, N, M).R
            assert lb <= c(M)
            if M >= thr:
                assert c(M) == lb == optimal_load_high_memory(K, S, N, M)


def test_memory_grid_endpoints():
    g = memory_grid(6, 2, 6, 200)
    assert len(g) == 200 and g[0] == Fr(3, 2) and g[-1] == 6
    assert memory_grid(6, 2, 6, 1) == [Fr(3, 2)]
