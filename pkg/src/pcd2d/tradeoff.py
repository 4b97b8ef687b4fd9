"""Exact memory-load trade-off: achievable corner points, memory-sharing hull,
cut-set lower bound (symmetric load) and the high-memory optimal regime.

Every quantity is a :class:`fractions.Fraction`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .combinat import binom


class InfeasibleMemoryError(ValueError):
    pass


@dataclass(frozen=True)
class TradeoffPoint:
    M: Fraction
    R: Fraction
    source: str


def _validate(K: int, S: int, N: int):
    if K < 2:
        raise ValueError(f"K={K}: need at least 2 users")
    if N < K:
        raise ValueError(f"N={N} < K={K}")
    if not 0 <= S <= K - 1:
        raise ValueError(f"S={S} outside [0..{K - 1}]")


def _validate_t(K: int, t: int):
    if not 0 <= t <= K - 1:
        raise ValueError(f"t={t} outside [0..{K - 1}]")


def subpacketization(K: int, S: int, t: int) -> int:
    return (K - S) * binom(K - 1, t) + S * (binom(K - 2, t - 1) if K >= 2 else 0)


def theorem1_point(K: int, S: int, N: int, t: int) -> TradeoffPoint:
    _validate(K, S, N)
    _validate_t(K, t)
    den = (K - S) * (K - 1) + t * S
    M = Fraction(N * (t + 1) * (K - 1), den)
    R = Fraction((K - S) * (K - 1), den) * Fraction(K - t - 1, t + 1)
    return TradeoffPoint(M, R, f"theorem1(t={t})")


def remark1_point(K: int, S: int, N: int, t: int) -> TradeoffPoint:
    """Corner point after dropping transmissions that only serve selfish users."""
    _validate(K, S, N)
    _validate_t(K, t)
    if t == 0:
        return TradeoffPoint(Fraction(N, K - S), K - Fraction(K, K - S), "remark1(t=0)")
    F = subpacketization(K, S, t)
    dropped = min((K - S) * binom(S, t + 1), binom(K - 2, t))
    R = Fraction((K - S) * binom(K - 1, t + 1) - dropped, F)
    return TradeoffPoint(theorem1_point(K, S, N, t).M, R, f"remark1(t={t})")


def feasibility_check(K: int, S: int, N: int, M) -> tuple[bool, str]:
    M = Fraction(M)
    lo = Fraction(N, K - S)
    if M < lo:
        return False, f"M={M} below N/(K-S)={lo}"
    if M > N:
        return False, f"M={M} above N={N}"
    return True, "feasible"


def lower_convex_hull(points: Iterable[tuple[Fraction, Fraction]]) -> list[tuple[Fraction, Fraction]]:
    pts = sorted(set(points))
    hull: list[tuple[Fraction, Fraction]] = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop hull[-1] if it lies on or above the chord hull[-2] -> p
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) <= 0:
                hull.pop()
            else:
                break
        if hull and hull[-1][0] == p[0]:
            continue  # same M, larger R after sorting
        hull.append(p)
    return hull


@dataclass(frozen=True)
class AchievableCurve:
    K: int
    S: int
    N: int
    points: tuple[TradeoffPoint, ...]
    hull: tuple[tuple[Fraction, Fraction], ...] = field(repr=False)

    @property
    def M_min(self) -> Fraction:
        return Fraction(self.N, self.K - self.S)

    def __call__(self, M) -> Fraction:
        return self.evaluate(M)

    def evaluate(self, M) -> Fraction:
        M = Fraction(M)
        ok, reason = feasibility_check(self.K, self.S, self.N, M)
        if not ok:
            raise InfeasibleMemoryError(reason)
        h = self.hull
        for (x1, y1), (x2, y2) in zip(h, h[1:]):
            if x1 <= M <= x2:
                return y1 + (y2 - y1) * (M - x1) / (x2 - x1)
        # single vertex hull (only when N/(K-S) == N, i.e. S = K-1 handled above)
        return h[0][1]


def achievable_curve(K: int, S: int, N: int, use_remark1: bool = False) -> AchievableCurve:
    _validate(K, S, N)
    point = remark1_point if use_remark1 else theorem1_point
    pts = tuple(point(K, S, N, t) for t in range(K))
    hull = lower_convex_hull((p.M, p.R) for p in pts)
    return AchievableCurve(K, S, N, pts, tuple(hull))


@dataclass(frozen=True)
class LowerBound:
    R: Fraction
    argmax_s: int


def _cut_term(K: int, S: int, N: int, M: Fraction, s: int, ell: int) -> Fraction:
    ceil_ns = -(-N // s)
    return (N - s * M) / (Fraction((K - S) - (s - ell), K - S) * ceil_ns)


def lower_bound_family(K: int, S: int, N: int, M) -> dict[tuple[int, int], Fraction]:
    """Every (s, selfish-count) cut-set term before optimising the selfish count."""
    M = Fraction(M)
    out = {}
    for s in range(1, K):
        for ell in range(max(0, s - (K - S) + 1), min(s, S) + 1):
            out[(s, ell)] = _cut_term(K, S, N, M, s, ell)
    return out


def lower_bound(K: int, S: int, N: int, M, cross_check: bool = False) -> LowerBound:
    """Cut-set lower bound on the optimal load (symmetric-load assumption).

    ``argmax_s`` is the smallest maximising ``s`` of the unclamped
    expression; the returned load is clamped at 0.
    """
    _validate(K, S, N)
    M = Fraction(M)
    ok, reason = feasibility_check(K, S, N, M)
    if not ok:
        raise InfeasibleMemoryError(reason)
    best, arg = None, None
    for s in range(1, K):
        v = (N - s * M) / (Fraction(max(K - S - s, 1), K - S) * (-(-N // s)))
        if best is None or v > best:
            best, arg = v, s
    if cross_check:
        fam = lower_bound_family(K, S, N, M)
        for s in range(1, K):
            closed = (N - s * M) / (Fraction(max(K - S - s, 1), K - S) * (-(-N // s)))
            # the selfish-count choice only matters where the term is positive
            best_ell = max(v for (ss, _), v in fam.items() if ss == s)
            assert max(closed, 0) == max(best_ell, 0), s
    return LowerBound(max(best, Fraction(0)), arg)


def optimal_threshold(K: int, S: int, N: int) -> Fraction:
    """Smallest memory from which the scheme meets the lower bound (needs S <= K-2)."""
    _validate(K, S, N)
    if S > K - 2:
        raise ValueError(f"optimal regime needs S <= K-2, got S={S}, K={K}")
    return N / (1 + Fraction(K - S - 1, (K - 1) ** 2))


def in_optimal_regime(K: int, S: int, N: int, M) -> bool:
    if S > K - 2:
        return False
    M = Fraction(M)
    return optimal_threshold(K, S, N) <= M <= N


def optimal_load_high_memory(K: int, S: int, N: int, M) -> Fraction:
    M = Fraction(M)
    thr = optimal_threshold(K, S, N)
    if not thr <= M <= N:
        raise InfeasibleMemoryError(
            f"M={M} outside the optimal regime [{thr}, {N}]; use achievable_curve and lower_bound"
        )
    return Fraction(K - S, K - S - 1) * (1 - M / N)


def memory_grid(K: int, S: int, N: int, points: int) -> list[Fraction]:
    """``points`` equally spaced rationals spanning [N/(K-S), N] inclusive."""
    lo, hi = Fraction(N, K - S), Fraction(N)
    if points < 1:
        raise ValueError("grid needs at least one point")
    if points == 1:
        return [lo]
    return [lo + (hi - lo) * i / (points - 1) for i in range(points)]
