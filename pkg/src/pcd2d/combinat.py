"""Binomials and lexicographic subset indexing used by the placement map.

All ranks and indices are 1-based. Subsets are sorted tuples of user
indices drawn from ``1..K``.
"""

from __future__ import annotations

from itertools import combinations
from math import comb
from typing import Iterable, Iterator, Tuple

Subset = Tuple[int, ...]


def binom(n: int, i: int) -> int:
    """C(n, i), zero when ``i < 0`` or ``i > n``."""
    if n < 0:
        raise ValueError(f"binom: n must be non-negative, got {n}")
    if i < 0 or i > n:
        return 0
    return comb(n, i)


def _canonical(K: int, k: int, T: Iterable[int]) -> Subset:
    if not 1 <= k <= K:
        raise ValueError(f"user index {k} outside [1..{K}]")
    T = tuple(T)
    s = tuple(sorted(T))
    if len(set(s)) != len(s):
        raise ValueError(f"subset {T} has duplicate elements")
    for x in s:
        if not 1 <= x <= K:
            raise ValueError(f"subset element {x} outside [1..{K}]")
        if x == k:
            raise ValueError(f"subset {T} contains its own owner {k}")
    return s


def _ground(K: int, k: int) -> list[int]:
    return [x for x in range(1, K + 1) if x != k]


def rank_subset(K: int, k: int, T: Iterable[int]) -> int:
    """Lexicographic rank of ``T`` among the |T|-subsets of [1..K] minus ``k``."""
    s = _canonical(K, k, T)
    ground = _ground(K, k)
    m, t = len(ground), len(s)
    # position of each element inside the ground set (0-based)
    pos = [ground.index(x) for x in s]
    rank = 0
    prev = -1
    for i, p in enumerate(pos):
        for q in range(prev + 1, p):
            rank += binom(m - q - 1, t - i - 1)
        prev = p
    return rank + 1


def unrank_subset(K: int, k: int, t: int, rank: int) -> Subset:
    """Inverse of :func:`rank_subset`."""
    if not 1 <= k <= K:
        raise ValueError(f"user index {k} outside [1..{K}]")
    ground = _ground(K, k)
    m = len(ground)
    total = binom(m, t)
    if not 1 <= rank <= total:
        raise ValueError(f"rank {rank} outside [1..{total}] for t={t}, K={K}")
    r = rank - 1
    out = []
    q = 0
    for i in range(t):
        while True:
            block = binom(m - q - 1, t - i - 1)
            if r < block:
                break
            r -= block
            q += 1
        out.append(ground[q])
        q += 1
    return tuple(out)


def subsets_excluding(K: int, exclude: Iterable[int], size: int) -> Iterator[Subset]:
    """All ``size``-subsets of [1..K] minus ``exclude``, in lexicographic order."""
    ex = set(exclude)
    return combinations([x for x in range(1, K + 1) if x not in ex], size)


def subfile_index(K: int, t: int, k: int, T: Iterable[int]) -> int:
    """Global coded-subfile position ``(k-1)*C(K-1,t) + rank``."""
    T = tuple(T)
    if len(T) != t:
        raise ValueError(f"subset {T} has size {len(T)}, expected t={t}")
    return (k - 1) * binom(K - 1, t) + rank_subset(K, k, T)


def subfile_owner(K: int, t: int, j: int) -> Tuple[int, Subset]:
    """Inverse of :func:`subfile_index`: position ``j`` to ``(k, T)``."""
    block = binom(K - 1, t)
    if not 1 <= j <= K * block:
        raise ValueError(f"index {j} outside [1..{K * block}]")
    k, r = divmod(j - 1, block)
    return k + 1, unrank_subset(K, k + 1, t, r + 1)
