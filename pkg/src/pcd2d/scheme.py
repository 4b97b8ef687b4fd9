"""Placement, delivery and decoding for partially cooperative D2D coded caching.

Users are numbered ``1..K`` and files ``1..N``. Placement depends only on
the number of selfish users ``S``; delivery by a transmitter reads only its
own cache and the demand vector; decoding needs the set of transmitters.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from . import mds
from .combinat import Subset, binom, subfile_index, subsets_excluding


class ProtocolError(RuntimeError):
    """Internal-consistency failure (a cache entry the construction guarantees is absent)."""


class DecodeFailure(RuntimeError):
    def __init__(self, user: int, message: str):
        super().__init__(f"user {user}: {message}")
        self.user = user


@dataclass(frozen=True)
class SchemeParams:
    K: int
    S: int
    N: int
    t: int

    @cached_property
    def F(self) -> int:
        return (self.K - self.S) * binom(self.K - 1, self.t) + self.S * _binom0(self.K - 2, self.t - 1)

    @property
    def Q(self) -> int:
        return self.F

    @cached_property
    def n_coded(self) -> int:
        return self.K * binom(self.K - 1, self.t)

    @cached_property
    def Q_z(self) -> int:
        return binom(self.K - 1, self.t) + (self.K - 1) * _binom0(self.K - 2, self.t - 1)

    @cached_property
    def Q_T_nonselfish(self) -> int:
        return (self.K - self.S - 1) * _binom0(self.K - 2, self.t)

    @cached_property
    def Q_T_selfish(self) -> int:
        return (self.K - self.S) * _binom0(self.K - 2, self.t)

    @property
    def per_sender(self) -> int:
        """Transmissions made by each non-selfish user."""
        return binom(self.K - 1, self.t + 1)

    @property
    def transmissions(self) -> int:
        return (self.K - self.S) * self.per_sender

    @property
    def M(self) -> Fraction:
        return Fraction(self.N * self.Q_z, self.F)

    @property
    def R(self) -> Fraction:
        return Fraction(self.transmissions, self.F)


def _binom0(n: int, i: int) -> int:
    # C(K-2, .) with K = 1 never arises after validation; keep binom's n >= 0 contract
    return binom(n, i) if n >= 0 else 0


def derive_params(K: int, S: int, N: int, t: int) -> SchemeParams:
    if K < 2:
        raise ValueError(f"K={K}: a D2D network needs at least 2 users")
    if N < K:
        raise ValueError(f"N={N} < K={K}: need at least as many files as users")
    if not 0 <= S <= K - 1:
        raise ValueError(f"S={S} outside [0..{K - 1}]; at least one user must transmit")
    if not 0 <= t <= K - 1:
        raise ValueError(f"t={t} outside [0..{K - 1}]")
    p = SchemeParams(K, S, N, t)
    assert p.Q_z + p.Q_T_nonselfish == p.Q
    assert p.Q_z + p.Q_T_selfish >= p.Q
    assert p.M == Fraction(N * (t + 1) * (K - 1), (K - S) * (K - 1) + t * S)
    return p


class CodedSubfileId(NamedTuple):
    n: int
    k: int
    T: Subset


@dataclass(frozen=True, eq=False)
class CacheContents:
    user: int
    entries: Mapping[CodedSubfileId, np.ndarray]

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True, eq=False)
class Transmission:
    sender: int
    targets: Subset
    payload: np.ndarray

    @property
    def key(self) -> tuple[int, Subset]:
        return (self.sender, self.targets)

    def __eq__(self, other):
        if not isinstance(other, Transmission):
            return NotImplemented
        return self.key == other.key and np.array_equal(self.payload, other.payload)


# ------------------------------------------------------------------ indexing

@lru_cache(maxsize=None)
def _position_table(K: int, t: int) -> Mapping[tuple[int, Subset], int]:
    table = {}
    for k in range(1, K + 1):
        for T in subsets_excluding(K, (k,), t):
            table[(k, T)] = subfile_index(K, t, k, T)
    return MappingProxyType(table)


def position(params: SchemeParams, k: int, T: Subset) -> int:
    return _position_table(params.K, params.t)[(k, T)]


@lru_cache(maxsize=None)
def cache_layout(K: int, t: int, k: int) -> tuple[tuple[int, Subset], ...]:
    """(owner, subset) pairs held by user ``k`` for every file."""
    own = [(k, T) for T in subsets_excluding(K, (k,), t)]
    others = [
        (l, T)
        for l in range(1, K + 1) if l != k
        for T in subsets_excluding(K, (l,), t) if k in T
    ]
    return tuple(own + others)


# ----------------------------------------------------------------- placement

def split_file(params: SchemeParams, data: np.ndarray) -> np.ndarray:
    data = np.asarray(data)
    if data.ndim != 1:
        raise ValueError("a file must be a 1-D symbol array")
    if data.size % params.F:
        raise ValueError(f"file size B={data.size} is not divisible by F={params.F}")
    return data.reshape(params.F, data.size // params.F)


def encode_library(params: SchemeParams, library, code: mds.MdsCode) -> list[np.ndarray]:
    """Per-file (n_coded, B/F) arrays of coded subfiles."""
    _check_code(params, code)
    library = list(library)
    if len(library) != params.N:
        raise ValueError(f"library has {len(library)} files, expected N={params.N}")
    return [mds.encode(code, split_file(params, w)) for w in library]


def place(params: SchemeParams, library, code: mds.MdsCode) -> list[CacheContents]:
    """Fill the K caches. Only the count of selfish users enters, via ``params``."""
    coded = encode_library(params, library, code)
    for Y in coded:
        Y.setflags(write=False)
    table = _position_table(params.K, params.t)
    caches = []
    for k in range(1, params.K + 1):
        entries = {}
        for owner, T in cache_layout(params.K, params.t, k):
            j = table[(owner, T)]
            for n in range(1, params.N + 1):
                entries[CodedSubfileId(n, owner, T)] = coded[n - 1][j - 1]
        caches.append(CacheContents(k, MappingProxyType(entries)))
    return caches


def _check_code(params: SchemeParams, code: mds.MdsCode):
    if (code.k_info, code.n_coded) != (params.F, params.n_coded):
        raise ValueError(
            f"code is [{code.n_coded},{code.k_info}] but parameters need [{params.n_coded},{params.F}]"
        )


def code_for(params: SchemeParams, field=None) -> mds.MdsCode:
    return mds.build_generator(params.F, params.n_coded, field)


# ------------------------------------------------------------------ delivery

def _check_demands(params: SchemeParams, d: Sequence[int]) -> tuple[int, ...]:
    d = tuple(int(x) for x in d)
    if len(d) != params.K:
        raise ValueError(f"demand vector has length {len(d)}, expected K={params.K}")
    for x in d:
        if not 1 <= x <= params.N:
            raise ValueError(f"demand {x} outside [1..{params.N}]")
    return d


def deliver(params: SchemeParams, cache_k: CacheContents, d: Sequence[int],
            omit: Iterable[tuple[int, Subset]] = ()) -> list[Transmission]:
    """Coded transmissions of user ``cache_k.user``, one per (t+1)-subset of the others.

    ``omit`` lists ``(sender, targets)`` keys to suppress (coordinated mode).
    """
    d = _check_demands(params, d)
    k = cache_k.user
    skip = set(omit)
    out = []
    for S in subsets_excluding(params.K, (k,), params.t + 1):
        if (k, S) in skip:
            continue
        acc = None
        for s in S:
            T = tuple(x for x in S if x != s)
            try:
                y = cache_k.entries[CodedSubfileId(d[s - 1], k, T)]
            except KeyError:
                raise ProtocolError(f"user {k} lacks Y^({k})_{{{d[s - 1]},{T}}}") from None
            acc = y.copy() if acc is None else np.bitwise_xor(acc, y, out=acc)
        acc.setflags(write=False)
        out.append(Transmission(k, S, acc))
    return out


def omitted_transmissions(params: SchemeParams, nonselfish: Iterable[int]) -> list[tuple[int, Subset]]:
    """Transmissions dropped by the coordinated load-reduction mode.

    For t >= 1: the first min((K-S)C(S,t+1), C(K-2,t)) transmissions (sender,
    then subset order) whose targets are all selfish. For t = 0: the
    transmission to every selfish user from the smallest transmitter.
    """
    K, t = params.K, params.t
    senders = sorted(nonselfish)
    selfish = set(range(1, K + 1)) - set(senders)
    if t == 0:
        if not senders:
            return []
        return [(senders[0], (s,)) for s in sorted(selfish)]
    budget = binom(K - 2, t)
    dropped = []
    for k in senders:
        for S in subsets_excluding(K, (k,), t + 1):
            if len(dropped) == budget:
                return dropped
            if selfish.issuperset(S):
                dropped.append((k, S))
    return dropped


def deliver_all(params: SchemeParams, caches: Sequence[CacheContents], nonselfish: Iterable[int],
                d: Sequence[int], mode: str = "default") -> list[Transmission]:
    """All transmissions, ordered by sender then target subset."""
    senders = _check_nonselfish(params, nonselfish)
    if mode == "default":
        omit = ()
    elif mode == "coordinated":
        omit = omitted_transmissions(params, senders)
    else:
        raise ValueError(f"unknown delivery mode {mode!r}")
    by_user = {c.user: c for c in caches}
    out = []
    for k in senders:
        out.extend(deliver(params, by_user[k], d, omit))
    return out


def _check_nonselfish(params: SchemeParams, nonselfish: Iterable[int]) -> list[int]:
    senders = sorted(set(nonselfish))
    if len(senders) != params.K - params.S:
        raise ValueError(f"need {params.K - params.S} non-selfish users, got {senders}")
    for k in senders:
        if not 1 <= k <= params.K:
            raise ValueError(f"user {k} outside [1..{params.K}]")
    return senders


# ------------------------------------------------------------------ decoding

def gather(params: SchemeParams, cache_k: CacheContents, transmissions: Iterable[Transmission],
           nonselfish: Iterable[int], d: Sequence[int]) -> dict[int, np.ndarray]:
    """Coded subfiles of the demanded file available to a user, keyed by global position."""
    d = _check_demands(params, d)
    k = cache_k.user
    want = d[k - 1]
    table = _position_table(params.K, params.t)
    pool = {table[(e.k, e.T)]: y for e, y in cache_k.entries.items() if e.n == want}
    index = {tr.key: tr for tr in transmissions}
    for kp in sorted(set(nonselfish)):
        if kp == k:
            continue
        for T in subsets_excluding(params.K, (k, kp), params.t):
            S = tuple(sorted(T + (k,)))
            tr = index.get((kp, S))
            if tr is None:
                continue
            y = tr.payload.copy()
            for s in S:
                if s == k:
                    continue
                side = tuple(x for x in S if x != s)
                try:
                    np.bitwise_xor(y, cache_k.entries[CodedSubfileId(d[s - 1], kp, side)], out=y)
                except KeyError:
                    raise ProtocolError(
                        f"user {k} cannot peel Y^({kp})_{{{d[s - 1]},{side}}} from its cache"
                    ) from None
            pool[table[(kp, T)]] = y
    return pool


def decode_user(params: SchemeParams, cache_k: CacheContents, transmissions: Iterable[Transmission],
                nonselfish: Iterable[int], d: Sequence[int], code: mds.MdsCode) -> np.ndarray:
    """Recover the file demanded by ``cache_k.user`` as a flat array of B symbols."""
    _check_code(params, code)
    pool = gather(params, cache_k, transmissions, nonselfish, d)
    if len(pool) < params.Q:
        raise DecodeFailure(
            cache_k.user, f"gathered {len(pool)} distinct coded subfiles, need Q={params.Q}"
        )
    try:
        info = mds.decode(code, pool)
    except mds.IntegrityError as e:
        raise DecodeFailure(cache_k.user, str(e)) from e
    return info.reshape(-1)


@dataclass
class RoundResult:
    decoded: dict[int, np.ndarray]
    transmissions: list[Transmission]
    observed_load: Fraction


def run_round(params: SchemeParams, library, nonselfish: Iterable[int], d: Sequence[int],
              code: mds.MdsCode | None = None, mode: str = "default",
              caches: Sequence[CacheContents] | None = None) -> RoundResult:
    """Place, deliver and decode one demand round; checks every user byte-for-byte.

    ``caches`` may be passed to reuse one placement across rounds.
    """
    d = _check_demands(params, d)
    senders = _check_nonselfish(params, nonselfish)
    if code is None:
        code = code_for(params)
    library = list(library)
    if caches is None:
        caches = place(params, library, code)
    txs = deliver_all(params, caches, senders, d, mode)
    decoded = {}
    for cache in caches:
        k = cache.user
        out = decode_user(params, cache, txs, senders, d, code)
        if not np.array_equal(out, np.asarray(library[d[k - 1] - 1])):
            raise DecodeFailure(k, f"decoded file differs from W_{d[k - 1]}")
        decoded[k] = out
    return RoundResult(decoded, txs, Fraction(len(txs), params.F))
