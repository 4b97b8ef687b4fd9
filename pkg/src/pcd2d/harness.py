"""Deterministic libraries, simulation rounds, exhaustive verification and
CSV sweeps behind the ``pcd2d`` command line.

Library generator
-----------------
File symbols come from a Philox-4x64 counter stream (``numpy.random.Philox``)
keyed with the 64-bit seed. Raw 64-bit words (``random_raw``) are split
little-endian into 8 symbols (GF(2^8)) or 4 symbols (GF(2^16)); file ``n``
takes the ``n``-th block of ``B`` consecutive symbols. Each file is then
zero-padded to the next multiple of ``F``.
"""

from __future__ import annotations

import csv
import inspect
import io
import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from . import scheme, tradeoff
from .gf import FieldSpec

log = logging.getLogger(__name__)

DECIMAL_DIGITS = 12


class VerificationFailure(RuntimeError):
    def __init__(self, message: str, repro: dict):
        super().__init__(f"{message}; reproduce with {repro}")
        self.repro = repro


def fmt_decimal(x: Fraction, digits: int = DECIMAL_DIGITS) -> str:
    x = Fraction(x)
    with localcontext() as ctx:
        ctx.prec = digits
        d = Decimal(x.numerator) / Decimal(x.denominator)
    s = format(d, "f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def fmt_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


# ------------------------------------------------------------------- library

def resolve_field(params: scheme.SchemeParams, field_order: int | str | None) -> FieldSpec:
    if field_order in (None, "auto"):
        return FieldSpec.for_length(params.n_coded)
    fs = FieldSpec.from_order(int(field_order))
    if params.n_coded > fs.order:
        raise ValueError(
            f"field too small: n_coded={params.n_coded} needs order >= {params.n_coded}, got {fs.order}"
        )
    return fs


def padded_size(B: int, F: int) -> int:
    return -(-B // F) * F


def generate_library(N: int, B: int, seed: int, fs: FieldSpec, pad_to: int | None = None) -> np.ndarray:
    """``N`` pseudo-random files of ``B`` symbols, zero-padded to ``pad_to``."""
    if B < 1:
        raise ValueError(f"file size B must be positive, got {B}")
    per_word = 64 // fs.bits
    total = N * B
    words = np.random.Philox(key=seed & (2**64 - 1), counter=0).random_raw(-(-total // per_word))
    symbols = words.astype("<u8").view("<u1" if fs.bits == 8 else "<u2")[:total]
    lib = symbols.astype(fs.dtype).reshape(N, B)
    if pad_to is not None and pad_to > B:
        lib = np.concatenate([lib, np.zeros((N, pad_to - B), dtype=fs.dtype)], axis=1)
    return lib


# ----------------------------------------------------------------- simulate

@dataclass
class UserOutcome:
    user: int
    demand: int
    selfish: bool
    ok: bool
    error: str = ""


@dataclass
class SimulationReport:
    params: scheme.SchemeParams
    selfish: tuple[int, ...]
    demands: tuple[int, ...]
    mode: str
    transmissions: int
    observed_load: Fraction
    expected_load: Fraction
    outcomes: list[UserOutcome] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(o.ok for o in self.outcomes) and self.observed_load == self.expected_load


def expected_load(params: scheme.SchemeParams, mode: str) -> Fraction:
    if mode == "coordinated":
        return tradeoff.remark1_point(params.K, params.S, params.N, params.t).R
    return tradeoff.theorem1_point(params.K, params.S, params.N, params.t).R


def simulate_round(params: scheme.SchemeParams, library: np.ndarray, B: int, selfish: Sequence[int],
                   demands: Sequence[int], code, caches, mode: str = "default") -> SimulationReport:
    """One delivery round; every user's decode is compared with the first ``B`` library symbols."""
    selfish = tuple(sorted(selfish))
    senders = [k for k in range(1, params.K + 1) if k not in selfish]
    txs = scheme.deliver_all(params, caches, senders, demands, mode)
    rep = SimulationReport(params, selfish, tuple(demands), mode, len(txs),
                           Fraction(len(txs), params.F), expected_load(params, mode))
    for cache in caches:
        k = cache.user
        want = demands[k - 1]
        try:
            out = scheme.decode_user(params, cache, txs, senders, demands, code)
            ok = np.array_equal(out[:B], library[want - 1, :B])
            err = "" if ok else "decoded file differs from library"
        except (scheme.DecodeFailure, scheme.ProtocolError) as e:
            ok, err = False, str(e)
        rep.outcomes.append(UserOutcome(k, want, k in selfish, ok, err))
    return rep


SIMULATE_HEADER = [
    "K", "S", "N", "t", "selfish", "demands", "mode", "user", "demand", "selfish_user",
    "decoded", "transmissions", "load_rational", "load_decimal",
]


def simulate_rows(rep: SimulationReport) -> list[list[str]]:
    p = rep.params
    rows = []
    for o in rep.outcomes:
        rows.append([
            p.K, p.S, p.N, p.t, " ".join(map(str, rep.selfish)), " ".join(map(str, rep.demands)),
            rep.mode, o.user, o.demand, str(o.selfish).lower(), "ok" if o.ok else f"FAIL: {o.error}",
            rep.transmissions, fmt_rational(rep.observed_load), fmt_decimal(rep.observed_load),
        ])
    return rows


def demand_vectors(K: int, N: int, choice, seed: int) -> list[tuple[int, ...]]:
    """Explicit vector, ``exhaustive``, or ``random:COUNT`` (Philox stream keyed by ``seed``)."""
    if choice is None:
        return [tuple((k % N) + 1 for k in range(K))]
    if isinstance(choice, (list, tuple)):
        return [tuple(int(x) for x in choice)]
    choice = str(choice).strip()
    if choice == "exhaustive":
        return list(itertools.product(range(1, N + 1), repeat=K))
    if choice.startswith("random:"):
        count = int(choice.split(":", 1)[1])
        rng = np.random.Generator(np.random.Philox(key=seed & (2**64 - 1)))
        draws = rng.integers(1, N + 1, size=(count, K))
        return [tuple(int(x) for x in row) for row in draws]
    return [tuple(int(x) for x in choice.replace(",", " ").split())]


def selfish_sets(K: int, S: int, choice) -> list[tuple[int, ...]]:
    """Explicit list, ``all`` (every S-subset), or default: the last S users."""
    if choice is None:
        return [tuple(range(K - S + 1, K + 1))]
    if isinstance(choice, (list, tuple)):
        sets = [tuple(sorted(int(x) for x in choice))]
    elif str(choice).strip() == "all":
        return list(itertools.combinations(range(1, K + 1), S))
    else:
        sets = [tuple(sorted(int(x) for x in str(choice).replace(",", " ").split()))]
    for s in sets:
        if len(s) != S or len(set(s)) != S or any(not 1 <= x <= K for x in s):
            raise ValueError(f"selfish set {s} must be {S} distinct users from [1..{K}]")
    return sets


def simulate(K: int, S: int, N: int, t: int, B: int | None = None, seed: int = 0,
             field_order=None, selfish=None, demands=None, mode: str = "default") -> list[SimulationReport]:
    params = scheme.derive_params(K, S, N, t)
    fs = resolve_field(params, field_order)
    B = params.F if B is None else B
    Bp = padded_size(B, params.F)
    if Bp != B:
        log.info("padding files from B=%d to %d symbols (multiple of F=%d)", B, Bp, params.F)
    library = generate_library(N, B, seed, fs, pad_to=Bp)
    code = scheme.code_for(params, fs)
    caches = scheme.place(params, library, code)
    reports = []
    for sel in selfish_sets(K, S, selfish):
        for d in demand_vectors(K, N, demands, seed):
            reports.append(simulate_round(params, library, B, sel, d, code, caches, mode))
    return reports


# ------------------------------------------------------------------- verify

VERIFY_HEADER = ["K", "S", "t", "F", "n_coded", "selfish_sets", "demand_vectors", "rounds",
                 "load_rational", "status"]


def _verify_config(K: int, S: int, t: int, samples: int, seed: int, mode: str,
                   exhaustive_up_to: int = 4) -> list:
    params = scheme.derive_params(K, S, K, t)
    fs = FieldSpec.for_length(params.n_coded)
    library = generate_library(K, params.F, seed, fs)
    code = scheme.code_for(params, fs)
    reference = scheme.place(params, library, code)
    if K <= exhaustive_up_to:
        ds = list(itertools.product(range(1, K + 1), repeat=K))
    else:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, K, S, t])))
        ds = [tuple(int(x) for x in row) for row in rng.integers(1, K + 1, size=(samples, K))]
    want_load = expected_load(params, mode)
    sets = list(itertools.combinations(range(1, K + 1), S))
    rounds = 0
    for sel in sets:
        repro = dict(K=K, S=S, N=K, t=t, selfish=list(sel), seed=seed, mode=mode)
        # placement is rebuilt per selfish set and must match bit for bit
        caches = scheme.place(params, library, code)
        if not _same_placement(caches, reference):
            raise VerificationFailure("placement depends on the selfish set", repro)
        senders = [k for k in range(1, K + 1) if k not in sel]
        omit = scheme.omitted_transmissions(params, senders) if mode == "coordinated" else ()
        for d in ds:
            repro["demands"] = list(d)
            rep = simulate_round(params, library, params.F, sel, d, code, caches, mode)
            bad = [o for o in rep.outcomes if not o.ok]
            if bad:
                raise VerificationFailure(f"user {bad[0].user} failed: {bad[0].error}", repro)
            if rep.observed_load != want_load:
                raise VerificationFailure(
                    f"observed load {rep.observed_load} != formula {want_load}", repro)
            joint = scheme.deliver_all(params, caches, senders, d, mode)
            isolated = []
            for k in reversed(senders):
                isolated = scheme.deliver(params, caches[k - 1], d, omit) + isolated
            if joint != isolated:
                raise VerificationFailure("isolated and joint delivery disagree", repro)
            rounds += 1
    return [K, S, t, params.F, params.n_coded, len(sets), len(ds), rounds,
            fmt_rational(want_load), "pass"]


def _same_placement(a, b) -> bool:
    if len(a) != len(b):
        return False
    for ca, cb in zip(a, b):
        if ca.user != cb.user or ca.entries.keys() != cb.entries.keys():
            return False
        if not all(np.array_equal(ca.entries[e], cb.entries[e]) for e in ca.entries):
            return False
    return True


def placement_takes_no_identities() -> bool:
    """``place`` must not accept any selfish or transmitter identities."""
    names = set(inspect.signature(scheme.place).parameters)
    return names == {"params", "library", "code"}


def verify(max_K: int, samples: int = 1000, seed: int = 0, mode: str = "default",
           jobs: int = 1, exhaustive_up_to: int = 4) -> list[list]:
    """Decodability check for every K <= max_K.

    Demand vectors are exhaustive up to ``exhaustive_up_to`` users; larger K
    uses ``samples`` vectors from a Philox stream seeded with (seed, K, S, t).
    """
    if not 2 <= max_K <= 6:
        raise ValueError(f"max_K={max_K} must lie in [2..6]")
    if max_K > exhaustive_up_to and samples < 1000:
        raise ValueError(f"K >= 5 needs at least 1000 sampled demand vectors, got {samples}")
    if not placement_takes_no_identities():
        raise VerificationFailure("place() signature exposes user identities", {})
    configs = [(K, S, t) for K in range(2, max_K + 1) for S in range(K) for t in range(K)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futs = [ex.submit(_verify_config, K, S, t, samples, seed, mode, exhaustive_up_to)
                    for K, S, t in configs]
            rows = [f.result() for f in futs]
    else:
        rows = [_verify_config(K, S, t, samples, seed, mode, exhaustive_up_to) for K, S, t in configs]
    return sorted(rows, key=lambda r: (r[0], r[1], r[2]))


# -------------------------------------------------------------------- sweeps

TRADEOFF_HEADER = [
    "t", "M_rational", "M_decimal", "R_theorem1_rational", "R_theorem1_decimal",
    "R_remark1_rational", "R_remark1_decimal", "R_lowerbound_rational", "R_lowerbound_decimal",
    "argmax_s", "optimal_flag",
]


def tradeoff_rows(K: int, S: int, N: int, grid_points: int) -> list[list[str]]:
    """One row per corner point t, then ``grid_points`` hull samples (blank t)."""
    base = tradeoff.achievable_curve(K, S, N)
    rem = tradeoff.achievable_curve(K, S, N, use_remark1=True)
    rows = []

    def row(t, M, R1, R2):
        lb = tradeoff.lower_bound(K, S, N, M)
        flag = tradeoff.in_optimal_regime(K, S, N, M)
        return ["" if t is None else t, fmt_rational(M), fmt_decimal(M), fmt_rational(R1),
                fmt_decimal(R1), fmt_rational(R2), fmt_decimal(R2), fmt_rational(lb.R),
                fmt_decimal(lb.R), lb.argmax_s, str(flag).lower()]

    for t, (p1, p2) in enumerate(zip(base.points, rem.points)):
        rows.append(row(t, p1.M, p1.R, p2.R))
    for M in tradeoff.memory_grid(K, S, N, grid_points) if grid_points else []:
        rows.append(row(None, M, base(M), rem(M)))
    return rows


BOUND_HEADER = ["M_rational", "M_decimal", "R_lowerbound_rational", "R_lowerbound_decimal",
                "argmax_s", "optimal_flag", "threshold_M_rational", "threshold_M_decimal"]


def bound_rows(K: int, S: int, N: int, grid_points: int) -> list[list[str]]:
    thr = tradeoff.optimal_threshold(K, S, N) if S <= K - 2 else None
    thr_cells = ["", ""] if thr is None else [fmt_rational(thr), fmt_decimal(thr)]
    rows = []
    for M in tradeoff.memory_grid(K, S, N, grid_points):
        lb = tradeoff.lower_bound(K, S, N, M)
        rows.append([fmt_rational(M), fmt_decimal(M), fmt_rational(lb.R), fmt_decimal(lb.R),
                     lb.argmax_s, str(tradeoff.in_optimal_regime(K, S, N, M)).lower(), *thr_cells])
    return rows


def to_csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()
