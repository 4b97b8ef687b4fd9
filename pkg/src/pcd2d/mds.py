"""Systematic Vandermonde MDS erasure code over GF(2^8) / GF(2^16).

Payloads are 2-D arrays: one row per subfile, one column per symbol
position inside the subfile. Encoding and decoding act column-wise.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .gf import FieldSpec


class InsufficientSharesError(ValueError):
    def __init__(self, have: int, need: int):
        super().__init__(f"insufficient shares: have {have}, need {need} ({need - have} missing)")
        self.have = have
        self.need = need


class IntegrityError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class MdsCode:
    k_info: int
    n_coded: int
    field: FieldSpec
    generator: np.ndarray  # k_info x n_coded, int64, read-only

    def __repr__(self):
        return f"MdsCode([{self.n_coded},{self.k_info}] over GF({self.field.order}))"

    def _decoding_matrix(self, positions: tuple[int, ...]) -> np.ndarray:
        return _cached_inverse(self, positions)


def build_generator(k_info: int, n_coded: int, field: FieldSpec | None = None) -> MdsCode:
    """Deterministic systematic [n_coded, k_info] MDS generator.

    Rows of a Vandermonde matrix on the first ``n_coded`` canonical field
    elements, left-multiplied by the inverse of its first ``k_info``
    columns.
    """
    if not 1 <= k_info <= n_coded:
        raise ValueError(f"need 1 <= k_info <= n_coded, got k_info={k_info}, n_coded={n_coded}")
    if field is None:
        field = FieldSpec.for_length(n_coded)
    if n_coded > field.order:
        raise ValueError(
            f"field too small: n_coded={n_coded} needs order >= {n_coded}, got {field.order}"
        )
    return _build(k_info, n_coded, field.bits)


@lru_cache(maxsize=64)
def _build(k_info: int, n_coded: int, bits: int) -> MdsCode:
    field = FieldSpec(bits)
    exp, log = field.tables()
    pts = field.elements(n_coded)
    V = np.zeros((k_info, n_coded), dtype=np.int64)
    V[0, :] = 1
    for r in range(1, k_info):
        prev = V[r - 1]
        nz = (prev != 0) & (pts != 0)
        V[r, nz] = exp[log[prev[nz]] + log[pts[nz]]]
    A_inv = _kernels.inverse(V[:, :k_info], exp, log, field.order)
    G = _kernels.matmul(A_inv, V, exp, log)
    G.setflags(write=False)
    return MdsCode(k_info, n_coded, field, G)


def encode(code: MdsCode, info) -> np.ndarray:
    """Encode ``k_info`` equal-length subfiles into ``n_coded`` coded subfiles.

    ``info`` is a (k_info, L) array or a sequence of k_info length-L rows.
    Returns an (n_coded, L) array of the field dtype.
    """
    X = _as_matrix(info)
    if X.shape[0] != code.k_info:
        raise ValueError(f"expected {code.k_info} subfiles, got {X.shape[0]}")
    exp, log = code.field.tables()
    Y = _kernels.matmul(code.generator.T, X, exp, log)
    return Y.astype(code.field.dtype)


def decode(code: MdsCode, shares: Mapping[int, np.ndarray] | Iterable[tuple[int, np.ndarray]],
           verify: bool = False) -> np.ndarray:
    """Recover the (k_info, L) information block from ``{position: payload}``.

    Positions are 1-based. Uses the ``k_info`` smallest positions supplied;
    with ``verify=True`` every supplied share is re-checked against the
    re-encoded result.
    """
    items = dict(shares.items() if isinstance(shares, Mapping) else shares)
    if len(items) < code.k_info:
        raise InsufficientSharesError(len(items), code.k_info)
    for p in items:
        if not 1 <= p <= code.n_coded:
            raise ValueError(f"share position {p} outside [1..{code.n_coded}]")
    chosen = tuple(sorted(items)[: code.k_info])
    Y = _as_matrix([items[p] for p in chosen])
    D = code._decoding_matrix(chosen)
    exp, log = code.field.tables()
    X = _kernels.matmul(D, Y, exp, log).astype(code.field.dtype)
    if verify:
        full = encode(code, X)
        for p, payload in items.items():
            if not np.array_equal(full[p - 1], np.asarray(payload)):
                raise IntegrityError(f"share at position {p} is inconsistent with the decoded word")
    return X


def xor_payloads(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Field addition of two payloads (bytewise XOR in characteristic 2)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"payload length mismatch: {a.shape} vs {b.shape}")
    return np.bitwise_xor(a, b)


def _as_matrix(rows) -> np.ndarray:
    if isinstance(rows, np.ndarray):
        if rows.ndim != 2:
            raise ValueError("payload block must be 2-D (subfiles x symbols)")
        return rows
    rows = [np.asarray(r) for r in rows]
    lengths = {r.shape for r in rows}
    if len(lengths) > 1:
        raise ValueError(f"ragged subfile lengths: {sorted(s[0] for s in lengths)}")
    return np.stack(rows) if rows else np.zeros((0, 0), dtype=np.int64)


@lru_cache(maxsize=4096)
def _cached_inverse(code: MdsCode, positions: tuple[int, ...]) -> np.ndarray:
    exp, log = code.field.tables()
    sub = code.generator[:, [p - 1 for p in positions]]
    try:
        # information = Y_sel @ sub^-1, transposed to act on rows of Y_sel
        inv = _kernels.inverse(sub, exp, log, code.field.order)
    except _kernels.SingularMatrixError as e:
        raise IntegrityError(f"generator columns {positions} are not independent") from e
    return inv.T
