"""GF(2^w) linear-algebra kernels.

Each kernel has a numba ``@njit`` body and a vectorised numpy body. The
numpy path is used when numba is unavailable or ``PCD2D_DISABLE_NUMBA=1``
is set in the environment before import.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("PCD2D_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit

    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False


class SingularMatrixError(ArithmeticError):
    pass


# ---------------------------------------------------------------- numpy path

def _matmul_numpy(A, B, exp, log):
    m, k = A.shape
    L = B.shape[1]
    out = np.zeros((m, L), dtype=np.int64)
    A = A.astype(np.int64, copy=False)
    B = B.astype(np.int64, copy=False)
    for i in range(k):
        a = A[:, i]
        b = B[i, :]
        nz_a = np.nonzero(a)[0]
        nz_b = np.nonzero(b)[0]
        if nz_a.size == 0 or nz_b.size == 0:
            continue
        prod = exp[log[a[nz_a]][:, None] + log[b[nz_b]][None, :]]
        out[np.ix_(nz_a, nz_b)] ^= prod
    return out


def _inverse_numpy(A, exp, log, order):
    n = A.shape[0]
    M = np.concatenate([A.astype(np.int64), np.eye(n, dtype=np.int64)], axis=1)
    qm1 = order - 1
    for c in range(n):
        nz = np.nonzero(M[c:, c])[0]
        if nz.size == 0:
            return None
        p = c + nz[0]
        if p != c:
            M[[c, p]] = M[[p, c]]
        inv = exp[(qm1 - log[M[c, c]]) % qm1]
        row = M[c]
        mask = row != 0
        row[mask] = exp[log[row[mask]] + log[inv]]
        col = M[:, c].copy()
        col[c] = 0
        rows = np.nonzero(col)[0]
        if rows.size:
            r_nz = np.nonzero(row)[0]
            M[np.ix_(rows, r_nz)] ^= exp[log[col[rows]][:, None] + log[row[r_nz]][None, :]]
    return M[:, n:]


# ---------------------------------------------------------------- numba path

if HAS_NUMBA:

    @njit(cache=True, nogil=True)
    def _matmul_numba(A, B, exp, log):
        m, k = A.shape
        L = B.shape[1]
        out = np.zeros((m, L), dtype=np.int64)
        for i in range(m):
            for j in range(k):
                a = A[i, j]
                if a == 0:
                    continue
                la = log[a]
                for c in range(L):
                    b = B[j, c]
                    if b != 0:
                        out[i, c] ^= exp[la + log[b]]
        return out

    @njit(cache=True, nogil=True)
    def _inverse_numba_impl(A, exp, log, order):
        n = A.shape[0]
        M = np.zeros((n, 2 * n), dtype=np.int64)
        for i in range(n):
            for j in range(n):
                M[i, j] = A[i, j]
            M[i, n + i] = 1
        qm1 = order - 1
        for c in range(n):
            p = -1
            for r in range(c, n):
                if M[r, c] != 0:
                    p = r
                    break
            if p < 0:
                return M, False
            if p != c:
                for j in range(2 * n):
                    tmp = M[c, j]
                    M[c, j] = M[p, j]
                    M[p, j] = tmp
            linv = (qm1 - log[M[c, c]]) % qm1
            for j in range(2 * n):
                v = M[c, j]
                if v != 0:
                    M[c, j] = exp[log[v] + linv]
            for r in range(n):
                f = M[r, c]
                if r == c or f == 0:
                    continue
                lf = log[f]
                for j in range(2 * n):
                    v = M[c, j]
                    if v != 0:
                        M[r, j] ^= exp[lf + log[v]]
        return M, True

    def _inverse_numba(A, exp, log, order):
        M, ok = _inverse_numba_impl(np.ascontiguousarray(A, dtype=np.int64), exp, log, order)
        return M[:, A.shape[0]:] if ok else None


def matmul(A, B, exp, log, use_numba=None):
    """Product of ``A`` (m x k) and ``B`` (k x L) over GF(2^w); int64 result."""
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"shape mismatch {A.shape} @ {B.shape}")
    if use_numba is None:
        use_numba = HAS_NUMBA
    if use_numba:
        return _matmul_numba(
            np.ascontiguousarray(A, dtype=np.int64), np.ascontiguousarray(B, dtype=np.int64), exp, log
        )
    return _matmul_numpy(A, B, exp, log)


def inverse(A, exp, log, order, use_numba=None):
    """Inverse of a square matrix over GF(2^w); raises SingularMatrixError."""
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"inverse needs a square matrix, got {A.shape}")
    if use_numba is None:
        use_numba = HAS_NUMBA
    inv = (_inverse_numba if use_numba else _inverse_numpy)(A, exp, log, order)
    if inv is None:
        raise SingularMatrixError("matrix is singular over the field")
    return inv
