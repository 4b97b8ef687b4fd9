"""Binary extension fields GF(2^8) and GF(2^16) with log/antilog tables.

Primitive polynomials (bit-exact, generator alpha = x = 2):

* GF(2^8):  x^8 + x^4 + x^3 + x^2 + 1            -> 0x11D
* GF(2^16): x^16 + x^12 + x^3 + x + 1            -> 0x1100B

The canonical element enumeration used for evaluation points is
``0, 1, alpha, alpha^2, ..., alpha^(q-2)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

PRIMITIVE_POLY = {8: 0x11D, 16: 0x1100B}


@dataclass(frozen=True)
class FieldSpec:
    bits: int
    poly: int = field(init=False)

    def __post_init__(self):
        if self.bits not in PRIMITIVE_POLY:
            raise ValueError(f"unsupported field width {self.bits}; use 8 or 16")
        object.__setattr__(self, "poly", PRIMITIVE_POLY[self.bits])

    @property
    def order(self) -> int:
        return 1 << self.bits

    @property
    def dtype(self):
        return np.uint8 if self.bits == 8 else np.uint16

    @classmethod
    def from_order(cls, q: int) -> "FieldSpec":
        for bits in PRIMITIVE_POLY:
            if q == 1 << bits:
                return cls(bits)
        raise ValueError(f"unsupported field order {q}; use 256 or 65536")

    @classmethod
    def for_length(cls, n_coded: int) -> "FieldSpec":
        """Smallest supported field with at least ``n_coded`` evaluation points."""
        if n_coded <= 255:
            return cls(8)
        if n_coded <= 1 << 16:
            return cls(16)
        raise ValueError(f"field too small: n_coded={n_coded} needs order >= {n_coded}")

    def tables(self) -> tuple[np.ndarray, np.ndarray]:
        return _tables(self.bits)

    def elements(self, count: int) -> np.ndarray:
        """First ``count`` field elements in canonical order."""
        if count > self.order:
            raise ValueError(
                f"field too small: {count} distinct points need order >= {count}, have {self.order}"
            )
        exp, _ = self.tables()
        out = np.zeros(count, dtype=np.int64)
        if count > 1:
            out[1:] = exp[: count - 1]
        return out


@lru_cache(maxsize=None)
def _tables(bits: int) -> tuple[np.ndarray, np.ndarray]:
    """(exp, log) tables; ``exp`` has length 2*(q-1) so sums of logs need no modulo."""
    q = 1 << bits
    poly = PRIMITIVE_POLY[bits]
    exp = np.zeros(2 * (q - 1), dtype=np.int64)
    log = np.zeros(q, dtype=np.int64)
    x = 1
    for i in range(q - 1):
        exp[i] = x
        log[x] = i
        x <<= 1
        if x & q:
            x ^= poly
    if x != 1:
        raise AssertionError(f"polynomial {poly:#x} is not primitive")
    exp[q - 1:] = exp[: q - 1]
    exp.setflags(write=False)
    log.setflags(write=False)
    return exp, log


def gf_mul(fs: FieldSpec, a: int, b: int) -> int:
    if a == 0 or b == 0:
        return 0
    exp, log = fs.tables()
    return int(exp[log[a] + log[b]])


def gf_inv(fs: FieldSpec, a: int) -> int:
    if a == 0:
        raise ZeroDivisionError("inverse of zero in GF(2^w)")
    exp, log = fs.tables()
    return int(exp[(fs.order - 1 - log[a]) % (fs.order - 1)])


def gf_pow(fs: FieldSpec, a: int, e: int) -> int:
    if e == 0:
        return 1
    if a == 0:
        return 0
    exp, log = fs.tables()
    return int(exp[(int(log[a]) * e) % (fs.order - 1)])
