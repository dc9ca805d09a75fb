"""Software IEEE-754 binary16.

Conversions are done on raw bit patterns with integer arithmetic so the
result does not depend on the host's float16 support. Rounding is
round-to-nearest-even, overflow goes to signed infinity, subnormals are
kept, and every NaN maps to the quiet pattern 0x7E00.

The array functions (``to_half_bits``, ``from_half_bits``, ``round_half``)
are what the matrix emulator uses; ``Half`` and the scalar helpers wrap
them for one-off values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from ._kernels import POS_INF_BITS, QNAN_BITS

NEG_INF_BITS = 0xFC00
MAX_FINITE = 65504.0


def to_half_bits(values) -> np.ndarray:
    """Round float32 values to binary16 and return the uint16 patterns."""
    f = np.asarray(values, dtype=np.float32)
    flat = np.ascontiguousarray(f.reshape(-1))
    out = np.empty(flat.size, dtype=np.uint16)
    _k.encode(flat.view(np.uint32), out)
    return out.reshape(f.shape)


def _build_decode_table() -> np.ndarray:
    h = np.arange(1 << 16, dtype=np.uint32)
    sign = (h & 0x8000) << 16
    exp = (h >> 10) & 0x1F
    mant = h & 0x3FF
    normal = sign | ((exp + 112) << 23) | (mant << 13)
    special = sign | np.uint32(0x7F800000) | (mant << 13)
    bits = np.where(exp == 31, special, normal)
    out = bits.view(np.float32).copy()
    sub = exp == 0
    # mant * 2**-24 is exact in float32
    mag = mant[sub].astype(np.float32) * np.float32(2.0**-24)
    out[sub] = np.where(sign[sub] != 0, -mag, mag)
    out[(exp == 31) & (mant != 0)] = np.float32("nan")
    out.flags.writeable = False
    return out


_DECODE = _build_decode_table()


def from_half_bits(bits) -> np.ndarray:
    """Widen binary16 patterns to float32 (exact)."""
    return _DECODE[np.asarray(bits, dtype=np.uint16)]


def round_half(values) -> np.ndarray:
    """float32 -> nearest binary16 -> float32."""
    return _DECODE[to_half_bits(values)]


def is_half_exact(values) -> np.ndarray:
    f = np.asarray(values, dtype=np.float32)
    r = round_half(f)
    return (r == f) | (np.isnan(r) & np.isnan(f))


@dataclass(frozen=True, slots=True)
class Half:
    """One binary16 value held as its bit pattern."""

    bits: int

    def __post_init__(self):
        if not 0 <= self.bits <= 0xFFFF:
            raise ValueError(f"not a 16-bit pattern: {self.bits:#x}")

    @classmethod
    def from_float(cls, v: float) -> "Half":
        return f32_to_half(v)

    def __float__(self) -> float:
        return half_to_f32(self)

    def __add__(self, other: "Half") -> "Half":
        return half_add(self, other)

    def __repr__(self) -> str:
        return f"Half({float(self)!r}, bits={self.bits:#06x})"


def f32_to_half(v: float) -> Half:
    """Round a single-precision value to binary16.

    Python floats are first narrowed to float32, so the input contract is
    the single-precision value nearest to ``v``.
    """
    return Half(int(to_half_bits(np.float32(v))))


def half_to_f32(h: Half) -> float:
    return float(_DECODE[h.bits])


def half_add(a: Half, b: Half) -> Half:
    # Widen, add once in float32, round once.
    with np.errstate(invalid="ignore", over="ignore"):
        s = np.float32(_DECODE[a.bits]) + np.float32(_DECODE[b.bits])
    return Half(int(to_half_bits(s)))
