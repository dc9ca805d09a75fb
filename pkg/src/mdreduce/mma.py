"""Emulated 16x16 matrix multiply-accumulate with binary16 operands.

``Mat16`` stands in for an operand fragment, ``Accum16`` for an accumulator
fragment. Register layout across warp lanes is not modelled; a fragment is
just its 256 logical elements.

Arithmetic: each product of two binary16 values is exact in float32, the
16 products of a dot product are summed in float32 in ascending k, the
accumulator input is added last in float32, and a half-mode accumulator
rounds that sum once to binary16.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .errors import SizeError
from .half import _DECODE, from_half_bits, round_half, to_half_bits

N = 16
ROW_MAJOR = "row"
COL_MAJOR = "col"
LAYOUTS = (ROW_MAJOR, COL_MAJOR)
HALF = "half"
SINGLE = "single"
ACCUM_MODES = (HALF, SINGLE)


def _check_layout(layout: str) -> None:
    if layout not in LAYOUTS:
        raise ValueError(f"unknown layout {layout!r}, expected one of {LAYOUTS}")


def _check_mode(mode: str) -> None:
    if mode not in ACCUM_MODES:
        raise ValueError(f"unknown accumulator mode {mode!r}, expected one of {ACCUM_MODES}")


@dataclass(frozen=True, slots=True, eq=False)
class Mat16:
    """16x16 binary16 operand. ``bits[i, j]`` is logical element (i, j)."""

    bits: np.ndarray
    layout: str = ROW_MAJOR

    def __post_init__(self):
        if self.bits.shape != (N, N) or self.bits.dtype != np.uint16:
            raise SizeError(f"Mat16 needs a (16, 16) uint16 array, got {self.bits.shape} {self.bits.dtype}")
        _check_layout(self.layout)

    @classmethod
    def from_values(cls, values, layout: str = ROW_MAJOR) -> "Mat16":
        """Round a (16, 16) array of logical elements to binary16."""
        arr = np.asarray(values, dtype=np.float32)
        if arr.shape != (N, N):
            raise SizeError(f"expected shape (16, 16), got {arr.shape}")
        return cls(to_half_bits(arr), layout)

    def values(self) -> np.ndarray:
        return from_half_bits(self.bits)

    def __getitem__(self, ij) -> float:
        return float(from_half_bits(self.bits[ij]))


@dataclass(frozen=True, slots=True, eq=False)
class Accum16:
    """16x16 accumulator. In half mode every element is binary16-representable."""

    values: np.ndarray
    mode: str = SINGLE
    # binary16 patterns of ``values``, kept when mma already computed them
    _bits: np.ndarray | None = None

    def __post_init__(self):
        if self.values.shape != (N, N):
            raise SizeError(f"Accum16 needs shape (16, 16), got {self.values.shape}")
        _check_mode(self.mode)

    @classmethod
    def zeros(cls, mode: str = SINGLE) -> "Accum16":
        return cls(np.zeros((N, N), dtype=np.float32), mode)

    @classmethod
    def fill(cls, value: float, mode: str = SINGLE) -> "Accum16":
        v = np.full((N, N), value, dtype=np.float32)
        if mode == HALF:
            v = round_half(v)
        return cls(v, mode)

    def __getitem__(self, ij) -> float:
        return float(self.values[ij])

    def to_operand(self) -> Mat16:
        """Reuse the accumulator as a multiplication operand (rounds to binary16)."""
        if self._bits is not None:
            return Mat16(self._bits)
        return Mat16(to_half_bits(self.values))


def load_matrix(src, layout: str = ROW_MAJOR) -> Mat16:
    """Load 256 values from flat memory.

    Row-major: element (i, j) = src[16*i + j]; column-major: src[16*j + i].
    Values that are not already binary16 are rounded.
    """
    _check_layout(layout)
    flat = np.asarray(src)
    if flat.ndim != 1 or flat.size != N * N:
        raise SizeError(f"load_matrix needs exactly 256 elements, got {flat.size}")
    bits = flat if flat.dtype == np.uint16 else to_half_bits(flat.astype(np.float32))
    grid = bits.reshape(N, N)
    if layout == COL_MAJOR:
        grid = grid.T
    return Mat16(np.ascontiguousarray(grid), layout)


def store_matrix(m: Accum16 | Mat16, layout: str = ROW_MAJOR) -> np.ndarray:
    """Write a fragment back to flat float32 memory in the given layout."""
    _check_layout(layout)
    vals = m.values() if isinstance(m, Mat16) else m.values
    grid = vals.T if layout == COL_MAJOR else vals
    return np.ascontiguousarray(grid, dtype=np.float32).reshape(-1)


def mma(a: Mat16, b: Mat16, c: Accum16) -> Accum16:
    """Return a @ b + c with the accumulator precision of ``c``."""
    out = np.empty((N, N), dtype=np.float32)
    cv = np.ascontiguousarray(c.values, dtype=np.float32)
    if c.mode == HALF:
        bits = np.empty((N, N), dtype=np.uint16)
        _k.mma16(a.bits, b.bits, cv, True, _DECODE, out, bits)
        return Accum16(out, HALF, bits)
    _k.mma16(a.bits, b.bits, cv, False, _DECODE, out, _NO_BITS)
    return Accum16(out, SINGLE)


_NO_BITS = np.empty((N, N), dtype=np.uint16)
