"""Block-level reduce-and-broadcast, two ways.

``reduce4`` sums four-component vectors with one emulated MMA per
64-vector chunk plus one: the vectors are packed column-major into A,
``V <- A @ ones + V`` sums each row, then ``W <- Q @ V`` folds the four
interleaved row groups so W[0:4, 0] holds the totals.

``baseline_block_reduce`` is the shuffle-tree + shared-memory atomic scheme:
five shuffle rounds per warp, one atomic add per warp, three block
barriers, and a broadcast read.

Both are simulated sequentially and return a ``SyncStats`` with the
operation counts a real block would issue.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels as _k
from .errors import SizeError, UnsupportedBlockSize
from .half import _DECODE
from .mma import COL_MAJOR, HALF, SINGLE, Mat16, load_matrix, _check_mode

BASELINE = "baseline"
TCU = "tcu"
METHODS = (BASELINE, TCU)

WARP = 32
VECS_PER_TILE = 64
MAX_BLOCK = 1024
MIN_TCU_BLOCK = 64
SHUFFLE_OFFSETS = (16, 8, 4, 2, 1)
DIMS7 = ("E", "gx", "gy", "gz", "tx", "ty", "tz")


class Vec4(NamedTuple):
    x: float
    y: float
    z: float
    e: float


@dataclass(slots=True)
class SyncStats:
    block_syncs: int = 0
    warp_shuffles: int = 0
    atomic_adds: int = 0
    memory_fences: int = 0
    mma_ops: int = 0
    shared_mem_bytes: int = 0
    precision_conversions: int = 0

    def __post_init__(self):
        for name in _STAT_NAMES:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def __add__(self, other: "SyncStats") -> "SyncStats":
        return SyncStats(*(getattr(self, n) + getattr(other, n) for n in _STAT_NAMES))

    def __iadd__(self, other: "SyncStats") -> "SyncStats":
        for n in _STAT_NAMES:
            setattr(self, n, getattr(self, n) + getattr(other, n))
        return self

    def __mul__(self, k: int) -> "SyncStats":
        return SyncStats(*(getattr(self, n) * k for n in _STAT_NAMES))

    def as_dict(self) -> dict[str, int]:
        return {n: getattr(self, n) for n in _STAT_NAMES}


_STAT_NAMES = tuple(f.name for f in fields(SyncStats))


def _ones_bits() -> np.ndarray:
    return np.full((16, 16), 0x3C00, dtype=np.uint16)


def make_p() -> Mat16:
    """All-ones operand: right-multiplying by it sums each row."""
    return Mat16(_ones_bits())


def make_q() -> Mat16:
    """4x4 grid of 4x4 identities: (i, j) is 1 iff i = j (mod 4)."""
    i, j = np.indices((16, 16))
    return Mat16(np.where(i % 4 == j % 4, np.uint16(0x3C00), np.uint16(0)).astype(np.uint16))


_P = make_p()
_Q = make_q()


def _as_array4(vs) -> np.ndarray:
    arr = np.asarray(vs, dtype=np.float32)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise SizeError(f"expected a sequence of 4-component vectors, got shape {arr.shape}")
    return arr


def pack_vectors(vs: Sequence[Vec4]) -> Mat16:
    """Place up to 64 vectors into a 16x16 operand.

    Vector j lands in column j // 4, rows 4*(j % 4) .. 4*(j % 4) + 3. That is
    exactly a column-major load of the per-thread (x, y, z, e) records laid
    out back to back, which is how the staging buffer is filled.
    """
    arr = _as_array4(vs)
    if not 1 <= len(arr) <= VECS_PER_TILE:
        raise SizeError(f"pack_vectors takes 1..64 vectors, got {len(arr)}")
    flat = np.zeros(16 * 16, dtype=np.float32)
    flat[: arr.size] = arr.reshape(-1)
    return load_matrix(flat, COL_MAJOR)


def reduce4(vs, accum_mode: str = HALF) -> tuple[Vec4, SyncStats]:
    """Sum a block's worth of four-component vectors on the emulated MMA unit.

    Records are staged as binary16 in chunks of 64 (zero padded). Each chunk
    is loaded column-major as A and accumulated with V = A @ P + V, where P
    is all ones; then W = Q @ half(V) with Q[i, j] = 1 iff i == j (mod 4)
    folds the four row groups together, leaving the totals in W[0:4, 0].
    """
    _check_mode(accum_mode)
    arr = _as_array4(vs)
    n = len(arr)
    if n == 0:
        raise SizeError("reduce4 needs at least one vector")
    chunks = -(-n // VECS_PER_TILE)
    # staging buffer in shared memory: 4 halves per thread, zero padded
    staged = np.zeros(chunks * VECS_PER_TILE * 4, dtype=np.float32)
    staged[: arr.size] = arr.reshape(-1)
    totals = np.empty(4, dtype=np.float32)
    _k.reduce4_tiles(staged, _P.bits, _Q.bits, accum_mode == HALF, _DECODE, totals)
    out = Vec4(*(float(t) for t in totals))

    threads = chunks * VECS_PER_TILE
    conversions = 4 * threads + 4 * threads  # float->half in, half->float on readback
    if accum_mode == SINGLE:
        conversions += 256
    stats = SyncStats(
        block_syncs=2,
        mma_ops=chunks + 1,
        shared_mem_bytes=staged.size * 2 + 256 * 2,
        precision_conversions=conversions,
    )
    return out, stats


def _warp_tree(lanes: np.ndarray) -> np.ndarray:
    """Shuffle-down tree over the last axis (32 lanes); returns lane 0's total.

    Out-of-range source lanes hand back the caller's own value. Only lanes
    >= 32 - offset see that, and lane 0's chain never touches them.
    """
    flat = np.ascontiguousarray(lanes, dtype=np.float32).reshape(-1, WARP)
    out = np.empty(len(flat), dtype=np.float32)
    _k.shuffle_tree(flat, out)
    return out.reshape(lanes.shape[:-1])


def baseline_warp_reduce(values) -> tuple[float, SyncStats]:
    lanes = np.asarray(values, dtype=np.float32)
    if lanes.shape != (WARP,):
        raise SizeError(f"a warp has exactly 32 lanes, got {lanes.size}")
    total = _warp_tree(lanes)
    return float(total), SyncStats(warp_shuffles=len(SHUFFLE_OFFSETS) * WARP)


def _check_baseline_block(n: int) -> None:
    if n % WARP or not WARP <= n <= MAX_BLOCK:
        raise SizeError(f"baseline block size must be a multiple of 32 in [32, 1024], got {n}")


def _baseline_columns(cols: np.ndarray) -> np.ndarray:
    """Reduce each column of an (n, d) array independently, bit-identical to
    d separate baseline_block_reduce calls."""
    n, d = cols.shape
    warps = n // WARP
    lanes = cols.T.reshape(d, warps, WARP)
    partial = _warp_tree(lanes)  # (d, warps)
    acc = np.zeros(d, dtype=np.float32)
    for w in range(warps):  # atomics land in ascending warp order
        acc = acc + partial[:, w]
    return acc


def _baseline_call_stats(n: int) -> SyncStats:
    warps = n // WARP
    return SyncStats(
        block_syncs=3,
        warp_shuffles=len(SHUFFLE_OFFSETS) * WARP * warps,
        atomic_adds=warps,
        memory_fences=1,
        shared_mem_bytes=4,
    )


def baseline_block_reduce(values, threads_per_block: int | None = None) -> tuple[float, SyncStats]:
    """One value per thread in, block total out (what every thread reads back)."""
    vals = np.asarray(values, dtype=np.float32).reshape(-1)
    n = len(vals) if threads_per_block is None else threads_per_block
    _check_baseline_block(n)
    if len(vals) != n:
        raise SizeError(f"{len(vals)} values for a block of {n} threads")
    total = _baseline_columns(vals[:, None])[0]
    return float(total), _baseline_call_stats(n)


def reduce7(partials, method: str, accum_mode: str = HALF) -> tuple[np.ndarray, SyncStats]:
    """Reduce per-thread (E, gx, gy, gz, tx, ty, tz) records.

    Baseline issues seven sequential block reductions. The TCU path merges
    (gx, gy, gz, E) into one reduce4 and (tx, ty, tz, 0) into a second.
    Returns the seven totals in input order as float64.
    """
    rec = np.asarray(partials, dtype=np.float32)
    if rec.ndim != 2 or rec.shape[1] != 7:
        raise SizeError(f"reduce7 needs an (n, 7) array, got shape {rec.shape}")
    n = len(rec)
    if method == BASELINE:
        _check_baseline_block(n)
        totals = _baseline_columns(rec)
        return totals.astype(np.float64), _baseline_call_stats(n) * 7
    if method == TCU:
        if n < MIN_TCU_BLOCK:
            raise UnsupportedBlockSize(f"the tcu method needs at least 64 threads, got {n}")
        if n > MAX_BLOCK:
            raise UnsupportedBlockSize(f"block size {n} exceeds 1024")
        g, s1 = reduce4(rec[:, [1, 2, 3, 0]], accum_mode)
        torque = np.zeros((n, 4), dtype=np.float32)
        torque[:, :3] = rec[:, 4:7]
        t, s2 = reduce4(torque, accum_mode)
        totals = np.array([g.e, g.x, g.y, g.z, t.x, t.y, t.z], dtype=np.float64)
        return totals, s1 + s2
    raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
