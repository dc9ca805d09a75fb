"""Block configurations and an abstract cost model over SyncStats.

The cost model is a weighted count of synchronisation-type operations. It
is meant for comparing the two methods against each other as the block
grows, not for predicting milliseconds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SizeError, UnsupportedBlockSize
from .mma import ACCUM_MODES, HALF
from .reduction import (
    BASELINE,
    MAX_BLOCK,
    METHODS,
    MIN_TCU_BLOCK,
    TCU,
    WARP,
    SyncStats,
    _baseline_call_stats,
    _baseline_columns,
    reduce4,
    reduce7,
)

SWEEP_SIZES = (64, 128, 256, 512, 1024)


@dataclass(frozen=True)
class BlockConfig:
    threads_per_block: int
    method: str = TCU
    accum_mode: str = HALF

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.accum_mode not in ACCUM_MODES:
            raise ValueError(f"unknown accumulator mode {self.accum_mode!r}")
        n = self.threads_per_block
        low = MIN_TCU_BLOCK if self.method == TCU else WARP
        if n % WARP or not low <= n <= MAX_BLOCK:
            raise UnsupportedBlockSize(
                f"{self.method} needs a multiple of 32 in [{low}, {MAX_BLOCK}] threads, got {n}"
            )


@dataclass(frozen=True)
class CostWeights:
    block_sync: float = 10.0
    shuffle: float = 1.0
    atomic: float = 4.0
    mma: float = 8.0
    fence: float = 4.0

    def __post_init__(self):
        for name in ("block_sync", "shuffle", "atomic", "mma", "fence"):
            if getattr(self, name) < 0:
                raise ValueError(f"cost weight {name} must be >= 0")


DEFAULT_WEIGHTS = CostWeights()


def estimate_cost(stats: SyncStats, weights: CostWeights = DEFAULT_WEIGHTS) -> float:
    return (
        weights.block_sync * stats.block_syncs
        + weights.shuffle * stats.warp_shuffles
        + weights.atomic * stats.atomic_adds
        + weights.mma * stats.mma_ops
        + weights.fence * stats.memory_fences
    )


def simulate_block(config: BlockConfig, per_thread_inputs) -> tuple[np.ndarray, SyncStats]:
    """Run one block-wide reduction with one record per thread.

    Records may have 4 components (x, y, z, e) or 7 (E, gx, gy, gz, tx, ty, tz).
    A 4-component baseline block reduces each component with its own
    block reduction, as the original kernel does per variable.
    """
    rec = np.asarray(per_thread_inputs, dtype=np.float32)
    if rec.ndim != 2 or rec.shape[1] not in (4, 7):
        raise SizeError(f"expected per-thread records of 4 or 7 components, got shape {rec.shape}")
    if len(rec) != config.threads_per_block:
        raise SizeError(f"{len(rec)} records for a block of {config.threads_per_block} threads")
    if rec.shape[1] == 7:
        return reduce7(rec, config.method, config.accum_mode)
    if config.method == TCU:
        out, stats = reduce4(rec, config.accum_mode)
        return np.array(out, dtype=np.float64), stats
    totals = _baseline_columns(rec)
    return totals.astype(np.float64), _baseline_call_stats(len(rec)) * 4


@dataclass
class SweepRow:
    threads_per_block: int
    baseline: SyncStats
    tcu: SyncStats
    baseline_cost: float
    tcu_cost: float
    cost_ratio: float
    degenerate: bool = False


def scaling_sweep(sizes=SWEEP_SIZES, weights: CostWeights = DEFAULT_WEIGHTS, accum_mode: str = HALF) -> list[SweepRow]:
    """Cost of one baseline block reduction against one reduce4 call per block size.

    The baseline side reduces a single value per thread while reduce4 sums
    four, so the ratio understates the tensor-unit advantage on the
    four-variable test kernel. A zero tcu cost makes the ratio undefined;
    such rows report 1.0 and set ``degenerate``.
    """
    rows = []
    for n in sizes:
        BlockConfig(n, TCU, accum_mode)  # validates the size
        sb = _baseline_call_stats(n)
        _, st = reduce4(np.zeros((n, 4), dtype=np.float32), accum_mode)
        cb, ct = estimate_cost(sb, weights), estimate_cost(st, weights)
        if ct > 0:
            rows.append(SweepRow(n, sb, st, cb, ct, cb / ct))
        else:
            rows.append(SweepRow(n, sb, st, cb, ct, 1.0, degenerate=True))
    return rows
