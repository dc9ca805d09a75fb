import numpy as np
import pytest
from hypothesis import given, strategies as st

from mdreduce.errors import SizeError, UnsupportedBlockSize
from mdreduce.mma import HALF, SINGLE
from mdreduce.reduction import BASELINE, TCU, SyncStats, baseline_block_reduce, reduce4, reduce7
from mdreduce.simblock import (
    DEFAULT_WEIGHTS, SWEEP_SIZES, BlockConfig, CostWeights, estimate_cost, scaling_sweep, simulate_block,
)


def test_block_config_bounds():
    BlockConfig(64, TCU)
    BlockConfig(32, BASELINE)
    for n, m in [(32, TCU), (1056, TCU), (96 + 1, BASELINE), (0, BASELINE), (2048, BASELINE)]:
        with pytest.raises(UnsupportedBlockSize):
            BlockConfig(n, m)
    with pytest.raises(ValueError):
        BlockConfig(64, "warp-vote")
    with pytest.raises(ValueError):
        BlockConfig(64, TCU, "quarter")


def test_simulate_examples():
    out, s = simulate_block(BlockConfig(64, TCU), np.ones((64, 4)))
    assert np.array_equal(out, [64, 64, 64, 64])
    _, s = simulate_block(BlockConfig(1024, BASELINE), np.zeros((1024, 7)))
    assert s.block_syncs == 21
    _, s = simulate_block(BlockConfig(1024, TCU), np.zeros((1024, 4)))
    assert (s.block_syncs, s.mma_ops) == (2, 17)


def test_simulate_size_mismatch():
    with pytest.raises(SizeError):
        simulate_block(BlockConfig(64, TCU), np.ones((65, 4)))
    with pytest.raises(SizeError):
        simulate_block(BlockConfig(64, TCU), np.ones((64, 5)))


@given(st.integers(0, 2**32 - 1), st.integers(2, 32), st.sampled_from([HALF, SINGLE]))
def test_simulate_bit_identical_to_direct_calls(seed, warps, mode):
    n = 32 * warps
    rng = np.random.default_rng(seed)
    r4 = rng.uniform(-1, 1, (n, 4)).astype(np.float32)
    r7 = rng.uniform(-1, 1, (n, 7)).astype(np.float32)
    out, _ = simulate_block(BlockConfig(n, TCU, mode), r4)
    assert np.array_equal(out, np.array(reduce4(r4, mode)[0]))
    out, _ = simulate_block(BlockConfig(n, TCU, mode), r7)
    assert np.array_equal(out, reduce7(r7, TCU, mode)[0])
    out, s = simulate_block(BlockConfig(n, BASELINE), r4)
    assert np.array_equal(out, [baseline_block_reduce(r4[:, d])[0] for d in range(4)])
    assert s.atomic_adds == 4 * warps


def test_estimate_cost():
    assert estimate_cost(SyncStats()) == 0
    unit = CostWeights(1, 1, 1, 1, 1)
    assert estimate_cost(SyncStats(block_syncs=2, mma_ops=2), unit) == 4
    with pytest.raises(ValueError):
        CostWeights(block_sync=-1)


def test_sweep_rows():
    rows = scaling_sweep()
    assert [r.threads_per_block for r in rows] == list(SWEEP_SIZES)
    by_n = {r.threads_per_block: r for r in rows}
    assert by_n[64].baseline.atomic_adds == 2 and by_n[1024].baseline.atomic_adds == 32
    assert by_n[64].tcu.mma_ops == 2 and by_n[1024].tcu.mma_ops == 17
    for r in rows:
        assert r.baseline.atomic_adds == r.threads_per_block // 32
        assert r.tcu.atomic_adds == 0 and r.tcu.block_syncs == 2 and r.baseline.block_syncs == 3
        assert r.cost_ratio >= 1
    ratios = [r.cost_ratio for r in rows]
    assert all(a < b for a, b in zip(ratios, ratios[1:]))
    assert by_n[64].cost_ratio < by_n[512].cost_ratio


def test_sweep_zero_weights_flagged():
    rows = scaling_sweep(weights=CostWeights(0, 0, 0, 0, 0))
    assert all(r.cost_ratio == 1.0 and r.degenerate for r in rows)


def test_sweep_rejects_small_block():
    with pytest.raises(UnsupportedBlockSize):
        scaling_sweep([32])


def test_sweep_cost_formula():
    # baseline: 3 syncs, 5 shuffles per lane, one atomic per warp, one fence
    for r in scaling_sweep():
        n = r.threads_per_block
        w = DEFAULT_WEIGHTS
        assert r.baseline_cost == 3 * w.block_sync + 5 * n * w.shuffle + n // 32 * w.atomic + w.fence
        assert r.tcu_cost == 2 * w.block_sync + (n // 64 + 1) * w.mma
