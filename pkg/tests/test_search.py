import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import random_instance, random_vec
from mdreduce.docking.model import Genotype, LigandInstance
from mdreduce.docking.search import LgaSettings, lga_run, local_search
from mdreduce.io import bundled_instance
from mdreduce.mma import HALF, SINGLE
from mdreduce.reduction import BASELINE, TCU

SMALL = LgaSettings(population_size=8, max_generations=4, max_evaluations=300, ls_max_iters=30)


def bowl():
    return LigandInstance([[0.0, 0.0, 0.0]], [1.0], [-1], [[2.0, 0.0, 0.0]], [1.5], [2.0], 0)


def test_local_search_at_minimum_converges_in_first_window():
    r = local_search(bowl(), Genotype(0, 0, 0))
    assert r.converged and r.iterations <= 17
    assert r.energy == pytest.approx(-1.5)


def test_local_search_bowl_reaches_analytic_minimum():
    for method, acc in ((BASELINE, SINGLE), (TCU, HALF)):
        r = local_search(bowl(), Genotype(0.4, 0.3, -0.2), method=method, accum_mode=acc)
        assert abs(r.energy - (-1.5)) <= 1e-3
        assert r.converged


def test_local_search_cap_is_non_convergent():
    r = local_search(bowl(), Genotype(0.4, 0.3, -0.2), max_iters=5)
    assert r.iterations == 5 and not r.converged
    with pytest.raises(ValueError):
        local_search(bowl(), Genotype(0, 0, 0), max_iters=0)


@settings(max_examples=20)
@given(st.integers(0, 2**32 - 1))
def test_local_search_running_best_non_increasing(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng)
    start = Genotype.from_array(random_vec(rng, inst))
    r = local_search(inst, start, max_iters=60)
    assert all(b <= a for a, b in zip(r.trace, r.trace[1:]))
    assert r.energy == r.trace[-1]
    assert r.stats.block_syncs == 21 * r.iterations


def test_local_search_deterministic():
    inst = bundled_instance("S2")
    g = Genotype.from_array(np.r_[inst.site_xyz.mean(axis=0), 0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    a = local_search(inst, g, method=TCU, accum_mode=HALF)
    b = local_search(inst, g, method=TCU, accum_mode=HALF)
    assert a.genotype == b.genotype and a.trace == b.trace


def test_lga_two_identical_individuals_no_mutation():
    inst = bundled_instance("S2")
    g = Genotype.from_array(np.r_[inst.site_xyz.mean(axis=0) + 1.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6])
    s = replace(LgaSettings(), population_size=2, max_generations=1, mutation_rate=0.0, max_evaluations=10_000)
    r = lga_run(inst, s, initial_population=[g, g])
    ls = local_search(inst, g, s.ls_max_iters, s.ls_tol, rho=s.rho, epsilon=s.epsilon)
    assert r.best_energy == ls.energy
    assert r.best_genotype == ls.genotype


def test_lga_same_seed_identical():
    inst = bundled_instance("S3")
    a = lga_run(inst, SMALL, TCU, HALF, rng_seed=5)
    b = lga_run(inst, SMALL, TCU, HALF, rng_seed=5)
    assert a == b


def test_lga_different_seed_differs():
    inst = bundled_instance("S3")
    assert lga_run(inst, SMALL, rng_seed=1).best_genotype != lga_run(inst, SMALL, rng_seed=2).best_genotype


@pytest.mark.parametrize("name", ["S1", "S2", "S3"])
def test_lga_invariants(name):
    inst = bundled_instance(name)
    for method, acc in ((BASELINE, SINGLE), (TCU, HALF)):
        r = lga_run(inst, SMALL, method, acc, rng_seed=3)
        assert r.evaluations <= SMALL.max_evaluations
        assert r.best_energy == min(g.best_energy for g in r.generations)
        assert len(r.generations) <= SMALL.max_generations
        assert 0 <= r.ls_converged <= r.ls_runs
        if method == TCU:
            assert r.stats.atomic_adds == 0 and r.stats.memory_fences == 0
            assert r.stats.block_syncs == 4 * r.evaluations
        else:
            assert r.stats.block_syncs == 21 * r.evaluations


@pytest.mark.parametrize("name", ["S1", "S2", "S3"])
def test_lga_paired_seed_difference_small(name):
    # Known red on S3 (S2 has bad seeds too, beyond 19): a few seeds split
    # into neighbouring minima up to ~0.5% apart once half-rounded gradients
    # move the trajectory. The mean over 100 runs stays well under 0.2%
    # (see test_acceptance).
    inst = bundled_instance(name)
    bad = []
    for seed in range(20):
        b = lga_run(inst, LgaSettings(), BASELINE, SINGLE, seed).best_energy
        t = lga_run(inst, LgaSettings(), TCU, HALF, seed).best_energy
        if abs(t - b) / abs(b) >= 2e-3:
            bad.append((seed, t, b))
    assert not bad


def test_lga_budget_stops_run():
    inst = bundled_instance("S1")
    r = lga_run(inst, replace(SMALL, max_evaluations=20, max_generations=50), rng_seed=0)
    assert r.evaluations == 20 and not r.converged


def test_lga_settings_validation():
    for bad in ({"population_size": 1}, {"max_generations": 0}, {"ls_fraction": 1.5}):
        with pytest.raises(ValueError):
            replace(LgaSettings(), **bad)


def test_lga_rejects_mismatched_population():
    inst = bundled_instance("S2")
    with pytest.raises(ValueError):
        lga_run(inst, SMALL, initial_population=[Genotype(0, 0, 0)] * 3)


def test_initial_population_inside_search_cube():
    inst = bundled_instance("S1")
    s = replace(SMALL, max_generations=1, ls_fraction=0.0)
    r = lga_run(inst, s, rng_seed=9)
    c = inst.site_xyz.mean(axis=0)
    assert np.all(np.abs(r.best_genotype.as_array()[:3] - c) <= s.init_half_width)
    assert r.ls_runs == 0 and r.evaluations == s.population_size
