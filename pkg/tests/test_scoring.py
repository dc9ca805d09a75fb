import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helpers import central_difference, clear_of_sites, random_instance, random_vec
from mdreduce.docking.model import Genotype, LigandInstance
from mdreduce.docking.scoring import (
    ENERGY_CAP, atom_partials, check_partition, place_atoms, rot_axis, score, score_reference, thread_partials,
)
from mdreduce.errors import UnsupportedBlockSize
from mdreduce.mma import HALF, SINGLE
from mdreduce.reduction import BASELINE, TCU

seeds = st.integers(0, 2**32 - 1)


def one_atom(d0=2.0, depth=1.0, weight=1.0):
    return LigandInstance([[0.0, 0.0, 0.0]], [weight], [-1], [[d0, 0.0, 0.0]], [depth], [d0], 0)


def test_well_minimum_and_zero_gradient():
    inst = one_atom(2.0, 1.5, 2.0)
    r = score_reference(inst, Genotype(0, 0, 0))
    assert r.energy == pytest.approx(-3.0)
    assert abs(r.gradient[0]) < 1e-12
    for m in (BASELINE, TCU):
        assert score(inst, Genotype(0, 0, 0), m, SINGLE).gradient[0] == 0.0


def test_energy_formula_and_cap():
    inst = one_atom(2.0)
    for d in (1.9, 2.5, 4.0):
        e = score_reference(inst, Genotype(2.0 - d, 0, 0)).energy
        raw = (2.0 / d) ** 12 - 2 * (2.0 / d) ** 6
        assert e == pytest.approx(ENERGY_CAP * math.tanh(raw / ENERGY_CAP) if raw > 0 else raw)
    # deep clash is squashed to at most the cap
    assert score_reference(inst, Genotype(1.5, 0, 0)).energy <= ENERGY_CAP
    assert score_reference(inst, Genotype(0.3, 0, 0)).energy < ENERGY_CAP


def test_coincident_point_is_finite():
    inst = one_atom(2.0)
    r = score_reference(inst, Genotype(2.0, 0, 0))
    assert np.isfinite(r.energy) and np.all(np.isfinite(r.gradient))


def test_pose_order_torsion_rotation_translation():
    atoms = [[1.0, 0.0, 0.0], [1.0, 1.0, 0.0]]
    inst = LigandInstance(atoms, [1, 1], [-1, 0], [[9, 9, 9]], [1], [1], 1)
    # torsion 0 pivots about the x axis (origin -> first atom of its group... atom 1 here)
    axis = np.array(atoms[1]) / np.linalg.norm(atoms[1])
    g = np.array([1.0, 2.0, 3.0, 0.3, -0.4, 0.5, 0.7])
    local = np.array(atoms)
    local[1] = rot_axis(axis, 0.7) @ local[1]
    rz = lambda a: np.array([[math.cos(a), -math.sin(a), 0], [math.sin(a), math.cos(a), 0], [0, 0, 1]])
    ry = lambda a: np.array([[math.cos(a), 0, math.sin(a)], [0, 1, 0], [-math.sin(a), 0, math.cos(a)]])
    want = local @ (rz(0.3) @ ry(-0.4) @ rz(0.5)).T + g[:3]
    assert np.allclose(place_atoms(inst, g), want)


@given(seeds)
def test_gradient_matches_central_differences(seed):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, nrot=3)
    v = random_vec(rng, inst)
    if not clear_of_sites(inst, v):
        v[:3] += 30.0  # far field: tiny but nonzero
    r = score_reference(inst, v)
    fd = central_difference(lambda x: score_reference(inst, x).energy, v, 1e-4)
    assert np.all(np.abs(r.gradient - fd) <= 1e-4 * np.maximum(np.abs(fd), 1.0))


@given(seeds)
def test_gradient_inside_core_with_fine_step(seed):
    # the capped core is stiff; a 1e-4 step is too coarse there, 1e-6 is not
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, nrot=2)
    v = random_vec(rng, inst, spread=1.0)
    r = score_reference(inst, v)
    fd = central_difference(lambda x: score_reference(inst, x).energy, v, 1e-6)
    assert np.all(np.abs(r.gradient - fd) <= 1e-4 * np.maximum(np.abs(fd), 1.0))


@given(seeds, st.sampled_from([64, 128, 256]))
def test_methods_agree_in_single_mode(seed, partition):
    # clash-free poses: no atom inside any site's preferred distance
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n_atoms=int(rng.integers(3, 40)))
    v = random_vec(rng, inst)
    if not clear_of_sites(inst, v, 1.0):
        v[:3] += 30.0
    ref = score_reference(inst, v)
    b = score(inst, v, BASELINE, SINGLE, partition)
    t = score(inst, v, TCU, SINGLE, partition)
    scale = max(abs(ref.energy), 1.0)
    assert abs(b.energy - t.energy) <= 1e-3 * scale
    assert abs(t.energy - ref.energy) <= 1e-3 * scale


@given(seeds)
def test_methods_agree_relative_to_partials(seed):
    # with clashes the total can cancel far below its terms; binary16 staging
    # error then scales with the terms, not the total
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n_atoms=int(rng.integers(3, 40)))
    v = random_vec(rng, inst)
    terms = np.abs(atom_partials(inst, v)[0][:, 0]).sum()
    b = score(inst, v, BASELINE, SINGLE)
    t = score(inst, v, TCU, SINGLE)
    assert abs(b.energy - t.energy) <= 1e-3 * max(terms, 1.0)


def test_stats_per_method():
    inst = random_instance(np.random.default_rng(1))
    v = random_vec(np.random.default_rng(2), inst)
    s = score(inst, v, TCU, HALF).reduce_stats
    assert (s.block_syncs, s.atomic_adds, s.memory_fences) == (4, 0, 0)
    assert score(inst, v, BASELINE).reduce_stats.block_syncs == 21
    assert len(score(inst, v).gradient) == inst.dim == 9


def test_partition_rules():
    check_partition(BASELINE, 32)
    for m, p in [(TCU, 32), (TCU, 100), (BASELINE, 2048)]:
        with pytest.raises(UnsupportedBlockSize):
            check_partition(m, p)
    inst = random_instance(np.random.default_rng(1))
    with pytest.raises(UnsupportedBlockSize):
        score(inst, np.zeros(inst.dim), TCU, HALF, partition=32)


def test_thread_partials_round_robin():
    rec = np.arange(10 * 7, dtype=np.float64).reshape(10, 7)
    p = thread_partials(rec, 4)
    assert p.shape == (4, 7)
    assert np.array_equal(p[1], rec[1] + rec[5] + rec[9])
    assert np.array_equal(p[3], rec[3] + rec[7])


def test_permutation_invariance():
    rng = np.random.default_rng(5)
    inst = random_instance(rng, n_atoms=12, nrot=0)
    v = random_vec(rng, inst)
    perm = rng.permutation(inst.n_atoms)
    shuffled = LigandInstance(inst.atom_xyz[perm], inst.atom_weight[perm], inst.atom_torsion[perm],
                              inst.site_xyz, inst.site_depth, inst.site_d0, 0)
    assert score_reference(shuffled, v).energy == pytest.approx(score_reference(inst, v).energy, rel=1e-12)
    # with one atom per simulated thread the baseline sums the same values;
    # only their lane order differs, so agreement is to float32 rounding
    a, b = score(inst, v, BASELINE, partition=32), score(shuffled, v, BASELINE, partition=32)
    assert a.energy == pytest.approx(b.energy, rel=1e-5, abs=1e-5)


def test_permutation_exact_when_partials_are_integers():
    # exactness of the baseline reorder holds whenever float32 sums are exact
    rec = np.random.default_rng(6).integers(-50, 50, (64, 7)).astype(np.float64)
    from mdreduce.reduction import reduce7
    a = reduce7(thread_partials(rec, 64), BASELINE)[0]
    b = reduce7(thread_partials(rec[::-1], 64), BASELINE)[0]
    assert np.array_equal(a, b)


def test_instance_validation():
    with pytest.raises(ValueError):
        LigandInstance([[0, 0, 0]], [1], [-1], np.zeros((0, 3)), [], [], 0)
    with pytest.raises(ValueError):
        LigandInstance([[1, 0, 0]], [1], [2], [[0, 0, 0]], [1], [1], 1)
    with pytest.raises(ValueError):
        LigandInstance([[0, 0, 0]], [1], [0], [[1, 0, 0]], [1], [1], 1)  # pivot on origin
    with pytest.raises(ValueError):
        LigandInstance([[1, 0, 0]], [1], [-1], [[0, 0, 0]], [1], [0.0], 0)


def test_genotype_wraps_and_round_trips():
    g = Genotype(1, 2, 3, math.pi, -3 * math.pi, 7.0, (math.pi + 0.5,))
    assert -math.pi <= g.phi < math.pi and g.phi == -math.pi
    assert g.theta == pytest.approx(-math.pi)
    assert g.dim == 7 and g.nrot == 1
    assert Genotype.from_array(g.as_array()) == g
    with pytest.raises(ValueError):
        Genotype.from_array([1, 2, 3])
