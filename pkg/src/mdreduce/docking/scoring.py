"""Synthetic pairwise scoring function with analytic gradient.

Each atom a interacts with every receptor site s through a 12-6 well

    e(d) = w_a * depth_s * ((d0_s / d)**12 - 2 * (d0_s / d)**6)

whose minimum is ``-w_a * depth_s`` at ``d = d0_s``. Repulsive values are
squashed by ``ENERGY_CAP * tanh(e / ENERGY_CAP)`` so per-atom partials stay
inside the binary16 range when they are reduced on the emulated tensor
unit. The squash matches e to second order at 0, so the function stays
smooth.

Gradient bookkeeping follows the block-reduction layout: per atom, the
energy, the Cartesian gradient (dE/dp) and the torque ``(p - t) x dE/dp``
about the ligand origin. Summed over atoms these give the translational
gradient directly; the Euler-angle gradient is the total torque projected
onto each angle's rotation axis, and each torsion's gradient is the torque
of the atoms it moves projected onto its bond axis.
"""

from __future__ import annotations

import math

import numpy as np

from .. import _kernels as _k
from ..errors import UnsupportedBlockSize
from ..mma import SINGLE
from ..reduction import BASELINE, MAX_BLOCK, MIN_TCU_BLOCK, TCU, WARP, SyncStats, reduce7
from .model import Genotype, LigandInstance, ScoreResult

ENERGY_CAP = 50.0
MIN_DISTANCE = 1e-6


def rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_axis(axis: np.ndarray, a: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    x, y, z = axis
    c, s = math.cos(a), math.sin(a)
    k = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + s * k + (1.0 - c) * (k @ k)


def _orientation(vec: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rotation matrix and the three Euler rotation axes in the world frame."""
    phi, theta, alpha = vec[3], vec[4], vec[5]
    rz_phi = rot_z(phi)
    ry = rot_y(theta)
    rot = rz_phi @ ry @ rot_z(alpha)
    ez = np.array([0.0, 0.0, 1.0])
    axes = np.stack([
        ez,
        rz_phi @ np.array([0.0, 1.0, 0.0]),
        rz_phi @ ry @ ez,
    ])
    return rot, axes


def place_atoms(inst: LigandInstance, vec, rot: np.ndarray | None = None) -> np.ndarray:
    """World coordinates: torsions, then z-y-z rotation, then translation."""
    vec = np.asarray(vec, dtype=np.float64)
    local = inst.atom_xyz.copy()
    for k in range(inst.nrot):
        members = inst.atom_torsion == k
        if members.any():
            local[members] = local[members] @ rot_axis(inst.torsion_axes[k], vec[6 + k]).T
    if rot is None:
        rot, _ = _orientation(vec)
    return local @ rot.T + vec[:3]


def _pair_terms(inst: LigandInstance, world: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-atom energy (n,) and dE/dposition (n, 3) in float64."""
    n = len(world)
    energy = np.empty(n)
    grad = np.empty((n, 3))
    # below the distance clamp the distance is constant, so it contributes no gradient
    _k.pair_terms(np.ascontiguousarray(world), inst.site_xyz, inst.site_d0, inst.site_depth,
                  inst.atom_weight, ENERGY_CAP, MIN_DISTANCE, energy, grad)
    return energy, grad


def atom_partials(inst: LigandInstance, vec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-atom (E, gx, gy, gz, tx, ty, tz) records and the gradient's angular part.

    Torques are taken about the ligand origin (the translation point). The
    second value holds the per-torsion gradients, which are projections of
    each torsion group's torque and need no block reduction; the third holds
    the three Euler axes in the world frame.
    """
    vec = np.asarray(vec, dtype=np.float64)
    rot, euler_axes = _orientation(vec)
    n = len(inst.atom_xyz)
    rec = np.empty((n, 7))
    group = np.empty((inst.nrot, 3))
    _k.atom_records(inst.atom_xyz, inst.atom_torsion, inst.torsion_axes, vec[6:], rot, vec[:3],
                    inst.site_xyz, inst.site_d0, inst.site_depth, inst.atom_weight,
                    ENERGY_CAP, MIN_DISTANCE, rec, group)
    tors_grad = np.einsum("kj,kj->k", inst.torsion_axes @ rot.T, group)
    return rec, tors_grad, euler_axes


def _assemble_gradient(inst: LigandInstance, total_grad, total_torque, tors_grad, euler_axes) -> np.ndarray:
    g = np.empty(inst.dim)
    g[:3] = total_grad
    g[3:6] = euler_axes @ total_torque
    g[6:] = tors_grad
    return g


def score_reference(inst: LigandInstance, g: Genotype | np.ndarray) -> ScoreResult:
    """Energy and gradient summed in float64 without any block reduction."""
    vec = g.as_array() if isinstance(g, Genotype) else np.asarray(g, dtype=np.float64)
    rec, tors_grad, euler_axes = atom_partials(inst, vec)
    tot = rec.sum(axis=0)
    grad = _assemble_gradient(inst, tot[1:4], tot[4:7], tors_grad, euler_axes)
    return ScoreResult(float(tot[0]), grad, tot[4:7].copy(), SyncStats())


def check_partition(method: str, partition: int) -> None:
    low = MIN_TCU_BLOCK if method == TCU else WARP
    if method not in (BASELINE, TCU):
        raise ValueError(f"unknown method {method!r}")
    if partition % WARP or not low <= partition <= MAX_BLOCK:
        raise UnsupportedBlockSize(
            f"{method} scoring needs a multiple of 32 in [{low}, {MAX_BLOCK}] threads, got {partition}"
        )


def thread_partials(rec: np.ndarray, partition: int) -> np.ndarray:
    """Deal atom records round-robin to threads; each thread sums its share in float32."""
    n = len(rec)
    rounds = -(-n // partition)
    padded = np.zeros((rounds * partition, rec.shape[1]), dtype=np.float32)
    padded[:n] = rec.astype(np.float32)
    per_round = padded.reshape(rounds, partition, rec.shape[1])
    acc = per_round[0].copy()
    for r in range(1, rounds):
        acc = acc + per_round[r]
    return acc


def score(inst: LigandInstance, g: Genotype | np.ndarray, method: str = BASELINE,
          accum_mode: str = SINGLE, partition: int = 64) -> ScoreResult:
    """Evaluate energy and gradient with the block reduction of ``method``."""
    check_partition(method, partition)
    vec = g.as_array() if isinstance(g, Genotype) else np.asarray(g, dtype=np.float64)
    rec, tors_grad, euler_axes = atom_partials(inst, vec)
    totals, stats = reduce7(thread_partials(rec, partition), method, accum_mode)
    grad = _assemble_gradient(inst, totals[1:4], totals[4:7], tors_grad, euler_axes)
    return ScoreResult(float(totals[0]), grad, totals[4:7].copy(), stats)
