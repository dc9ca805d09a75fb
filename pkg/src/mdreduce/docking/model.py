"""Data types for the docking workload."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..reduction import SyncStats

TWO_PI = 2.0 * math.pi


def wrap_angle(a):
    """Map angles into [-pi, pi)."""
    w = np.mod(np.asarray(a, dtype=np.float64) + math.pi, TWO_PI) - math.pi
    # mod can land exactly on 2*pi after rounding
    w = np.where(w >= math.pi, w - TWO_PI, w)
    return w


@dataclass(frozen=True)
class Genotype:
    """Ligand pose: translation, z-y-z Euler angles, torsion angles.

    Angles are stored wrapped into [-pi, pi).
    """

    x: float
    y: float
    z: float
    phi: float = 0.0
    theta: float = 0.0
    alpha: float = 0.0
    torsions: tuple[float, ...] = ()

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, float(getattr(self, name)))
        for name in ("phi", "theta", "alpha"):
            object.__setattr__(self, name, float(wrap_angle(getattr(self, name))))
        object.__setattr__(self, "torsions", tuple(float(t) for t in wrap_angle(list(self.torsions))))

    @property
    def nrot(self) -> int:
        return len(self.torsions)

    @property
    def dim(self) -> int:
        return 6 + len(self.torsions)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.phi, self.theta, self.alpha, *self.torsions])

    @classmethod
    def from_array(cls, v) -> "Genotype":
        v = np.asarray(v, dtype=np.float64)
        if v.ndim != 1 or len(v) < 6:
            raise ValueError(f"a genotype vector needs at least 6 entries, got shape {v.shape}")
        return cls(v[0], v[1], v[2], v[3], v[4], v[5], tuple(v[6:]))


def angular_mask(dim: int) -> np.ndarray:
    """True for genotype entries that are angles."""
    m = np.ones(dim, dtype=bool)
    m[:3] = False
    return m


@dataclass(frozen=True, eq=False)
class LigandInstance:
    """A ligand (atoms in its local frame) against a fixed set of receptor sites.

    ``atom_torsion[i]`` is the torsion that moves atom i, or -1. Torsion k
    turns its atoms about the line from the local origin through the first
    atom assigned to k (the pivot), so the pivot itself stays put.
    """

    atom_xyz: np.ndarray
    atom_weight: np.ndarray
    atom_torsion: np.ndarray
    site_xyz: np.ndarray
    site_depth: np.ndarray
    site_d0: np.ndarray
    nrot: int = 0
    name: str = ""
    torsion_axes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        atoms = np.asarray(self.atom_xyz, dtype=np.float64).reshape(-1, 3)
        sites = np.asarray(self.site_xyz, dtype=np.float64).reshape(-1, 3)
        tors = np.asarray(self.atom_torsion, dtype=np.int64).reshape(-1)
        object.__setattr__(self, "atom_xyz", atoms)
        object.__setattr__(self, "atom_weight", np.asarray(self.atom_weight, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "atom_torsion", tors)
        object.__setattr__(self, "site_xyz", sites)
        object.__setattr__(self, "site_depth", np.asarray(self.site_depth, dtype=np.float64).reshape(-1))
        object.__setattr__(self, "site_d0", np.asarray(self.site_d0, dtype=np.float64).reshape(-1))
        if len(atoms) < 1 or len(sites) < 1:
            raise ValueError("an instance needs at least one atom and one site")
        if not (len(self.atom_weight) == len(tors) == len(atoms)):
            raise ValueError("atom arrays differ in length")
        if not (len(self.site_depth) == len(self.site_d0) == len(sites)):
            raise ValueError("site arrays differ in length")
        if self.nrot < 0:
            raise ValueError("nrot must be >= 0")
        if np.any(tors >= self.nrot) or np.any(tors < -1):
            bad = int(np.flatnonzero((tors >= self.nrot) | (tors < -1))[0])
            raise ValueError(f"atom {bad} references torsion {tors[bad]} but nrot is {self.nrot}")
        if np.any(self.site_d0 <= 0):
            raise ValueError("site preferred distances must be positive")
        axes = np.tile([0.0, 0.0, 1.0], (self.nrot, 1))
        for k in range(self.nrot):
            members = np.flatnonzero(tors == k)
            if len(members) == 0:
                continue
            pivot = atoms[members[0]]
            norm = np.linalg.norm(pivot)
            if norm == 0.0:
                raise ValueError(f"torsion {k} pivot atom {members[0]} sits on the ligand origin")
            axes[k] = pivot / norm
        object.__setattr__(self, "torsion_axes", axes)

    @property
    def n_atoms(self) -> int:
        return len(self.atom_xyz)

    @property
    def n_sites(self) -> int:
        return len(self.site_xyz)

    @property
    def dim(self) -> int:
        return 6 + self.nrot

    def torsion_groups(self) -> dict[int, list[int]]:
        return {k: np.flatnonzero(self.atom_torsion == k).tolist() for k in range(self.nrot)}


@dataclass
class ScoreResult:
    energy: float
    gradient: np.ndarray
    torque: np.ndarray
    reduce_stats: SyncStats


@dataclass
class AdadeltaState:
    avg_sq_grad: np.ndarray
    avg_sq_update: np.ndarray
    rho: float = 0.95
    epsilon: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError(f"rho must be in (0, 1), got {self.rho}")
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")
        if np.any(self.avg_sq_grad < 0) or np.any(self.avg_sq_update < 0):
            raise ValueError("ADADELTA accumulators must be >= 0")

    @classmethod
    def fresh(cls, dim: int, rho: float = 0.95, epsilon: float = 1e-6) -> "AdadeltaState":
        return cls(np.zeros(dim), np.zeros(dim), rho, epsilon)


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    best_energy: float
    mean_energy: float
    evaluations: int
    ls_runs: int
    ls_converged: int


@dataclass
class DockResult:
    best_energy: float
    best_genotype: Genotype
    evaluations: int
    converged: bool
    generations: list[GenerationRecord]
    stats: SyncStats
    ls_runs: int = 0
    ls_converged: int = 0
