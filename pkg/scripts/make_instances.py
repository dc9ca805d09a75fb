"""Regenerate the bundled synthetic instances S1, S2, S3.

Each ligand is a branched chain of atoms about 1.5 apart, centred on its
local origin. Torsion groups are tail segments of the chain. Receptor
sites sit on a jittered shell of radius 25 around a pocket centre, each
preferring a distance close to its own radius. The pocket is wide and
smooth, so a desk-sized search budget reaches the same basin from most
starts and paired runs differ by arithmetic rather than by luck.

    python scripts/make_instances.py src/mdreduce/data
"""

import sys
from pathlib import Path

import numpy as np

from mdreduce.docking.model import LigandInstance
from mdreduce.io import serialize_instance
from mdreduce.rng import derive_rng

SPECS = {
    # name: (atoms, nrot, sites)
    "S1": (8, 0, 16),
    "S2": (12, 3, 20),
    "S3": (20, 8, 24),
}
RADIUS = 25.0
JITTER = 0.6
DEPTH_TOTAL = 4.0


def chain(rng, n):
    pts = [np.zeros(3)]
    while len(pts) < n:
        base = pts[rng.integers(max(0, len(pts) - 3), len(pts))]
        step = rng.normal(size=3)
        cand = base + 1.5 * step / np.linalg.norm(step)
        if min(np.linalg.norm(cand - p) for p in pts) > 1.2:
            pts.append(cand)
    pts = np.array(pts)
    return pts - pts.mean(axis=0)


def shell_directions(n):
    """Roughly even unit vectors (Fibonacci sphere)."""
    i = np.arange(n) + 0.5
    polar = np.arccos(1.0 - 2.0 * i / n)
    azim = np.pi * (1.0 + 5.0**0.5) * i
    return np.column_stack([np.cos(azim) * np.sin(polar), np.sin(azim) * np.sin(polar), np.cos(polar)])


def build(name):
    n_atoms, nrot, n_sites = SPECS[name]
    rng = derive_rng(2024, f"instance/{name}")
    atoms = np.round(chain(rng, n_atoms), 3)
    tors = -np.ones(n_atoms, dtype=int)
    # tail segments, later torsions own fewer atoms; never the first atom
    if nrot:
        starts = np.linspace(2, n_atoms - 1, nrot + 1).astype(int)[:-1]
        for k, s in enumerate(starts):
            tors[s:starts[k + 1] if k + 1 < nrot else n_atoms] = k
    weights = np.round(rng.uniform(0.8, 1.2, n_atoms), 3)
    centre = rng.uniform(-3.0, 3.0, 3)
    sites = centre + RADIUS * shell_directions(n_sites) + JITTER * rng.normal(size=(n_sites, 3))
    d0 = np.linalg.norm(sites - centre, axis=1) * rng.uniform(0.95, 1.05, n_sites)
    depth = rng.uniform(0.7, 1.3, n_sites)
    depth *= DEPTH_TOTAL / depth.sum()
    return LigandInstance(atoms, weights, tors, np.round(sites, 3), np.round(depth, 4), np.round(d0, 3), nrot,
                          name=f"synthetic {name}")


if __name__ == "__main__":
    dest = Path(sys.argv[1] if len(sys.argv) > 1 else "src/mdreduce/data")
    dest.mkdir(parents=True, exist_ok=True)
    for name in SPECS:
        (dest / f"{name}.mdri").write_text(serialize_instance(build(name)), encoding="utf-8")
        print("wrote", dest / f"{name}.mdri")
