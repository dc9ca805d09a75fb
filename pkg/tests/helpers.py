import numpy as np

from mdreduce.docking.model import LigandInstance
from mdreduce.docking.scoring import place_atoms


def random_instance(rng, n_atoms=10, nrot=3, n_sites=6, d0=(1.5, 3.0), name="random"):
    """Chain-like ligand with tail torsion groups and sites scattered around it."""
    steps = rng.normal(size=(n_atoms, 3))
    steps *= 1.5 / np.linalg.norm(steps, axis=1, keepdims=True)
    atoms = np.cumsum(steps, axis=0)
    atoms -= atoms.mean(axis=0)
    # keep pivots off the origin
    atoms[np.linalg.norm(atoms, axis=1) < 0.2] += 0.5
    tors = -np.ones(n_atoms, dtype=int)
    if nrot:
        starts = np.linspace(1, n_atoms - 1, nrot + 1).astype(int)[:-1]
        for k, s in enumerate(starts):
            tors[s:starts[k + 1] if k + 1 < nrot else n_atoms] = k
    sites = rng.uniform(-5, 5, (n_sites, 3))
    return LigandInstance(atoms, rng.uniform(0.5, 1.5, n_atoms), tors, sites,
                          rng.uniform(0.5, 1.5, n_sites), rng.uniform(*d0, n_sites), nrot, name)


def random_vec(rng, inst, spread=2.0):
    return np.concatenate([rng.uniform(-spread, spread, 3), rng.uniform(-np.pi, np.pi, 3 + inst.nrot)])


def clear_of_sites(inst, vec, frac=0.8):
    """No atom sits inside frac * d0 of any site (outside the stiff repulsive core)."""
    world = place_atoms(inst, vec)
    d = np.linalg.norm(world[:, None] - inst.site_xyz[None], axis=2)
    return bool(np.all(d > frac * inst.site_d0[None]))


def central_difference(f, vec, h):
    g = np.empty(len(vec))
    for i in range(len(vec)):
        e = np.zeros(len(vec))
        e[i] = h
        g[i] = (f(vec + e) - f(vec - e)) / (2 * h)
    return g
