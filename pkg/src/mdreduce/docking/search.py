"""Local search (ADADELTA) and a small Lamarckian genetic algorithm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..mma import SINGLE
from ..reduction import BASELINE, SyncStats
from ..rng import derive_rng
from .adadelta import adadelta_update
from .model import (
    AdadeltaState,
    DockResult,
    GenerationRecord,
    Genotype,
    LigandInstance,
    angular_mask,
    wrap_angle,
)
from .scoring import check_partition, score

WINDOW = 16


@dataclass
class LocalSearchResult:
    genotype: Genotype
    energy: float
    iterations: int
    converged: bool
    stats: SyncStats = field(default_factory=SyncStats)
    trace: list[float] = field(default_factory=list)


def _local_search_vec(inst, vec, max_iters, tol, method, accum_mode, partition, rho, eps):
    state = AdadeltaState.fresh(inst.dim, rho, eps)
    stats = SyncStats()
    best, best_vec = math.inf, vec
    trace: list[float] = []
    converged = False
    it = 0
    while it < max_iters:
        it += 1
        r = score(inst, vec, method, accum_mode, partition)
        stats += r.reduce_stats
        if r.energy < best:
            best, best_vec = r.energy, vec
        trace.append(best)
        if it > WINDOW and trace[-1 - WINDOW] - best < tol:
            converged = True
            break
        if it < max_iters:
            vec = adadelta_update(state, vec, r.gradient)
    return best_vec, best, it, converged, stats, trace


def local_search(inst: LigandInstance, start: Genotype, max_iters: int = 300, convergence_tol: float = 1e-4,
                 method: str = BASELINE, accum_mode: str = SINGLE, partition: int = 64,
                 rho: float = 0.95, epsilon: float = 1e-6) -> LocalSearchResult:
    """Minimise the score from ``start`` with ADADELTA.

    Stops once the running best energy improved by less than
    ``convergence_tol`` over the last 16 iterations (converged), or after
    ``max_iters`` score evaluations (not converged). The returned genotype is
    the best one evaluated, so the energy never exceeds the start's.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    check_partition(method, partition)
    vec, e, it, conv, stats, trace = _local_search_vec(
        inst, start.as_array(), max_iters, convergence_tol, method, accum_mode, partition, rho, epsilon
    )
    return LocalSearchResult(Genotype.from_array(vec), e, it, conv, stats, trace)


@dataclass(frozen=True)
class LgaSettings:
    population_size: int = 16
    max_generations: int = 12
    max_evaluations: int = 1200
    ls_fraction: float = 0.25
    ls_max_iters: int = 60
    ls_tol: float = 1e-3
    crossover_rate: float = 0.8
    mutation_rate: float = 0.15
    sigma_translation: float = 0.5
    sigma_angle: float = 0.4
    stall_generations: int = 4
    stall_tol: float = 1e-3
    init_half_width: float = 4.0
    partition: int = 64
    # AutoDock-GPU's ADADELTA constants; Zeiler's (0.95, 1e-6) take ~1e-3 first
    # steps, which a 60-iteration search barely moves from
    rho: float = 0.8
    epsilon: float = 0.01

    def __post_init__(self):
        if self.population_size < 2:
            raise ValueError("population_size must be >= 2")
        if self.max_generations < 1 or self.max_evaluations < 1:
            raise ValueError("max_generations and max_evaluations must be >= 1")
        if not 0.0 <= self.ls_fraction <= 1.0:
            raise ValueError("ls_fraction must be in [0, 1]")


class _Budget:
    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    @property
    def left(self) -> int:
        return self.limit - self.used


def _initial_population(inst: LigandInstance, s: LgaSettings, rng: np.random.Generator) -> np.ndarray:
    """Translations uniform in a cube around the site centroid, angles uniform."""
    centre = inst.site_xyz.mean(axis=0)
    pos = rng.uniform(centre - s.init_half_width, centre + s.init_half_width, size=(s.population_size, 3))
    ang = rng.uniform(-math.pi, math.pi, size=(s.population_size, 3 + inst.nrot))
    return np.hstack([pos, ang])


def _make_offspring(pop: np.ndarray, energy: np.ndarray, count: int, s: LgaSettings,
                    rng: np.random.Generator) -> np.ndarray:
    """Tournament selection, arithmetic crossover, Gaussian mutation.

    The number of random draws is fixed per child, so two runs with the same
    seed consume their streams identically even when energies differ.
    """
    n, dim = pop.shape
    ang = angular_mask(dim)
    sigma = np.where(ang, s.sigma_angle, s.sigma_translation)
    kids = np.empty((count, dim))
    for c in range(count):
        i = rng.integers(0, n, size=4)
        p1 = i[0] if energy[i[0]] <= energy[i[1]] else i[1]
        p2 = i[2] if energy[i[2]] <= energy[i[3]] else i[3]
        do_cross, lam = rng.random(2)
        noise = rng.normal(size=dim) * sigma
        mutate = rng.random(dim) < s.mutation_rate
        a, b = pop[p1], pop[p2]
        if do_cross < s.crossover_rate:
            step = b - a
            step[ang] = wrap_angle(step[ang])  # interpolate along the short arc
            child = a + lam * step
        else:
            child = a.copy()
        child = child + np.where(mutate, noise, 0.0)
        child[ang] = wrap_angle(child[ang])
        kids[c] = child
    return kids


def lga_run(inst: LigandInstance, settings: LgaSettings = LgaSettings(), method: str = BASELINE,
            accum_mode: str = SINGLE, rng_seed: int = 0, initial_population=None) -> DockResult:
    """One LGA run.

    Generation 1 is the seeded random population (or ``initial_population``);
    each later generation keeps the best individual and breeds the rest. In
    every generation the best ``ls_fraction`` of the new individuals get a
    local search whose result replaces them. The run counts as converged when
    the best energy stops improving by ``stall_tol`` for ``stall_generations``
    generations; hitting the generation or evaluation cap first does not.
    """
    s = settings
    check_partition(method, s.partition)
    rng_init = derive_rng(rng_seed, "lga/init")
    rng_ops = derive_rng(rng_seed, "lga/ops")
    budget = _Budget(s.max_evaluations)
    stats = SyncStats()
    records: list[GenerationRecord] = []
    ls_runs = ls_conv = 0

    if initial_population is not None:
        pop = np.array([g.as_array() if isinstance(g, Genotype) else np.asarray(g, float) for g in initial_population])
        if len(pop) < 2 or pop.shape[1] != inst.dim:
            raise ValueError("initial population needs >= 2 genotypes of the instance's dimension")
    else:
        pop = _initial_population(inst, s, rng_init)

    def evaluate(batch: np.ndarray) -> np.ndarray:
        nonlocal stats
        out = np.full(len(batch), np.inf)
        for i, v in enumerate(batch):
            if budget.left <= 0:
                break
            r = score(inst, v, method, accum_mode, s.partition)
            budget.used += 1
            stats += r.reduce_stats
            out[i] = r.energy
        return out

    def improve(batch: np.ndarray, energy: np.ndarray) -> tuple[int, int]:
        nonlocal stats
        n_ls = math.ceil(s.ls_fraction * len(batch))
        done = conv = 0
        for i in np.argsort(energy, kind="stable")[:n_ls]:
            if budget.left <= 0 or not np.isfinite(energy[i]):
                break
            vec, e, it, c, st, _ = _local_search_vec(
                inst, batch[i], min(s.ls_max_iters, budget.left), s.ls_tol,
                method, accum_mode, s.partition, s.rho, s.epsilon,
            )
            budget.used += it
            stats += st
            batch[i], energy[i] = vec, e
            done += 1
            conv += c
        return done, conv

    energy = evaluate(pop)
    d, c = improve(pop, energy)
    ls_runs, ls_conv = ls_runs + d, ls_conv + c
    records.append(GenerationRecord(1, float(energy.min()), float(np.mean(energy[np.isfinite(energy)])),
                                    budget.used, d, c))
    converged = False
    gen = 1
    while gen < s.max_generations and budget.left > 0:
        gen += 1
        elite = int(np.argmin(energy))
        kids = _make_offspring(pop, energy, len(pop) - 1, s, rng_ops)
        kid_e = evaluate(kids)
        d, c = improve(kids, kid_e)
        ls_runs, ls_conv = ls_runs + d, ls_conv + c
        pop = np.vstack([pop[elite:elite + 1], kids])
        energy = np.concatenate([energy[elite:elite + 1], kid_e])
        finite = energy[np.isfinite(energy)]
        records.append(GenerationRecord(gen, float(energy.min()), float(finite.mean()), budget.used, d, c))
        k = s.stall_generations
        if len(records) > k and records[-1 - k].best_energy - records[-1].best_energy < s.stall_tol:
            converged = True
            break

    best = int(np.argmin(energy))
    return DockResult(
        best_energy=float(energy[best]),
        best_genotype=Genotype.from_array(pop[best]),
        evaluations=budget.used,
        converged=converged,
        generations=records,
        stats=stats,
        ls_runs=ls_runs,
        ls_converged=ls_conv,
    )
