"""Paired-seed precision comparison between two reduction paths."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..io import ResultRow
from ..mma import HALF, SINGLE
from ..reduction import BASELINE, TCU
from .model import DockResult, LigandInstance
from .search import LgaSettings, lga_run


@dataclass(frozen=True)
class Summary:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    mean: float

    @classmethod
    def of(cls, values) -> "Summary":
        v = np.asarray(values, dtype=np.float64)
        q = np.quantile(v, [0.0, 0.25, 0.5, 0.75, 1.0])
        return cls(*(float(x) for x in q), float(v.mean()))


@dataclass
class ValidationReport:
    instance: str
    seeds: list[int]
    method: tuple[str, str]
    reference: tuple[str, str]
    rows: list[ResultRow] = field(repr=False)
    summary: Summary
    reference_summary: Summary
    abs_diff: Summary  # of |E_method - E_reference| per seed pair
    relative_error: float  # |mean(E_method) - mean(E_reference)| / |mean(E_reference)|
    nonconvergent: float  # share of method runs that hit a cap before converging
    reference_nonconvergent: float
    ls_nonconvergent: float  # same share over all local searches
    reference_ls_nonconvergent: float

    @property
    def n_runs(self) -> int:
        return len(self.seeds)


def _row(inst: LigandInstance, seed: int, method: str, accum_mode: str, r: DockResult) -> ResultRow:
    return ResultRow(seed, method, accum_mode, inst.name, r.best_energy, r.evaluations, r.converged,
                     r.stats.block_syncs, r.stats.atomic_adds, r.stats.mma_ops)


def _run_pair(args):
    inst, settings, seed, method, reference = args
    out = []
    for m, acc in (method, reference):
        r = lga_run(inst, settings, m, acc, seed)
        ls_bad = r.ls_runs - r.ls_converged
        out.append((_row(inst, seed, m, acc, r), ls_bad, r.ls_runs))
    return out


def _relative(a: float, ref: float) -> float:
    if a == ref:
        return 0.0
    return abs(a - ref) / abs(ref) if ref != 0.0 else math.inf


def validate_pair(inst: LigandInstance, n_runs: int = 100, seeds=None, settings: LgaSettings = LgaSettings(),
                  method: tuple[str, str] = (TCU, HALF), reference: tuple[str, str] = (BASELINE, SINGLE),
                  base_seed: int = 0, workers: int = 1) -> ValidationReport:
    """Run ``lga_run`` for both paths with the same seeds and compare best energies.

    Seeds default to ``base_seed .. base_seed + n_runs - 1``. With
    ``workers > 1`` seed pairs run in separate processes; the report is
    ordered by seed either way, so it does not depend on scheduling.
    """
    if seeds is None:
        if n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        seeds = range(base_seed, base_seed + n_runs)
    seeds = [int(s) for s in seeds]
    if not seeds:
        raise ValueError("need at least one seed")
    jobs = [(inst, settings, s, tuple(method), tuple(reference)) for s in seeds]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            pairs = list(pool.map(_run_pair, jobs))
    else:
        pairs = [_run_pair(j) for j in jobs]

    test = [p[0] for p in pairs]
    ref = [p[1] for p in pairs]
    e_t = np.array([r.best_energy for r, _, _ in test])
    e_r = np.array([r.best_energy for r, _, _ in ref])

    def ls_share(items):
        total = sum(n for _, _, n in items)
        return sum(b for _, b, _ in items) / total if total else 0.0

    return ValidationReport(
        instance=inst.name,
        seeds=seeds,
        method=tuple(method),
        reference=tuple(reference),
        rows=[row for pair in pairs for row, _, _ in pair],
        summary=Summary.of(e_t),
        reference_summary=Summary.of(e_r),
        abs_diff=Summary.of(np.abs(e_t - e_r)),
        relative_error=_relative(float(e_t.mean()), float(e_r.mean())),
        nonconvergent=float(np.mean([not r.converged for r, _, _ in test])),
        reference_nonconvergent=float(np.mean([not r.converged for r, _, _ in ref])),
        ls_nonconvergent=ls_share(test),
        reference_ls_nonconvergent=ls_share(ref),
    )
