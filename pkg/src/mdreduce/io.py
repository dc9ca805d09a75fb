"""Instance files, result CSV, and seeded random streams.

Instance format (UTF-8, one record per line, ``#`` starts a comment)::

    MDRI 1
    nrot 1
    atom  1.0 0.0 0.0  1.0  -
    atom  2.0 0.5 0.0  1.0  0
    site  4.0 0.0 0.0  1.5  1.2

``atom x y z weight torsion`` (torsion index or ``-``) and
``site x y z depth d0``. The magic line must come first.
"""

from __future__ import annotations

import csv
import io
from dataclasses import asdict, dataclass, fields
from importlib import resources

import numpy as np

from .docking.model import LigandInstance
from .errors import InstanceParseError
from .rng import derive_rng  # noqa: F401  re-exported

MAGIC = "MDRI"
VERSION = "1"
BUNDLED = ("S1", "S2", "S3")


def parse_instance(text: str, name: str = "") -> LigandInstance:
    atoms, weights, tors, atom_lines = [], [], [], []
    sites, depths, d0s = [], [], []
    nrot = None
    saw_magic = False
    last = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        last = lineno
        tok = line.split()
        if not saw_magic:
            if tok != [MAGIC, VERSION]:
                raise InstanceParseError(lineno, f"expected header '{MAGIC} {VERSION}', got {line!r}")
            saw_magic = True
            continue
        kind = tok[0]
        try:
            if kind == "nrot":
                if len(tok) != 2:
                    raise ValueError("nrot takes one integer")
                if nrot is not None:
                    raise ValueError("nrot given twice")
                nrot = int(tok[1])
                if nrot < 0:
                    raise ValueError("nrot must be >= 0")
            elif kind == "atom":
                if len(tok) != 6:
                    raise ValueError("atom needs x y z weight torsion")
                atoms.append([float(t) for t in tok[1:4]])
                weights.append(float(tok[4]))
                tors.append(-1 if tok[5] == "-" else int(tok[5]))
                atom_lines.append(lineno)
            elif kind == "site":
                if len(tok) != 6:
                    raise ValueError("site needs x y z depth d0")
                vals = [float(t) for t in tok[1:]]
                if vals[4] <= 0:
                    raise ValueError("d0 must be positive")
                sites.append(vals[:3])
                depths.append(vals[3])
                d0s.append(vals[4])
            else:
                raise ValueError(f"unknown record {kind!r}")
        except ValueError as exc:
            raise InstanceParseError(lineno, str(exc)) from None
    if not saw_magic:
        raise InstanceParseError(1, f"missing '{MAGIC} {VERSION}' header")
    nrot = 0 if nrot is None else nrot
    for t, lineno in zip(tors, atom_lines):
        if t < -1 or t >= nrot:
            raise InstanceParseError(lineno, f"atom references torsion {t} but nrot is {nrot}")
    if not atoms:
        raise InstanceParseError(last + 1, "no atom records")
    if not sites:
        raise InstanceParseError(last + 1, "no site records")
    try:
        return LigandInstance(
            np.array(atoms), np.array(weights), np.array(tors, dtype=np.int64),
            np.array(sites), np.array(depths), np.array(d0s), nrot, name,
        )
    except ValueError as exc:
        raise InstanceParseError(last, str(exc)) from None


def serialize_instance(inst: LigandInstance) -> str:
    out = [f"{MAGIC} {VERSION}"]
    if inst.name:
        out.append(f"# {inst.name}")
    out.append(f"nrot {inst.nrot}")
    for xyz, w, t in zip(inst.atom_xyz, inst.atom_weight, inst.atom_torsion):
        tt = "-" if t < 0 else str(int(t))
        out.append("atom " + " ".join(repr(float(v)) for v in (*xyz, w)) + f" {tt}")
    for xyz, dep, d0 in zip(inst.site_xyz, inst.site_depth, inst.site_d0):
        out.append("site " + " ".join(repr(float(v)) for v in (*xyz, dep, d0)))
    return "\n".join(out) + "\n"


def load_instance(path) -> LigandInstance:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_instance(text, name=str(path))


def bundled_instance(name: str) -> LigandInstance:
    if name not in BUNDLED:
        raise KeyError(f"no bundled instance {name!r}; have {BUNDLED}")
    text = resources.files("mdreduce").joinpath("data").joinpath(f"{name}.mdri").read_text(encoding="utf-8")
    return parse_instance(text, name=name)


def resolve_instance(spec: str) -> LigandInstance:
    """A bundled name (S1, S2, S3) or a file path."""
    if spec in BUNDLED:
        return bundled_instance(spec)
    return load_instance(spec)


@dataclass(frozen=True)
class ResultRow:
    seed: int
    method: str
    accum_mode: str
    instance: str
    best_energy: float
    evaluations: int
    converged: bool
    block_syncs: int
    atomic_adds: int
    mma_ops: int


RESULT_COLUMNS = tuple(f.name for f in fields(ResultRow))


def write_results(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=RESULT_COLUMNS, lineterminator="\r\n")
    w.writeheader()
    for r in rows:
        d = asdict(r)
        d["best_energy"] = repr(float(d["best_energy"]))
        d["converged"] = "true" if d["converged"] else "false"
        w.writerow(d)
    return buf.getvalue()


def read_results(text: str) -> list[ResultRow]:
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != RESULT_COLUMNS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}")
    rows = []
    for d in reader:
        rows.append(ResultRow(
            seed=int(d["seed"]), method=d["method"], accum_mode=d["accum_mode"],
            instance=d["instance"], best_energy=float(d["best_energy"]),
            evaluations=int(d["evaluations"]), converged=d["converged"] == "true",
            block_syncs=int(d["block_syncs"]), atomic_adds=int(d["atomic_adds"]),
            mma_ops=int(d["mma_ops"]),
        ))
    return rows
