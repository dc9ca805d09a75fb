"""``mdreduce`` command line: reduce-bench, validate, dock, sweep.

Exit codes: 0 ok, 1 threshold violated, 2 usage error, 3 I/O or parse error.
Every report starts with ``#`` lines giving the version, seed and full
configuration. ``MDREDUCE_SEED`` sets the default seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import asdict, replace

import numpy as np

from . import __version__
from .errors import InstanceParseError, SizeError
from .mma import ACCUM_MODES, HALF, SINGLE
from .reduction import BASELINE, METHODS, TCU, reduce7
from .rng import derive_rng
from .simblock import DEFAULT_WEIGHTS, SWEEP_SIZES, BlockConfig, CostWeights, estimate_cost, scaling_sweep

EXIT_OK, EXIT_THRESHOLD, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
SEED_ENV = "MDREDUCE_SEED"
STAT_COLUMNS = ("block_syncs", "warp_shuffles", "atomic_adds", "memory_fences", "mma_ops")


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- formatting

def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render_table(rows: list[dict], fmt: str) -> str:
    if not rows:
        return ""
    cols = list(rows[0])
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in cols])
        return buf.getvalue()
    lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    lines += ["| " + " | ".join(_fmt(r[c]) for c in cols) + " |" for r in rows]
    return "\n".join(lines) + "\n"


def render_header(command: str, seed, config: dict) -> str:
    return (
        f"# mdreduce {__version__} {command}\n"
        f"# seed: {seed}\n"
        f"# config: {json.dumps(config, sort_keys=True, default=str)}\n"
    )


def _section(title: str) -> str:
    return f"\n# {title}\n"


def _emit(text: str, output) -> None:
    if output:
        try:
            with open(output, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {output}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- argument helpers

def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _choice_list(choices):
    def parse(text: str) -> list[str]:
        items = [t.strip() for t in text.split(",") if t.strip()]
        bad = [t for t in items if t not in choices]
        if bad or not items:
            raise argparse.ArgumentTypeError(f"choose from {', '.join(choices)}; got {text!r}")
        return items
    return parse


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def _seed(args) -> int:
    return args.seed if args.seed is not None else default_seed()


def _instance(spec: str):
    from .io import resolve_instance

    try:
        return resolve_instance(spec)
    except InstanceParseError as exc:
        raise InstanceParseError(exc.line, f"{exc.message} (in {spec})") from None
    except FileNotFoundError:
        raise OSError(f"instance file not found: {spec}") from None
    except IsADirectoryError:
        raise OSError(f"instance path is a directory: {spec}") from None


def _lga_settings(args):
    from .docking.search import LgaSettings

    fields = {
        "population_size": args.population,
        "max_generations": args.generations,
        "max_evaluations": args.evaluations,
        "ls_fraction": args.ls_fraction,
        "partition": args.partition,
    }
    try:
        return replace(LgaSettings(), **{k: v for k, v in fields.items() if v is not None})
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _check_partition(method: str, partition: int) -> None:
    from .docking.scoring import check_partition

    try:
        check_partition(method, partition)
    except SizeError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------- subcommands

def cmd_reduce_bench(args) -> int:
    seed = _seed(args)
    for n in args.sizes:
        for m in args.methods:
            try:
                BlockConfig(n, m, args.accum_mode)
            except SizeError as exc:
                raise UsageError(str(exc)) from None
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    rows = []
    for n in args.sizes:
        partials = derive_rng(seed, f"bench/{n}").uniform(-1.0, 1.0, size=(n, 7)).astype(np.float32)
        for m in args.methods:
            acc = args.accum_mode if m == TCU else SINGLE
            reduce7(partials, m, acc)  # warm-up, excluded from timing
            t0 = time.perf_counter()
            for _ in range(args.trials):
                totals, stats = reduce7(partials, m, acc)
            wall = (time.perf_counter() - t0) / args.trials
            row = {"threads_per_block": n, "method": m, "accum_mode": acc, "dims": 7,
                   "emulated_wall_us": round(wall * 1e6, 3)}
            row.update({c: getattr(stats, c) for c in STAT_COLUMNS})
            row["cost"] = estimate_cost(stats)
            row["energy_total"] = float(totals[0])
            rows.append(row)
    config = {"sizes": args.sizes, "methods": args.methods, "accum_mode": args.accum_mode, "trials": args.trials}
    _emit(render_header("reduce-bench", seed, config) + render_table(rows, args.format), args.output)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .docking.validate import validate_pair

    seed = _seed(args)
    if args.runs < 1:
        raise UsageError("--runs must be >= 1")
    if args.threshold < 0:
        raise UsageError("--threshold must be >= 0")
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    settings = _lga_settings(args)
    for m in (args.method, args.reference_method):
        _check_partition(m, settings.partition)
    inst = _instance(args.instance)
    method = (args.method, args.accum_mode)
    reference = (args.reference_method, args.reference_accum_mode)
    t0 = time.perf_counter()
    rep = validate_pair(inst, args.runs, settings=settings, method=method, reference=reference,
                        base_seed=seed, workers=args.workers)
    wall = time.perf_counter() - t0
    passed = rep.relative_error < args.threshold

    def path_row(label, path, summ, nonconv, ls_nonconv):
        return {"path": label, "method": path[0], "accum_mode": path[1], **asdict(summ),
                "nonconvergent_runs": nonconv, "nonconvergent_local_searches": ls_nonconv}

    summary = [
        path_row("method", method, rep.summary, rep.nonconvergent, rep.ls_nonconvergent),
        path_row("reference", reference, rep.reference_summary, rep.reference_nonconvergent,
                 rep.reference_ls_nonconvergent),
    ]
    comparison = [
        {"metric": "abs_diff_" + k, "value": v} for k, v in asdict(rep.abs_diff).items()
    ] + [
        {"metric": "relative_error", "value": rep.relative_error},
        {"metric": "threshold", "value": args.threshold},
        {"metric": "passed", "value": passed},
        {"metric": "emulated_wall_s", "value": round(wall, 3)},
    ]
    config = {"instance": args.instance, "runs": args.runs, "method": method, "reference": reference,
              "threshold": args.threshold, "settings": asdict(settings), "workers": args.workers}
    text = render_header("validate", seed, config)
    text += _section("summary of best energies") + render_table(summary, args.format)
    text += _section("paired comparison") + render_table(comparison, args.format)
    if args.per_run:
        text += _section("runs") + render_table([asdict(r) for r in rep.rows], args.format)
    _emit(text, args.output)
    return EXIT_OK if passed else EXIT_THRESHOLD


def cmd_dock(args) -> int:
    from .docking.search import lga_run
    from .io import ResultRow, write_results

    seed = _seed(args)
    settings = _lga_settings(args)
    _check_partition(args.method, settings.partition)
    inst = _instance(args.instance)
    acc = args.accum_mode
    t0 = time.perf_counter()
    r = lga_run(inst, settings, args.method, acc, seed)
    wall = time.perf_counter() - t0
    info = {"best_energy": r.best_energy, "evaluations": r.evaluations, "converged": r.converged,
            "generations": len(r.generations), "ls_runs": r.ls_runs, "ls_converged": r.ls_converged,
            "emulated_wall_s": round(wall, 3)}
    info.update({c: getattr(r.stats, c) for c in STAT_COLUMNS})
    info["best_genotype"] = " ".join(f"{v:.6g}" for v in r.best_genotype.as_array())
    row = ResultRow(seed, args.method, acc, inst.name, r.best_energy, r.evaluations, r.converged,
                    r.stats.block_syncs, r.stats.atomic_adds, r.stats.mma_ops)
    config = {"instance": args.instance, "method": args.method, "accum_mode": acc, "settings": asdict(settings)}
    text = render_header("dock", seed, config)
    text += _section("result") + render_table([{"field": k, "value": v} for k, v in info.items()], args.format)
    text += _section("row") + write_results([row]).replace("\r\n", "\n")
    _emit(text, args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    w = {k: getattr(args, "w_" + k) for k in asdict(DEFAULT_WEIGHTS)}
    try:
        weights = CostWeights(**{k: v for k, v in w.items() if v is not None})
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        table = scaling_sweep(args.sizes, weights, args.accum_mode)
    except SizeError as exc:
        raise UsageError(str(exc)) from None
    rows = []
    for t in table:
        row = {"threads_per_block": t.threads_per_block}
        for label, st in (("baseline", t.baseline), ("tcu", t.tcu)):
            row.update({f"{label}_{c}": getattr(st, c) for c in STAT_COLUMNS})
        row.update({"baseline_cost": t.baseline_cost, "tcu_cost": t.tcu_cost, "cost_ratio": t.cost_ratio,
                    "ratio_undefined": t.degenerate})
        rows.append(row)
    config = {"sizes": list(args.sizes), "weights": asdict(weights), "accum_mode": args.accum_mode}
    _emit(render_header("sweep", "n/a", config) + render_table(rows, args.format), args.output)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p.add_argument("--output", "-o", help="write the report here instead of stdout")


def _seeded(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV} or 0")


def _lga_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("search settings")
    g.add_argument("--population", type=int)
    g.add_argument("--generations", type=int)
    g.add_argument("--evaluations", type=int)
    g.add_argument("--ls-fraction", type=float)
    g.add_argument("--partition", type=int, help="simulated threads per scoring block")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mdreduce", description="Emulated tensor-unit block reductions for docking.")
    ap.add_argument("--version", action="version", version=f"mdreduce {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce-bench", help="time and count the seven-variable block reduction")
    p.add_argument("--sizes", type=_int_list, default=list(SWEEP_SIZES))
    p.add_argument("--methods", type=_choice_list(METHODS), default=list(METHODS))
    p.add_argument("--accum-mode", choices=ACCUM_MODES, default=HALF, help="tcu accumulator (baseline is float32)")
    p.add_argument("--trials", type=int, default=100)
    _seeded(p)
    _common(p)
    p.set_defaults(func=cmd_reduce_bench)

    p = sub.add_parser("validate", help="paired-seed precision comparison of two reduction paths")
    p.add_argument("instance", help="bundled name (S1, S2, S3) or instance file")
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--threshold", type=float, default=0.002, help="max relative error of mean best energy")
    p.add_argument("--method", choices=METHODS, default=TCU)
    p.add_argument("--accum-mode", choices=ACCUM_MODES, default=HALF)
    p.add_argument("--reference-method", choices=METHODS, default=BASELINE)
    p.add_argument("--reference-accum-mode", choices=ACCUM_MODES, default=SINGLE)
    p.add_argument("--workers", type=int, default=1, help="processes for independent seed pairs")
    p.add_argument("--per-run", action="store_true", help="append one row per run")
    _lga_flags(p)
    _seeded(p)
    _common(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("dock", help="one seeded LGA run")
    p.add_argument("instance", help="bundled name (S1, S2, S3) or instance file")
    p.add_argument("--method", choices=METHODS, default=TCU)
    p.add_argument("--accum-mode", choices=ACCUM_MODES, default=HALF)
    _lga_flags(p)
    _seeded(p)
    _common(p)
    p.set_defaults(func=cmd_dock)

    p = sub.add_parser("sweep", help="cost-model comparison across block sizes")
    p.add_argument("--sizes", type=_int_list, default=list(SWEEP_SIZES))
    p.add_argument("--accum-mode", choices=ACCUM_MODES, default=HALF)
    for k in asdict(DEFAULT_WEIGHTS):
        p.add_argument(f"--w-{k.replace('_', '-')}", dest=f"w_{k}", type=float, help=f"cost weight (default {getattr(DEFAULT_WEIGHTS, k)})")
    _common(p)
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed the message
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"mdreduce {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceParseError, OSError) as exc:
        print(f"mdreduce {args.command}: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
