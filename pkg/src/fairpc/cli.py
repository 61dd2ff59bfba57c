"""Command-line entry point: ``fairpc fit | losses | gap``.

Exit status is 0 on success, 2 on input problems and 3 on solver failures;
error messages go to stderr. All JSON outputs are deterministic; wall-clock
timings are kept apart in ``timings.json``.
"""

import argparse
import os
import sys
import time
from dataclasses import asdict

import numpy as np

from . import kernels
from .core import GramSet, build_gram_set
from .errors import InputError, SolverError
from .io import IngestConfig, SCHEMA_VERSION, dumps, ingest, write_csv, write_json
from .metrics import build_loss_report
from .oracle import grid_oracle_2d, random_oracle
from .orthonormalization import fit
from .solvers import SOLVER_CHOICES, SolverConfig

EXIT_OK, EXIT_INPUT, EXIT_SOLVER = 0, 2, 3

LOSS_COLUMNS = ("method", "group", "rank", "marginal", "incremental", "reconstruction",
                "duality_gap")
GAP_COLUMNS = ("rank", "primal", "dual", "gap")


def _split(text):
    return tuple(c.strip() for c in text.split(",") if c.strip()) if text else ()


def _add_common(p):
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--group-col", required=True, help="column holding the group label")
    p.add_argument("--rank", type=int, required=True, help="target rank D")
    p.add_argument("--drop", default="", help="comma-separated columns to remove")
    p.add_argument("--solver", choices=SOLVER_CHOICES, default="auto")
    p.add_argument("--epsilon", type=float, default=1e-8, help="Frank-Wolfe step tolerance")
    p.add_argument("--max-iter", type=int, default=10000, help="Frank-Wolfe iteration cap")
    p.add_argument("--output", default=".", help="directory for the artifacts")
    p.add_argument("--seed", type=int, default=0,
                   help="recorded in the manifest; the fit itself is deterministic")
    p.add_argument("--no-standardize", action="store_true",
                   help="centre groups but do not rescale columns")
    p.add_argument("--no-center", action="store_true", help="skip group-wise centring")
    p.add_argument("--no-polish", action="store_true",
                   help="return the raw Frank-Wolfe eigenvector without primal refinement")


def build_parser():
    parser = argparse.ArgumentParser(prog="fairpc", description="Fair principal components.")
    sub = parser.add_subparsers(dest="command", metavar="{fit,losses,gap}")
    sub.required = True

    p = sub.add_parser("fit", help="fit a fair basis and write components")
    _add_common(p)
    p.add_argument("--format", choices=("json", "csv"), default="json")

    p = sub.add_parser("losses", help="per-group losses at every rank")
    _add_common(p)
    p.add_argument("--baseline", action="store_true", help="also report standard PCA")

    p = sub.add_parser("gap", help="primal, dual and gap at every rank")
    _add_common(p)

    # regenerates pinned test references; not part of the documented surface
    p = sub.add_parser("oracle")
    p.add_argument("--instance", choices=("rotated", "three-group"), default=None)
    p.add_argument("--input")
    p.add_argument("--group-col")
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--refine-iters", type=int, default=200)
    p.add_argument("--seed", type=int, default=42)
    return parser


def _solver_config(args):
    return SolverConfig(epsilon_fw=args.epsilon, max_iter_fw=args.max_iter,
                        solver_choice=args.solver, polish_primal=not args.no_polish)


def _prepare(args):
    """Ingest and build Grams; returns ``(dataset, manifest, gram_set, config)``."""
    config = _solver_config(args)
    icfg = IngestConfig(args.group_col, _split(args.drop), standardize=not args.no_standardize,
                        center=not args.no_center)
    t0 = time.perf_counter()
    dataset, manifest = ingest(args.input, icfg)
    t1 = time.perf_counter()
    gs = build_gram_set(dataset, method=config.eig_method)
    t2 = time.perf_counter()
    manifest.solver_config = asdict(config)
    manifest.seed = args.seed
    manifest.timings.update(ingest=t1 - t0, gram=t2 - t1)
    os.makedirs(args.output, exist_ok=True)
    return dataset, manifest, gs, config


def _finish(args, manifest, extra=None):
    write_json(os.path.join(args.output, "manifest.json"), manifest.to_dict())
    timings = {"schema_version": SCHEMA_VERSION, "backend": kernels.BACKEND,
               "stages": manifest.timings}
    if extra:
        timings.update(extra)
    write_json(os.path.join(args.output, "timings.json"), timings)


def _iteration_record(r, res):
    return {"rank": r, "mu": res.mu.mu, "primal": res.primal_value, "dual": res.dual_value,
            "gap": res.duality_gap, "h": res.h, "iterations": res.iterations,
            "converged": res.converged, "solver": res.solver.value, "notes": list(res.notes)}


def cmd_fit(args):
    dataset, manifest, gs, config = _prepare(args)
    stamps = []
    t0 = time.perf_counter()
    basis = fit(gs, args.rank, config, complete=True,
                on_iteration=lambda r, res: stamps.append(time.perf_counter()))
    t1 = time.perf_counter()
    manifest.timings["fit"] = t1 - t0
    per_iter = list(np.diff([t0] + stamps))

    names = list(dataset.feature_names)
    if args.format == "json":
        write_json(os.path.join(args.output, "components.json"),
                   {"schema_version": SCHEMA_VERSION, "feature_names": names,
                    "components": basis.components, "group_labels": list(dataset.labels)})
    else:
        rows = [[j + 1] + list(c) for j, c in enumerate(basis.components)]
        write_csv(os.path.join(args.output, "components.csv"), ["component"] + names, rows)
    diag = {"schema_version": SCHEMA_VERSION, "group_labels": list(dataset.labels),
            "rank_deficient": basis.rank_deficient,
            "per_iteration": [_iteration_record(r, res)
                              for r, res in enumerate(basis.per_iteration, 1)]}
    write_json(os.path.join(args.output, "diagnostics.json"), diag)
    manifest.timings["write"] = time.perf_counter() - t1
    _finish(args, manifest, {"per_iteration": per_iter})
    return EXIT_OK


def cmd_losses(args):
    dataset, manifest, gs, config = _prepare(args)
    t0 = time.perf_counter()
    fair, standard, _ = build_loss_report(dataset, args.rank, config, gram_set=gs)
    manifest.timings["losses"] = time.perf_counter() - t0
    rows = fair.rows() + (standard.rows() if args.baseline else [])
    write_csv(os.path.join(args.output, "losses.csv"), LOSS_COLUMNS, rows)
    _finish(args, manifest)
    return EXIT_OK


def cmd_gap(args):
    dataset, manifest, gs, config = _prepare(args)
    t0 = time.perf_counter()
    basis = fit(gs, args.rank, config, complete=True)
    manifest.timings["fit"] = time.perf_counter() - t0
    rows = [(r, res.primal_value, res.dual_value, res.duality_gap)
            for r, res in enumerate(basis.per_iteration, 1)]
    write_csv(os.path.join(args.output, "gaps.csv"), GAP_COLUMNS, rows)
    _finish(args, manifest)
    return EXIT_OK


BUILTIN = {
    "rotated": [[[2.0, 0.0], [0.0, 1.0]], [[1.5, 0.5], [0.5, 1.5]]],
    "three-group": [np.diag([2.0, 1.0, 0.0]), np.diag([0.0, 2.0, 1.0]),
                    np.diag([1.0, 0.0, 2.0])],
}


def cmd_oracle(args):
    if args.instance:
        gs = GramSet.from_grams(BUILTIN[args.instance])
    elif args.input and args.group_col:
        dataset, _ = ingest(args.input, IngestConfig(args.group_col))
        gs = build_gram_set(dataset)
    else:
        raise InputError("oracle needs --instance or --input with --group-col")
    out = {}
    if gs.n == 2:
        z, v = grid_oracle_2d(gs, args.steps)
        out["grid"] = {"steps": args.steps, "z": z, "v": v}
    z, v = random_oracle(gs, args.samples, args.refine_iters, args.seed)
    out["random"] = {"samples": args.samples, "seed": args.seed, "z": z, "v": v}
    sys.stdout.write(dumps(out))
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "losses": cmd_losses, "gap": cmd_gap, "oracle": cmd_oracle}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        kernels.apply_thread_cap()
        return COMMANDS[args.command](args)
    except (InputError, OSError) as exc:
        print(f"fairpc: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"fairpc: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
