"""Command-line entry point: ``bigeo <command> [flags]``.

Exit codes: 0 success, 1 runtime or data failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from contextlib import contextmanager
from pathlib import Path

from bigeo import experiments as ex
from bigeo.io import load_manifest, write_csv, write_knee_fixture
from bigeo.knee import SyntheticKneeConfig, knee_regression, synthetic_knee_clouds
from bigeo.lie import BranchCutError
from bigeo.regression import SolverConfig

SEED_ENV = "BIGEO_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{SEED_ENV}={raw!r} is not an integer") from None


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _pos_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return v


def _nonneg_float(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _common(lam: float) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--lambda", dest="lam", type=_pos_float, default=lam, help=f"solver step size (default {lam})")
    p.add_argument("--max-iters", type=int, default=5000, help="iteration budget per fit (default 5000)")
    p.add_argument("--tol", type=_pos_float, default=1e-9, help="update-norm threshold (default 1e-9)")
    p.add_argument("--out", type=Path, default=None, help="output CSV path (default: stdout)")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bigeo", description="Bi-invariant geodesic regression experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth-equivariance", parents=[_common(0.1)],
                       help="fit(T_h data) vs T_h fit(data) deviations on synthetic SE(3) data")
    p.add_argument("--translations", type=_nonneg_int, default=20)
    p.add_argument("--translation-variance", type=_nonneg_float, default=1.0)
    p.add_argument("--estimator", choices=("biinvariant", "riemannian"), default="biinvariant")
    p.add_argument("--side", choices=("left", "right", "both"), default="both")

    p = sub.add_parser("r2-hist", parents=[_common(0.1)],
                       help="R^2 of Riemannian regression under random right translations")
    p.add_argument("--translations", type=_nonneg_int, default=100)
    p.add_argument("--translation-variance", type=_nonneg_float, default=100.0)

    p = sub.add_parser("knee", parents=[_common(0.01)], help="bi-invariant regression of knee frames over KL grade")
    p.add_argument("--manifest", type=Path, required=True, help="JSON manifest of femur/tibia vertex files")

    p = sub.add_parser("knee-fixture", help="write a synthetic knee dataset with implanted narrowing")
    p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default: ${SEED_ENV} or 0)")
    p.add_argument("--per-grade", type=int, default=10)
    p.add_argument("--vertices", type=int, default=200)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    return parser


@contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="\n") as fh:
            yield fh


def _sidecar(out, suffix, payload):
    text = json.dumps(payload, indent=1, sort_keys=True) + "\n"
    if out is None:
        sys.stderr.write(text)
    else:
        out.with_name(out.stem + suffix).write_text(text)


def _solver(args) -> SolverConfig:
    return SolverConfig(stepsize=args.lam, max_iters=args.max_iters, tol=args.tol)


def cmd_synth_equivariance(args) -> int:
    connection = "CCS" if args.estimator == "biinvariant" else "LeviCivita"
    sides = ("left", "right") if args.side == "both" else (args.side,)
    rows = ex.equivariance_study(
        ex.SynthConfig(seed=args.seed, connection=connection),
        n_translations=args.translations,
        translation_variance=args.translation_variance,
        estimator=args.estimator,
        sides=sides,
        solver=_solver(args),
    )
    with _output(args.out) as fh:
        write_csv(fh, ("index", "side", "estimator", "deviation", "converged"),
                  ((r.index, r.side, r.estimator, r.deviation, r.converged) for r in rows))
    return 0


def cmd_r2_hist(args) -> int:
    hist = ex.r2_histogram(
        ex.SynthConfig(seed=args.seed, connection="LeviCivita"),
        n_translations=args.translations,
        translation_variance=args.translation_variance,
        solver=_solver(args),
    )
    with _output(args.out) as fh:
        write_csv(fh, ("index", "r2"), enumerate(hist.values))
    _sidecar(args.out, ".summary.json", {**hist.summary(), "seed": args.seed})
    return 0


def cmd_knee(args) -> int:
    records = load_manifest(args.manifest)
    rows, result = knee_regression(records, _solver(args))
    with _output(args.out) as fh:
        write_csv(fh, ("grade", "t", "translational_norm"), ((r.grade, r.t, r.translational_norm) for r in rows))
    _sidecar(args.out, ".fit.json", result.to_dict())
    return 0


def cmd_knee_fixture(args) -> int:
    cfg = SyntheticKneeConfig(seed=args.seed, per_grade=args.per_grade, n_vertices=args.vertices)
    path = write_knee_fixture(args.out, synthetic_knee_clouds(cfg, ex.stage_rng(cfg.seed, "knee")))
    print(path)
    return 0


COMMANDS = {
    "synth-equivariance": cmd_synth_equivariance,
    "r2-hist": cmd_r2_hist,
    "knee": cmd_knee,
    "knee-fixture": cmd_knee_fixture,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.seed is None:
        try:
            args.seed = _default_seed()
        except argparse.ArgumentTypeError as err:
            parser.error(str(err))
    try:
        return COMMANDS[args.command](args)
    except (BranchCutError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
