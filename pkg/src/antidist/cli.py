"""Command-line interface.

Four subcommands cover the library surface:

    antidist classical-exponent FILE        multivariate divergence report
    antidist quantum-bounds FILE            exponent bound bracket report
    antidist one-shot FILE                  optimal one-shot error (+ POVM)
    antidist scan FILE --n-max N            n-fold error scan as CSV

All values print with 9 significant digits in nats (--bits rescales the
divergence reports); infinities print as the literal string "inf".  Runs
are deterministic given the input file, flags and seed.  Exit codes:
0 success, 2 validation error, 3 resource cap, 4 solver non-convergence.
"""

from __future__ import annotations

import argparse
import math
import sys

from .classical import (ClassicalEnsemble, min_likelihood_error,
                        multivariate_chernoff, pairwise_chernoff)
from .errors import (AntidistError, ConvergenceError, ResourceLimitError,
                     ValidationError)
from .extreal import ExtReal
from .fileio import load_ensemble
from .quantum import QuantumEnsemble, exponent_bounds, one_shot_error
from .scans import classical_scan, quantum_scan

EXIT_VALIDATION = 2
EXIT_RESOURCE = 3
EXIT_CONVERGENCE = 4


def _fmt(x, bits=False) -> str:
    if isinstance(x, ExtReal):
        if x.infinite:
            return "inf"
        x = x.value
    if bits:
        x = x / math.log(2.0)
    return f"{x:.9g}"


def _label(labels, i) -> str:
    return labels[i] if labels else str(i + 1)


def _cmd_classical_exponent(args, out):
    ensemble, labels = load_ensemble(args.file)
    if not isinstance(ensemble, ClassicalEnsemble):
        raise ValidationError("classical-exponent requires a classical ensemble file")
    unit = "bits" if args.bits else "nats"
    res = multivariate_chernoff(ensemble.dists)
    out.write(f"xi_cl = {_fmt(res.value, args.bits)} {unit}\n")
    out.write("minimizer s* = ["
              + ", ".join(_fmt(x) for x in res.minimizer) + "]\n")
    out.write(f"hellinger at minimizer = {_fmt(res.hellinger_at_min)}\n")
    out.write(f"pairwise xi_cl ({unit}):\n")
    for i in range(ensemble.r):
        for j in range(i + 1, ensemble.r):
            val = pairwise_chernoff(ensemble.dists[i], ensemble.dists[j])
            out.write(f"  ({_label(labels, i)}, {_label(labels, j)})"
                      f"  {_fmt(val, args.bits)}\n")


def _cmd_quantum_bounds(args, out):
    ensemble, _ = load_ensemble(args.file)
    if not isinstance(ensemble, QuantumEnsemble):
        raise ValidationError("quantum-bounds requires a quantum ensemble file")
    unit = "bits" if args.bits else "nats"
    bounds = exponent_bounds(ensemble, restarts=args.restarts, seed=args.seed)
    res = one_shot_error(ensemble)
    out.write(f"one_shot_error = {_fmt(res.error)}\n")
    out.write(f"lower_pairwise = {_fmt(bounds.lower_pairwise, args.bits)} {unit}\n")
    out.write(f"lower_measured = {_fmt(bounds.lower_measured, args.bits)} {unit}\n")
    out.write(f"upper_neg_ln_kappa = {_fmt(bounds.upper_neg_ln_kappa, args.bits)} {unit}\n")
    if bounds.log_euclidean is not None:
        out.write(f"log_euclidean = {_fmt(bounds.log_euclidean, args.bits)} {unit}\n")
    if bounds.commuting_exact is not None:
        out.write(f"commuting_exact = {_fmt(bounds.commuting_exact, args.bits)} {unit}\n")


def _cmd_one_shot(args, out):
    ensemble, labels = load_ensemble(args.file)
    if isinstance(ensemble, ClassicalEnsemble):
        err = min_likelihood_error(ensemble)
        out.write(f"error = {_fmt(err)}\n")
        W = ensemble.weight_matrix()
        scores = ensemble.priors[:, None] * W
        rule = scores.argmin(axis=0)
        out.write("minimum-likelihood rule eliminates: ["
                  + ", ".join(_label(labels, int(i)) for i in rule) + "]\n")
        return
    res = one_shot_error(ensemble)
    out.write(f"error = {_fmt(res.error)}\n")
    out.write(f"gap = {_fmt(res.gap)}\n")
    for i, M in enumerate(res.povm.elements):
        out.write(f"M[{_label(labels, i)}] =\n")
        for row in M:
            out.write("  [" + ", ".join(
                f"{z.real:.9g}{z.imag:+.9g}j" for z in row) + "]\n")


def _cmd_scan(args, out):
    ensemble, _ = load_ensemble(args.file)
    if isinstance(ensemble, ClassicalEnsemble):
        mode = "monte_carlo" if args.mode == "mc" else "exact"
        report = classical_scan(ensemble, n_max=args.n_max, mode=mode,
                                trials=args.trials, seed=args.seed)
    else:
        if args.mode == "mc":
            raise ValidationError("Monte Carlo mode applies to classical "
                                  "ensembles only; quantum scans use the SDP")
        report = quantum_scan(ensemble, n_max=args.n_max, seed=args.seed)
    out.write("n,error,neg_log_rate,mode,std_err\n")
    for row in report.rows:
        std = "" if row.std_err is None else _fmt(row.std_err)
        out.write(f"{row.n},{_fmt(row.error)},{_fmt(row.neg_log_rate)},"
                  f"{row.mode},{std}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="antidist",
        description="Antidistinguishability error probabilities and "
                    "error-exponent bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classical-exponent",
                       help="multivariate classical Chernoff divergence report")
    p.add_argument("file")
    p.add_argument("--bits", action="store_true",
                   help="display divergences in bits instead of nats")
    p.set_defaults(run=_cmd_classical_exponent)

    p = sub.add_parser("quantum-bounds",
                       help="exponent bound bracket for a quantum ensemble")
    p.add_argument("file")
    p.add_argument("--restarts", type=int, default=6,
                   help="random restarts of the measured-bound search")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bits", action="store_true")
    p.set_defaults(run=_cmd_quantum_bounds)

    p = sub.add_parser("one-shot", help="optimal one-shot error")
    p.add_argument("file")
    p.set_defaults(run=_cmd_one_shot)

    p = sub.add_parser("scan", help="n-fold error scan, CSV on stdout")
    p.add_argument("file")
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--mode", choices=["exact", "mc"], default="exact")
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(run=_cmd_scan)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.run(args, sys.stdout)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except AntidistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return 0


if __name__ == "__main__":
    sys.exit(main())
