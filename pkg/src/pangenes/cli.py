"""Command line interface: ``pangenes <subcommand> ...``.

Exit codes: 0 success, 1 failed verification, 2 bad input.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import io, montecarlo, stats, theory
from .genealogy import sample_kingman
from .geneprocess import ModelParams, simulate_genes
from .infer import FitError, fit_params

log = logging.getLogger("pangenes")


def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "NA"
    return f"{v:.10g}"


def _replicate_path(path, i, total):
    if total == 1:
        return Path(path)
    p = Path(path)
    return p.with_name(f"{p.stem}.{i}{p.suffix}")


def cmd_simulate(args):
    params = ModelParams(args.theta, args.rho, args.gc)
    seqs = np.random.SeedSequence(args.seed).spawn(args.replicates)
    meta = [f"pangenes simulate n={args.n} theta={args.theta} rho={args.rho} "
            f"gc={args.gc} seed={args.seed}"]
    if args.segregating_only:
        meta.append("segregating-only: class n excludes the infinite shared pool")
    for i, seq in enumerate(seqs):
        rng = np.random.Generator(np.random.PCG64(seq))
        tree = sample_kingman(args.n, rng)
        m = simulate_genes(tree, params, rng, segregating_only=args.segregating_only)
        comments = meta + ([f"replicate {i}"] if args.replicates > 1 else [])
        if args.newick_out:
            _replicate_path(args.newick_out, i, args.replicates).write_text(
                tree.to_newick() + "\n")
        if args.spectrum_out:
            io.write_spectrum(_replicate_path(args.spectrum_out, i, args.replicates),
                              stats.gene_frequency_spectrum(m), comments)
        if args.out:
            io.write_matrix(_replicate_path(args.out, i, args.replicates), m, comments)
        elif not args.spectrum_out:
            sys.stdout.write(io.format_matrix(m, comments))
    return 0


def cmd_stats(args):
    rep = stats.report(io.read_matrix(args.input))
    if args.gc:
        rep = stats.with_core(rep, args.gc)
    print("statistic\tvalue")
    for name, value in rep.rows():
        print(f"{name}\t{_fmt(value)}")
    return 0


def cmd_spectrum(args):
    spec = stats.gene_frequency_spectrum(io.read_matrix(args.input))
    if args.out:
        io.write_spectrum(args.out, spec, [f"spectrum of {args.input}"])
    else:
        sys.stdout.write(io.format_spectrum(spec))
    return 0


def cmd_theory(args):
    print("statistic\tn\ttheta\trho\tmean\tvariance")
    for name, mean, var in theory.all_moments(args.n, args.theta, args.rho, args.gc):
        print(f"{name}\t{args.n}\t{_fmt(args.theta)}\t{_fmt(args.rho)}\t"
              f"{_fmt(mean)}\t{_fmt(var)}")
    return 0


def cmd_fit(args):
    spec = io.read_spectrum_values(args.input)
    fit = fit_params(spec, rho_min=args.rho_min, rho_max=args.rho_max,
                     grid_points=args.grid, weighted=args.weighted)
    print("parameter\testimate")
    for name, value in fit.rows():
        print(f"{name}\t{_fmt(value)}")
    print()
    print("k\tobserved\tpredicted\tresidual")
    for k in range(1, len(spec) + 1):
        print(f"{k}\t{_fmt(spec[k - 1])}\t{_fmt(fit.predicted[k - 1])}\t{_fmt(fit.residuals[k - 1])}")
    return 0


def cmd_verify(args):
    rep = montecarlo.verify_moments(
        args.n, ModelParams(args.theta, args.rho), args.replicates, args.seed,
        threshold=args.threshold, var_threshold=args.var_threshold,
        n_boot=args.bootstrap, jobs=args.jobs)
    print(rep.to_text())
    if args.tsv_out:
        Path(args.tsv_out).write_text(rep.to_tsv())
    return 0 if rep.passed else 1


def build_parser():
    p = argparse.ArgumentParser(prog="pangenes", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="simulate presence/absence matrices")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--theta", type=float, required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--gc", type=int, default=0)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--replicates", type=int, default=1)
    s.add_argument("--out", help="matrix CSV (default: stdout)")
    s.add_argument("--spectrum-out")
    s.add_argument("--newick-out")
    s.add_argument("--segregating-only", action="store_true")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("stats", help="sample statistics of a matrix CSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--gc", type=int, default=0)
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("spectrum", help="gene frequency spectrum of a matrix CSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("theory", help="closed-form moments")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--theta", type=float, required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--gc", type=int, default=0)
    s.set_defaults(func=cmd_theory)

    s = sub.add_parser("fit", help="least-squares fit of a spectrum TSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--rho-min", type=float, default=0.01)
    s.add_argument("--rho-max", type=float, default=100.0)
    s.add_argument("--grid", type=int, default=64)
    s.add_argument("--weighted", action="store_true")
    s.set_defaults(func=cmd_fit)

    s = sub.add_parser("verify", help="Monte Carlo check of theory")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--theta", type=float, required=True)
    s.add_argument("--rho", type=float, required=True)
    s.add_argument("--replicates", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--threshold", type=float, default=4.0)
    s.add_argument("--var-threshold", type=float, default=6.0)
    s.add_argument("--bootstrap", type=int, default=1000)
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--tsv-out")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ValueError, FitError) as e:  # FormatError included
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
