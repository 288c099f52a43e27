"""Command-line entry point: ``definetti <subcommand> ...``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import numpy as np

from .errors import InvariantViolation
from .measures import Beta, measure_from_json
from .quadrature import DEFAULT_CONFIG, QuadratureConfig, SCHEMES
from .rates import RunConfig, compare_constant, fit_rate, log_grid, run_distance_curve
from .urn import UrnConfig, simulate_urn
from .verify import suite_passed, run_verification_suite
from .wasserstein import binomial_normal_check, reports_to_csv


def parse_grid(text):
    """``"10,20,50"`` or ``"log:LO:HI:COUNT"``."""
    text = text.strip()
    if text.startswith("log:"):
        _, lo, hi, count = text.split(":")
        return log_grid(float(lo), float(hi), int(count))
    values = sorted({int(v) for v in text.split(",") if v.strip()})
    if not values or values[0] < 1:
        raise argparse.ArgumentTypeError("grid entries must be positive integers")
    return tuple(values)


def _float_list(text):
    return [float(v) for v in text.split(",") if v.strip()]


def _config(args):
    cfg = QuadratureConfig(scheme=args.scheme) if getattr(args, "scheme", None) else DEFAULT_CONFIG
    if getattr(args, "tol", None) is not None:
        cfg = cfg.with_tol(abs_tol=args.tol, rel_tol=max(args.tol, 1e-14))
    return cfg


def _emit(text, out):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def cmd_distance(args):
    if args.mode == "urn_mc" and args.seed is None:
        raise SystemExit("--seed is required for Monte Carlo modes")
    cfg = RunConfig(
        measure=measure_from_json(args.measure), n_grid=args.n_grid, mode=args.mode,
        quadrature=_config(args), seed=args.seed or 0, output_path=args.out or "",
        replications=args.replications, workers=args.workers,
    )
    reports = run_distance_curve(cfg)
    _emit(reports_to_csv(reports), args.out)
    return 0


def cmd_rate_fit(args):
    cfg = RunConfig(
        measure=measure_from_json(args.measure), n_grid=args.n_grid, mode=args.mode,
        quadrature=_config(args), workers=args.workers,
    )
    reports = run_distance_curve(cfg)
    key = "dw_perturbed" if args.mode == "perturbed" else "dw_exact"
    ns = [r.n for r in reports]
    ds = [getattr(r, key) for r in reports]
    fit = fit_rate(ns, ds)
    _emit(_csv(["n", key], zip(ns, ds)), args.out)
    verdict = {"slope": fit.slope, "intercept": fit.intercept, "max_residual": fit.max_residual,
               "quantity": key, "ns": list(fit.ns)}
    sys.stderr.write(json.dumps(verdict, sort_keys=True) + "\n")
    if args.fit_out:
        with open(args.fit_out, "w", encoding="utf-8") as fh:
            json.dump(verdict, fh, sort_keys=True, indent=2)
    return 0


def cmd_urn_sim(args):
    cfg = UrnConfig(A=args.A, B=args.B, m=args.m, n=args.n, replications=args.replications, seed=args.seed)
    emp = simulate_urn(cfg, workers=args.workers)
    _emit(emp.to_csv(), args.out)
    return 0


def cmd_binomial_normal(args):
    rows = []
    ok = True
    for t in args.t:
        for n in args.n_grid:
            lhs, rhs = binomial_normal_check(t, n)
            ok &= lhs <= rhs
            rows.append((t, n, lhs, rhs, "true" if lhs <= rhs else "false"))
    _emit(_csv(["t", "n", "lhs", "rhs", "holds"], rows), args.out)
    return 0 if ok else 1


def cmd_verify(args):
    results = run_verification_suite(_config(args), seed=args.seed, quick=args.quick)
    text = json.dumps(results, indent=2, sort_keys=True) + "\n"
    _emit(text, args.out)
    for r in results:
        sys.stderr.write(f"{r['status']:>8}  {r['check_name']}\n")
    return 0 if suite_passed(results) else 1


def cmd_compare_constant(args):
    if args.table:
        rows = []
        with open(args.table, newline="") as fh:
            for rec in csv.DictReader(fh):
                mu = Beta(float(rec["alpha"]), float(rec["beta"]))
                ext = float(rec["external"])
                rows.append((mu.alpha, mu.beta, ext, compare_constant(mu, ext)))
        _emit(_csv(["alpha", "beta", "external", "ratio"], rows), args.out)
        return 0
    if args.measure is None or args.external is None:
        raise SystemExit("give --table, or both --measure and --external")
    ratio = compare_constant(measure_from_json(args.measure), args.external)
    _emit(repr(ratio) + "\n", args.out)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="definetti", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, measure=True, grid=True):
        if measure:
            sp.add_argument("--measure", required=True, help="measure as JSON text or a path to a JSON file")
        if grid:
            sp.add_argument("--n-grid", type=parse_grid, required=True,
                            help="comma-separated n values or log:LO:HI:COUNT")
        sp.add_argument("--tol", type=float, default=None, help="absolute quadrature tolerance")
        sp.add_argument("--scheme", choices=SCHEMES, default=None)
        sp.add_argument("--out", default=None, help="output file (default: stdout)")
        sp.add_argument("--workers", type=int, default=1)

    d = sub.add_parser("distance", help="distance report per n (CSV)")
    common(d)
    d.add_argument("--mode", choices=("exact", "perturbed", "both", "urn_mc"), default="exact")
    d.add_argument("--seed", type=int, default=None)
    d.add_argument("--replications", type=int, default=100_000)
    d.set_defaults(func=cmd_distance)

    r = sub.add_parser("rate-fit", help="log-log slope of a distance curve")
    common(r)
    r.add_argument("--mode", choices=("exact", "perturbed"), default="perturbed")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--fit-out", default=None, help="JSON file for the fitted slope")
    r.set_defaults(func=cmd_rate_fit)

    u = sub.add_parser("urn-sim", help="simulate a Polya urn (CSV with JSON header)")
    u.add_argument("--A", type=int, required=True)
    u.add_argument("--B", type=int, required=True)
    u.add_argument("--m", type=int, default=1)
    u.add_argument("--n", type=int, required=True)
    u.add_argument("--replications", type=int, default=1_000_000)
    u.add_argument("--seed", type=int, required=True)
    u.add_argument("--out", default=None)
    u.add_argument("--workers", type=int, default=1)
    u.set_defaults(func=cmd_urn_sim)

    c = sub.add_parser("chen-check", aliases=["binomial-normal-check"],
                       help="binomial vs normal Wasserstein bound")
    c.add_argument("--t", type=_float_list, default=[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    c.add_argument("--n-grid", type=parse_grid, default=(1, 4, 16, 64, 256))
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_binomial_normal)

    v = sub.add_parser("verify", help="run the verification suite (JSON verdicts)")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tol", type=float, default=None)
    v.add_argument("--scheme", choices=SCHEMES, default=None)
    v.add_argument("--quick", action="store_true", help="reduced grids")
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_verify)

    k = sub.add_parser("compare-constant", help="ratio of the Beta constant to an external one")
    k.add_argument("--measure", default=None)
    k.add_argument("--external", type=float, default=None)
    k.add_argument("--table", default=None, help="CSV with columns alpha,beta,external")
    k.add_argument("--out", default=None)
    k.set_defaults(func=cmd_compare_constant)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvariantViolation as exc:
        sys.stderr.write(f"invariant violated: {exc}\n")
        return 1
    except (ValueError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
