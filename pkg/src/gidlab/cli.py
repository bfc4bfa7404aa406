"""Command-line experiment runner.

Every subcommand prints a JSON report on stdout (and writes it to
``--report`` when given).  Exit status: 0 pass, 1 property violated,
2 invalid input.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

import numpy as np

from . import distributions as dist
from . import feller, pointproc, renewal
from . import transform_core as tc
from .reports import ExperimentReport, emit_report, read_times_csv, report_json, write_csv

DEFAULT_SEED = 20030501

DIST_ALIASES = {
    "exponential": "exponential",
    "gamma": "gamma_exponent",
    "stable": "positive_stable",
    "ml": "mittag_leffler",
    "linnik": "linnik",
    "two-param-ml": "two_param_ml",
}

CHECK_ARGS = (0.5, 1.0, 2.0)


class InputError(ValueError):
    pass


def _default_seed() -> int:
    raw = os.environ.get("GIDLAB_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"GIDLAB_SEED must be an integer, got {raw!r}") from None


def _grid(args) -> np.ndarray:
    return tc.log_grid(args.grid_min, args.grid_max, args.grid_points)


def _spec(args, family: str | None = None) -> dist.DistributionSpec:
    fam = DIST_ALIASES.get(family or args.dist, family or args.dist)
    return dist.DistributionSpec(fam, alpha=args.alpha, scale=args.scale, beta=args.beta)


# ---------------------------------------------------------------------------
# subcommands; each returns an ExperimentReport without timing/seed filled in


def cmd_sample(args) -> ExperimentReport:
    spec = _spec(args)
    rng = dist.make_rng(args.seed, args.stream)
    if args.p is not None:
        x = dist.sample_geometric_sum(rng, spec, args.p, args.n)
        phi = tc.geometric_compound(dist.closed_form_transform(spec), args.p)
    else:
        x = spec.sample(rng, args.n)
        phi = dist.closed_form_transform(spec)
    kind = "cf_real" if spec.is_symmetric else "lt"
    emp, se = dist.empirical_transform(x, CHECK_ARGS, kind)
    exact = phi(np.array(CHECK_ARGS))
    dev = np.abs(emp - exact)
    ok = bool(np.all(dev <= 3 * se + 0.005))
    report = ExperimentReport(
        "sample",
        {"dist": spec.family, "alpha": spec.alpha, "beta": spec.beta, "scale": spec.scale,
         "n": args.n, "p": args.p, "stream": args.stream},
        {"arguments": list(CHECK_ARGS), "empirical": emp, "standard_error": se,
         "closed_form": exact, "max_deviation": float(dev.max())},
        "pass" if ok else "fail",
    )
    if args.out:
        report.artifacts.append(write_csv(args.out, ["value"], ((v,) for v in x)))
    return report


def _psi_for_family(args) -> tc.PsiFunction:
    fam = args.family
    if fam in ("ml", "power"):
        psi = tc.psi_power(args.alpha)
    elif fam == "gamma":
        psi = tc.psi_gamma_exponent(args.alpha)
    elif fam == "two-param":
        psi = tc.psi_two_param(args.alpha, args.beta)
    elif fam == "semi-ml":
        psi = tc.psi_log_periodic(args.alpha, args.eps, args.b)
    else:
        raise InputError(f"unknown family {fam!r}")
    return psi if args.p == 1.0 else tc.scaled(psi, args.p)


def cmd_verify_gid(args) -> ExperimentReport:
    if not 0 < args.p <= 1:
        raise InputError("--p must lie in (0, 1]")
    res = tc.check_gid(_psi_for_family(args), _grid(args), args.order, args.tol)
    return ExperimentReport(
        "verify-gid",
        {"family": args.family, "alpha": args.alpha, "beta": args.beta, "p": args.p,
         "eps": args.eps, "b": args.b, "order": args.order, "tol": args.tol},
        {"psi_at_zero": res.psi_at_zero, "gid_verdict": res.verdict, **res.cm.as_dict()},
        "pass" if res.passed else "fail",
    )


def cmd_verify_eq1(args) -> ExperimentReport:
    spec = _spec(args, args.family)
    if spec.family not in ("mittag_leffler", "linnik", "gamma_exponent", "two_param_ml", "exponential"):
        raise InputError(f"verify-eq1 does not support {spec.family}")
    index = 1.0 if spec.family in ("gamma_exponent", "exponential") else spec.alpha
    b = args.b if args.b is not None else args.p ** (1.0 / index)
    phi = dist.closed_form_transform(spec)
    resid = tc.compound_then_scale_fixed_point_residual(phi, args.p, b, _grid(args))
    ks = renewal.verify_eq1_distributional(dist.make_rng(args.seed, 0), spec, args.p, b, args.n)
    metrics = {"b": b, "residual": resid, "residual_threshold": 1e-12, **ks.as_dict()}
    if args.iters:
        trace = renewal.eq1_fixed_point_iterate(phi, args.p, b, iters=args.iters)
        metrics["iteration_residuals"] = trace.residuals
    ok = resid < 1e-12 and ks.passed
    return ExperimentReport(
        "verify-eq1",
        {"family": spec.family, "alpha": spec.alpha, "beta": spec.beta, "p": args.p, "n": args.n},
        metrics,
        "pass" if ok else "fail",
    )


def cmd_solve_renewal(args) -> ExperimentReport:
    a, p = args.alpha, args.p
    if not 0 < p < 1:
        raise InputError("--p must lie in (0, 1)")
    if args.h <= 0 or args.horizon <= 0:
        raise InputError("--h and --horizon must be positive")
    b = p ** (1.0 / a)
    z = renewal.GridFunction.from_function(lambda x: p * dist.ml_cdf(a, x / b), args.h, args.horizon)
    Z = renewal.solve_renewal_volterra(z, lambda x: (1 - p) * dist.ml_cdf(a, x / b))
    exact = dist.ml_cdf(a, Z.x)
    err = float(np.max(np.abs(Z.values - exact)))
    xs = Z.x[1:]
    inv = dist.invert_lt(lambda s: 1.0 / (s * (1.0 + s**a)), xs)
    err_inv = float(np.max(np.abs(Z.values[1:] - inv)))
    ok = err < args.tol and err_inv < args.tol
    report = ExperimentReport(
        "solve-renewal",
        {"alpha": a, "p": p, "h": args.h, "horizon": args.horizon, "tol": args.tol},
        {"max_error": err, "max_error_vs_inversion": err_inv, "nodes": int(Z.values.size)},
        "pass" if ok else "fail",
    )
    if args.out:
        report.artifacts.append(write_csv(args.out, ["x", "value"], zip(Z.x, Z.values)))
    return report


def _ml_path(args, stream: int):
    spec = dist.DistributionSpec.mittag_leffler(args.alpha)
    return renewal.simulate_renewal_events(dist.make_rng(args.seed, stream), spec, args.n)


def cmd_thin(args) -> ExperimentReport:
    if not 0 < args.p <= 1:
        raise InputError("--p must lie in (0, 1]")
    path = _ml_path(args, 0)
    marked = pointproc.thin(path, args.p, dist.make_rng(args.seed, 1))
    n1 = int(np.count_nonzero(marked.marks == 1))
    from scipy.stats import binom

    lo, hi = binom.interval(0.999, len(marked), args.p)
    metrics = {"n_events": len(marked), "n1": n1, "n2": len(marked) - n1,
               "binomial_interval_999": [lo, hi], "count_ok": bool(lo <= n1 <= hi)}
    ok = metrics["count_ok"]
    if args.p < 1 and n1 >= 2:
        gaps = pointproc.thinned_interarrival_samples(marked, 1)
        phi = tc.geometric_compound(dist.closed_form_transform(dist.DistributionSpec.mittag_leffler(args.alpha)), args.p)
        emp, se = dist.empirical_transform(gaps, CHECK_ARGS)
        exact = phi(np.array(CHECK_ARGS))
        metrics.update(empirical_lt=emp, standard_error=se, compounded_lt=exact)
        ok = ok and bool(np.all(np.abs(emp - exact) <= 3 * se + 0.01))
    report = ExperimentReport("thin", {"alpha": args.alpha, "p": args.p, "n": args.n}, metrics,
                              "pass" if ok else "fail")
    if args.out:
        report.artifacts.append(write_csv(args.out, ["time", "mark"], zip(marked.event_times, marked.marks)))
    return report


def cmd_superpose(args) -> ExperimentReport:
    if (args.in1 is None) != (args.in2 is None):
        raise InputError("give both --in1 and --in2, or neither")
    if args.in1 is not None:
        t1, t2 = read_times_csv(args.in1), read_times_csv(args.in2)
    else:
        t1, t2 = _ml_path(args, 1).event_times, _ml_path(args, 2).event_times
    try:
        merged = pointproc.superpose(t1, t2)
    except pointproc.MultiplicityError as exc:
        raise InputError(str(exc)) from exc
    round_trip = bool(np.array_equal(merged.projection(1), np.sort(t1))
                      and np.array_equal(merged.projection(2), np.sort(t2)))
    report = ExperimentReport(
        "superpose",
        {"in1": args.in1, "in2": args.in2, "alpha": args.alpha, "n": args.n},
        {"n_events": len(merged), "n1": int(t1.size), "n2": int(t2.size), "round_trip": round_trip},
        "pass" if round_trip else "fail",
    )
    if args.out:
        report.artifacts.append(write_csv(args.out, ["time", "mark"], zip(merged.event_times, merged.marks)))
    return report


def cmd_thm31(args) -> ExperimentReport:
    res = pointproc.check_thm31(dist.make_rng(args.seed, 0), args.alpha, args.p, args.n)
    return ExperimentReport("thm31", {"alpha": args.alpha, "p": args.p, "n": args.n}, res.as_dict(),
                            "pass" if res.passed else "fail")


def _thinned_gaps(args):
    path = _ml_path(args, 0)
    marked = pointproc.thin(path, args.p, dist.make_rng(args.seed, 1))
    return (path.inter_arrivals,
            pointproc.thinned_interarrival_samples(marked, 1),
            pointproc.thinned_interarrival_samples(marked, 2))


def cmd_thm32(args) -> ExperimentReport:
    if not 0 < args.p < 1:
        raise InputError("--p must lie in (0, 1)")
    orig, g1, g2 = _thinned_gaps(args)
    r1 = pointproc.check_same_type(orig, g1)
    r2 = pointproc.check_same_type(orig, g2)
    return ExperimentReport(
        "thm32", {"alpha": args.alpha, "p": args.p, "n": args.n},
        {"n1": r1.as_dict(), "n2": r2.as_dict()},
        "pass" if r1.passed and r2.passed else "fail",
    )


def cmd_thm33(args) -> ExperimentReport:
    if not 0 < args.p < 1:
        raise InputError("--p must lie in (0, 1)")
    _, g1, g2 = _thinned_gaps(args)
    r1 = pointproc.check_renewal_independence(g1, dist.make_rng(args.seed, 3))
    r2 = pointproc.check_renewal_independence(g2, dist.make_rng(args.seed, 4))
    return ExperimentReport(
        "thm33", {"alpha": args.alpha, "p": args.p, "n": args.n},
        {"n1": r1.as_dict(), "n2": r2.as_dict()},
        "pass" if r1.passed and r2.passed else "fail",
    )


def cmd_feller(args) -> ExperimentReport:
    pw, N, grid = args.p, args.n, _grid(args)
    try:
        if args.example == "4.1":
            seq = feller.walk_sequences(pw, N)
            wit = feller.gid_witness_transient(seq, grid)
        elif args.example == "4.2":
            wit = feller.gid_witness_ex42(pw, grid)
            seq = feller.walk_sequences(pw, N)
        else:
            wit = feller.gid_witness_ex43(pw, grid)
            seq = feller.walk_sequences(pw, N)
    except feller.DegenerateWalkError as exc:
        raise InputError(str(exc)) from exc
    s = tc.log_grid(0.05, args.grid_max, 50)
    ratio = float(np.max(seq.identity_error(s) / seq.identity_bound(s)))
    metrics = {"witness": wit.as_dict(), "identity_error_over_bound": ratio, "f_total": seq.f_total}
    ok = wit.passed and ratio < 1.0
    if args.example == "4.3" and pw < 0.5:
        metrics["note"] = "psi(0) != 0 for p_walk < 1/2; reported, not certified"
    report = ExperimentReport("feller", {"example": args.example, "p_walk": pw, "N": N}, metrics,
                              "pass" if ok else "fail")
    if args.out:
        report.artifacts.append(write_csv(args.out, ["n", "f_n", "u_n"], seq.to_rows()))
    return report


# ---------------------------------------------------------------------------
# parser


def _common(p: argparse.ArgumentParser, n_default: int = 10_000):
    p.add_argument("--seed", type=int, default=None, help="RNG seed (default: $GIDLAB_SEED or built-in)")
    p.add_argument("--n", type=int, default=n_default)
    p.add_argument("--out", default=None, help="CSV artifact path")
    p.add_argument("--report", default=None, help="JSON report path")
    p.add_argument("--grid-min", type=float, default=tc.CM_GRID[0])
    p.add_argument("--grid-max", type=float, default=tc.CM_GRID[1])
    p.add_argument("--grid-points", type=int, default=tc.CM_GRID[2])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gidlab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sample", help="draw samples from a family")
    _common(sp, 1000)
    sp.add_argument("--dist", choices=sorted(DIST_ALIASES), required=True)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--scale", type=float, default=1.0)
    sp.add_argument("--p", type=float, default=None, help="draw geometric(p) sums instead")
    sp.add_argument("--stream", type=int, default=0)
    sp.set_defaults(func=cmd_sample)

    sp = sub.add_parser("verify-gid", help="numerical GID certificate for psi/p")
    _common(sp)
    sp.add_argument("--family", choices=["ml", "power", "gamma", "two-param", "semi-ml"], required=True)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--p", type=float, default=1.0)
    sp.add_argument("--eps", type=float, default=0.05)
    sp.add_argument("--b", type=float, default=0.5)
    sp.add_argument("--order", type=int, default=tc.CM_ORDER)
    sp.add_argument("--tol", type=float, default=tc.CM_TOL)
    sp.set_defaults(func=cmd_verify_gid)

    sp = sub.add_parser("verify-eq1", help="geometric fixed-point residual and KS check")
    _common(sp)
    sp.add_argument("--family", choices=["ml", "gamma", "linnik", "two-param-ml", "exponential"], required=True)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--scale", type=float, default=1.0)
    sp.add_argument("--p", type=float, default=0.5)
    sp.add_argument("--b", type=float, default=None, help="default p**(1/alpha)")
    sp.add_argument("--iters", type=int, default=0, help="also run the fixed-point iteration")
    sp.set_defaults(func=cmd_verify_eq1)

    sp = sub.add_parser("solve-renewal", help="solve Z = z + Z*F with Mittag-Leffler inputs")
    _common(sp)
    sp.add_argument("--alpha", type=float, default=1.0)
    sp.add_argument("--p", type=float, default=0.5)
    sp.add_argument("--h", type=float, default=0.01)
    sp.add_argument("--horizon", type=float, default=5.0)
    sp.add_argument("--tol", type=float, default=0.02)
    sp.set_defaults(func=cmd_solve_renewal)

    for name, func, text in (
        ("thin", cmd_thin, "p-thin a Mittag-Leffler renewal path"),
        ("thm31", cmd_thm31, "thinned ML parts are rescaled ML"),
        ("thm32", cmd_thm32, "thinned ML inter-arrivals are of the same type"),
        ("thm33", cmd_thm33, "thinned inter-arrivals look i.i.d."),
    ):
        sp = sub.add_parser(name, help=text)
        _common(sp)
        sp.add_argument("--alpha", type=float, default=0.7)
        sp.add_argument("--p", type=float, default=0.5)
        sp.set_defaults(func=func)

    sp = sub.add_parser("superpose", help="merge two event-time files (or two simulated ML paths)")
    _common(sp, 1000)
    sp.add_argument("--in1", default=None)
    sp.add_argument("--in2", default=None)
    sp.add_argument("--alpha", type=float, default=0.7)
    sp.set_defaults(func=cmd_superpose)

    sp = sub.add_parser("feller", help="random-walk GID witnesses")
    _common(sp, 2000)
    sp.add_argument("--example", choices=["4.1", "4.2", "4.3"], required=True)
    sp.add_argument("--p", type=float, default=0.3, help="walk step probability")
    sp.set_defaults(func=cmd_feller)
    return parser


def run(argv=None) -> tuple[int, ExperimentReport | None]:
    parser = build_parser()
    args = parser.parse_args(argv)
    t0 = time.perf_counter()
    try:
        if args.seed is None:
            args.seed = _default_seed()
        report = args.func(args)
    except (ValueError, OSError, ArithmeticError) as exc:
        print(f"gidlab {args.command}: error: {exc}", file=sys.stderr)
        return 2, None
    report.seed = args.seed
    report.runtime_seconds = round(time.perf_counter() - t0, 6)
    try:
        if args.report:
            emit_report(report, args.report)
            report.artifacts.append(args.report)
    except OSError as exc:
        print(f"gidlab {args.command}: cannot write report: {exc}", file=sys.stderr)
        return 2, report
    print(report_json(report))
    return (0 if report.passed else 1), report


def main(argv=None) -> int:
    code, _ = run(argv)
    return code


if __name__ == "__main__":
    sys.exit(main())
