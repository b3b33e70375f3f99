"""Command-line entry point.

Exit codes: 0 success, 2 usage or validation error, 3 divergence,
4 unsupported case, 5 failed assertion or bound.
"""
from __future__ import annotations

import argparse
import re
import sys
from pathlib import Path

import numpy as np

from sparsetik.errors import (
    BoundViolationError,
    DimensionError,
    DivergenceError,
    NetTooCoarseError,
    PreconditionError,
    UnsupportedCaseError,
)
from sparsetik.experiments import (
    RateExperimentConfig,
    format_value,
    run_constrained_nonconvergence_demo,
    run_nonexistence_demo,
    run_pinv_regularization_sweep,
    run_rate_experiment,
)
from sparsetik.formats import format_sequence, read_config, read_operator, read_problem
from sparsetik.operators import DiagonalOperator
from sparsetik.solvers import minimizer_support_check, solve_diagonal, solve_iterative
from sparsetik.thresholding import ThresholdSpec, oracle_spacing, oracle_threshold, threshold

EXIT_OK, EXIT_USAGE, EXIT_DIVERGED, EXIT_UNSUPPORTED, EXIT_FAILED = 0, 2, 3, 4, 5


def _floatlist(s):
    return tuple(float(t) for t in re.split(r"[,\s]+", str(s).strip()) if t)


def _intlist(s):
    return tuple(int(t) for t in re.split(r"[,\s]+", str(s).strip()) if t)


def _bool(s):
    v = str(s).strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


_DEFAULT_SUPPORT = "1,2,3,4,5"
_DEFAULT_VALUES = "1,-2,0.5,3,-1"

SCHEMAS = {
    "rate": {
        "p": (float, "1"),
        "N": (int, "200"),
        "sigma_decay": (float, "1"),
        "support": (_intlist, _DEFAULT_SUPPORT),
        "values": (_floatlist, _DEFAULT_VALUES),
        "weights": (float, "1"),
        "delta_grid": (_floatlist, None),
        "delta_max": (float, "1e-1"),
        "delta_min": (float, "1e-5"),
        "delta_count": (int, "9"),
        "alpha_rule": (float, "1"),
        "trials_per_delta": (int, "10"),
        "noise": (str, "sphere"),
        "crosscheck": (_bool, "true"),
        "band_err2_weighted": (_floatlist, None),
        "band_err2": (_floatlist, None),
        "band_err1": (_floatlist, None),
        "seed": (int, "0"),
    },
    "pinv-sweep": {
        "p": (float, "0"),
        "N": (int, "200"),
        "sigma_decay": (float, "1"),
        "support": (_intlist, _DEFAULT_SUPPORT),
        "values": (_floatlist, _DEFAULT_VALUES),
        "sigma": (_floatlist, None),
        "u_star": (_floatlist, None),
        "alpha_grid": (_floatlist, None),
        "alpha_max": (float, "1"),
        "alpha_min": (float, "1e-12"),
        "alpha_count": (int, "25"),
        "seed": (int, "0"),
    },
    "nonexist": {
        "M": (int, "2"),
        "net_sizes": (_intlist, "4,16,64,256,1024"),
        "alpha": (float, "0.5"),
        "g_norm": (float, "1"),
        "seed": (int, "0"),
    },
    "constrained-demo": {
        "M": (int, "2"),
        "L": (int, "131072"),
        "tau": (float, "1.5"),
        "delta_grid": (_floatlist, "1e-1,1e-2,1e-3,1e-4"),
        "seed": (int, "0"),
    },
}
_ALIASES = {"noise_seed": "seed", "g_seed": "seed"}


def _flag(key):
    return "--" + key.replace("_", "-")


def _add_schema(sub, schema):
    sub.add_argument("config", nargs="?", help="flat 'key value' config file")
    for key in schema:
        sub.add_argument(_flag(key), dest=key, default=None, metavar="V")
    sub.add_argument("--out", help="CSV output path (default: stdout)")


def _resolve(schema, args):
    """Merge defaults, config file and flags; reject unknown config keys."""
    raw = {k: d for k, (_, d) in schema.items()}
    if args.config:
        for key, value in read_config(args.config).items():
            key = _ALIASES.get(key, key)
            if key not in schema:
                raise PreconditionError(f"unknown config key {key!r}")
            raw[key] = value
    for key in schema:
        v = getattr(args, key)
        if v is not None:
            raw[key] = v
    out = {}
    for key, (conv, _) in schema.items():
        if raw[key] is None:
            out[key] = None
            continue
        try:
            out[key] = conv(raw[key])
        except ValueError as exc:
            raise PreconditionError(f"bad value for {key}: {exc}") from None
    return out


def _emit_csv(text, out):
    if out:
        Path(out).write_text(text, newline="\n")
    else:
        sys.stdout.write(text)


def _grid(params, prefix):
    if params[f"{prefix}_grid"] is not None:
        return params[f"{prefix}_grid"]
    lo, hi, n = params[f"{prefix}_min"], params[f"{prefix}_max"], params[f"{prefix}_count"]
    if not (0 < lo < hi) or n < 2:
        raise PreconditionError(f"need 0 < {prefix}_min < {prefix}_max and {prefix}_count >= 2")
    return tuple(np.logspace(np.log10(hi), np.log10(lo), n))


def cmd_threshold(args):
    spec = ThresholdSpec(args.p, args.alpha)
    h = threshold(spec, args.x)
    print(f"H {format_value(h)}")
    if args.oracle:
        o = oracle_threshold(spec, args.x, grid_points=args.grid_points)
        print(f"oracle {format_value(o)} diff {format_value(abs(h - o))}")
        print(f"spacing {format_value(oracle_spacing(args.x, grid_points=args.grid_points))}")
    return EXIT_OK


def cmd_solve(args):
    K = read_operator(args.operator)
    prob = read_problem(args.problem, K)
    method = args.method or ("diagonal" if isinstance(K, DiagonalOperator) else "iterative")
    if prob.p < 1 and not (method == "diagonal" and isinstance(K, DiagonalOperator)):
        raise UnsupportedCaseError(
            f"p={prob.p} < 1 is only supported for diagonal operators: "
            "with a general operator the functional may have no minimizer")
    if method == "diagonal":
        res = solve_diagonal(prob)
    else:
        res = solve_iterative(prob, tol=args.tol, max_iter=args.max_iter)
    report = minimizer_support_check(res, prob, tol=args.tol)
    print(f"objective {format_value(res.objective)}")
    print(f"iterations {res.iterations}")
    print(f"certificate_residual {format_value(res.certificate_residual)}")
    print(f"support_size {report.size}")
    print(f"converged {format_value(res.converged)}")
    if args.out:
        Path(args.out).write_text(format_sequence(res.u), newline="\n")
    return EXIT_OK


def cmd_rate(args):
    params = _resolve(SCHEMAS["rate"], args)
    cfg = RateExperimentConfig(
        p=params["p"], N=params["N"], sigma_decay=params["sigma_decay"], support=params["support"],
        values=params["values"], weights=params["weights"], delta_grid=_grid(params, "delta"),
        alpha_rule=params["alpha_rule"], noise_seed=params["seed"],
        trials_per_delta=params["trials_per_delta"], noise=params["noise"],
        crosscheck=params["crosscheck"], band_err2_weighted=params["band_err2_weighted"],
        band_err2=params["band_err2"], band_err1=params["band_err1"])
    report = run_rate_experiment(cfg)
    _emit_csv(report.to_csv(), args.out)
    print(f"slope2 {format_value(report.slope2)}")
    print(f"slope1 {format_value(report.slope1)}")
    for key, ok in report.slopes_in_bands().items():
        print(f"band_{key} {format_value(ok)}")
    print(f"bounds_ok {format_value(report.bounds_ok)}")
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_pinv_sweep(args):
    params = _resolve(SCHEMAS["pinv-sweep"], args)
    if params["sigma"] is not None or params["u_star"] is not None:
        if params["sigma"] is None or params["u_star"] is None:
            raise PreconditionError("sigma and u_star must be given together")
        K = DiagonalOperator(params["sigma"])
        u_star = np.asarray(params["u_star"])
        if u_star.size != K.shape[1]:
            raise PreconditionError("u_star and sigma differ in length")
    else:
        N = params["N"]
        K = DiagonalOperator(np.arange(1, N + 1, dtype=float) ** (-params["sigma_decay"]))
        u_star = np.zeros(N)
        if len(params["support"]) != len(params["values"]):
            raise PreconditionError("support and values differ in length")
        if min(params["support"]) < 1 or max(params["support"]) > N:
            raise PreconditionError("support indices must lie in [1, N]")
        u_star[np.asarray(params["support"]) - 1] = params["values"]
    report = run_pinv_regularization_sweep(K, u_star, params["p"], _grid(params, "alpha"))
    _emit_csv(report.to_csv(), args.out)
    print(f"final_error {format_value(report.rows[-1]['error'])}")
    print(f"monotone {format_value(report.monotone)}")
    print(f"final_ok {format_value(report.final_ok)}")
    return EXIT_OK if report.ok else EXIT_FAILED


def cmd_nonexist(args):
    params = _resolve(SCHEMAS["nonexist"], args)
    report = run_nonexistence_demo(params["M"], params["net_sizes"], params["alpha"],
                                   g_seed=params["seed"], g_norm=params["g_norm"])
    _emit_csv(report.to_csv(), args.out)
    print(f"final_gap {format_value(report.rows[-1]['gap'])}")
    return EXIT_OK


def cmd_constrained(args):
    params = _resolve(SCHEMAS["constrained-demo"], args)
    report = run_constrained_nonconvergence_demo(params["M"], params["L"], params["tau"],
                                                 params["delta_grid"], seed=params["seed"])
    _emit_csv(report.to_csv(), args.out)
    print(f"min_distance {format_value(min(r['distance'] for r in report.rows))}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="sparsetik", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("threshold", help="evaluate the scalar thresholding map")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--x", type=float, required=True)
    p.add_argument("--oracle", action="store_true", help="compare with a brute-force grid minimizer")
    p.add_argument("--grid-points", type=int, default=200_001)
    p.set_defaults(func=cmd_threshold)

    p = subs.add_parser("solve", help="minimize the Tikhonov functional for a problem file")
    p.add_argument("operator")
    p.add_argument("problem")
    p.add_argument("--method", choices=("iterative", "diagonal"))
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-iter", type=int, default=100_000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    for name, func, text in (
        ("rate", cmd_rate, "convergence-rate sweep over the noise level"),
        ("pinv-sweep", cmd_pinv_sweep, "alpha -> 0 sweep on exact data for p < 1"),
        ("nonexist", cmd_nonexist, "p = 0 functional without a minimizer"),
        ("constrained-demo", cmd_constrained, "constrained p = 0 problem without convergence"),
    ):
        p = subs.add_parser(name, help=text)
        _add_schema(p, SCHEMAS[name])
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BoundViolationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        if exc.row is not None:
            print(f"row: {exc.row}", file=sys.stderr)
        return EXIT_FAILED
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except UnsupportedCaseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except (PreconditionError, DimensionError, NetTooCoarseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
