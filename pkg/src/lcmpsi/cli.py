"""Command-line front end.  Every subcommand prints CSV (header + rows) or,
with --json, a JSON object carrying ``schema_version``.

Exit codes: 0 success, 1 a hard acceptance check failed (suite only),
2 invalid arguments or domain errors, 3 a resource cap was exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import warnings

from . import oracle
from .asymptotics import RegimeParams, bernoulli_main_term, predict_mean
from .errors import ResourceLimitError
from .extremal import build_prime_tail_set, build_smooth_set, extremal_bounds
from .moments import (
    PAIR_CAP,
    VARIANCE_CAP,
    bernoulli_report,
    make_report,
    uniform_report,
)
from .poly import (
    B_X2_PLUS_1,
    IntPolynomial,
    estimate_B_constant,
    is_irreducible_quadratic,
    poly_set,
    predict_conjecture,
    predict_linear,
    predict_quadratic_irreducible,
    predict_reducible_x2m1,
)
from .psi_core import psi_indicator, psi_of_set, read_set_file
from .random_models import BernoulliModel, UniformKModel, montecarlo_psi, run_trials, summarize
from .sieve import DEFAULT_LIMIT_CAP, build_prime_table, chebyshev_psi
from .suite import SCALES, run_suite

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3

X2_PLUS_1 = IntPolynomial((1, 0, 1))
X2_MINUS_1 = IntPolynomial((-1, 0, 1))


class UsageError(Exception):
    pass


def _fmt(v):
    if isinstance(v, bool):
        return int(v)
    if isinstance(v, float):
        return "" if math.isnan(v) else f"{v:.9g}"
    if v is None:
        return ""
    return v


def _json_value(v):
    if isinstance(v, float):
        if math.isnan(v) or math.isinf(v):
            return None
        return float(f"{v:.9g}")
    return v


def emit(rows: list, args, out=None):
    """One CSV header plus rows; in JSON a single row becomes a flat object."""
    out = out or sys.stdout
    if args.json:
        rows = [{k: _json_value(v) for k, v in r.items()} for r in rows]
        payload = {"schema_version": SCHEMA_VERSION, "command": args.command}
        if len(rows) == 1:
            payload.update(rows[0])
        else:
            payload["rows"] = rows
        out.write(json.dumps(payload) + "\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(list(rows[0]))
    for r in rows:
        writer.writerow([_fmt(v) for v in r.values()])


def _table(args, needed: int):
    limit = args.limit or max(2, needed)
    if limit < needed:
        raise UsageError(f"--limit {limit} is below the required {needed}")
    return build_prime_table(limit, cap=args.max_limit)


def _threads(args) -> int:
    return args.threads if args.threads > 0 else (os.cpu_count() or 1)


# -- subcommands --------------------------------------------------------------


def cmd_sieve(args):
    t = _table(args, 2)
    return [{"limit": t.limit, "prime_count": t.prime_count(t.limit), "psi": chebyshev_psi(t.limit, t)}]


def cmd_psi(args):
    A = read_set_file(args.input, args.n)
    t = _table(args, args.n)
    value = psi_indicator(A, t) if args.method == "indicator" else psi_of_set(A, t)
    return [{"n": args.n, "size": len(A), "psi": value}]


def cmd_expect(args):
    t = _table(args, args.n)
    return [bernoulli_report(args.n, args.delta, t, method=args.method).as_row()]


def cmd_variance(args):
    t = _table(args, args.n)
    return [bernoulli_report(args.n, args.delta, t, with_variance=True, cap=args.cap).as_row()]


def cmd_meank(args):
    t = _table(args, args.n)
    rep = uniform_report(args.n, args.k, t, args.second_moment, cap=args.cap, method=args.method)
    return [rep.as_row()]


def cmd_sample(args):
    if args.model == "bernoulli":
        if args.delta is None:
            raise UsageError("--model bernoulli needs --delta")
        model = BernoulliModel(args.n, args.delta)
    else:
        if args.k is None:
            raise UsageError("--model uniform-k needs --k")
        model = UniformKModel(args.n, args.k)
    t = _table(args, args.n)
    levels = tuple(float(x) for x in args.quantiles.split(","))
    if args.dump_psis:
        psis, sizes = run_trials(model, args.trials, args.seed, t, _threads(args))
        with open(args.dump_psis, "w", encoding="utf-8") as fh:
            fh.writelines(f"{p:.9g}\n" for p in psis.tolist())
        stats = summarize(psis, sizes, levels)
    else:
        stats = montecarlo_psi(model, args.trials, args.seed, t, _threads(args), levels)
    row = {"model": args.model, "n": args.n, "delta_or_k": args.delta if args.model == "bernoulli" else args.k}
    row.update(stats.as_row())
    return [row]


def cmd_oracle(args):
    if args.extremal:
        if args.k is None:
            raise UsageError("--extremal needs --k")
        r = oracle.extremal_psi_exhaustive(args.n, args.k)
        return [{
            "n": args.n,
            "k": args.k,
            "min_psi": r.min_psi,
            "argmin": " ".join(map(str, r.argmin)),
            "max_psi": r.max_psi,
            "argmax": " ".join(map(str, r.argmax)),
        }]
    if args.k is not None:
        m1, m2 = oracle.enumerate_uniform_k_moments(args.n, args.k)
        return [make_report(args.n, args.k, m1, m2, "oracle").as_row()]
    if args.delta is None:
        raise UsageError("oracle needs --delta or --k")
    e, v = oracle.enumerate_bernoulli_moments(args.n, args.delta)
    return [make_report(args.n, args.delta, e, v + e * e, "oracle").as_row()]


def cmd_extremal(args):
    t = _table(args, args.n)
    if args.kind == "smooth":
        A, spec = build_smooth_set(args.n, args.k, t)
        y, t_eff = spec.y, spec.t_effective
    else:
        A = build_prime_tail_set(args.n, args.k, t)
        y, t_eff = math.nan, math.nan
    row = {"n": args.n, "k": args.k, "kind": args.kind, "size": len(A), "psi": psi_of_set(A, t),
           "y": y, "t_effective": t_eff}
    if args.report_bounds:
        if args.theta is None or args.c is None:
            raise UsageError("--report-bounds needs --theta and --c")
        upper_ref, lower_ref = extremal_bounds(args.n, args.theta, args.c)
        row["max_reference"] = upper_ref
        row["min_reference"] = lower_ref
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(f"# {args.kind} set, n={args.n}, k={args.k}\n")
            fh.writelines(f"{a}\n" for a in A)
    return [row]


def _poly_prediction(f: IntPolynomial, n: int, t, B):
    if f.degree == 1:
        return "linear", predict_linear(f, n, t)
    if f == X2_MINUS_1:
        return "reducible_x2m1", predict_reducible_x2m1(n)
    if f.degree == 2:
        if not is_irreducible_quadratic(f):
            return "none", math.nan
        if B is None:
            return "conjecture", predict_conjecture(f, n)
        return "quadratic_irreducible", predict_quadratic_irreducible(f, n, B)
    return "conjecture", predict_conjecture(f, n)


def cmd_poly(args):
    try:
        f = IntPolynomial.parse(args.coeffs)
    except ValueError as exc:
        raise UsageError(f"bad --coeffs: {exc}") from None
    P = args.estimate_B
    t = _table(args, max(math.isqrt(args.n) + 1, P or 0, 2))
    A = poly_set(f, args.n)
    row = {"n": args.n, "set_size": len(A), "psi": psi_of_set(A, t)}
    B = args.B
    est = None
    if P is not None:
        est = estimate_B_constant(P, t)
        if B is None and f == X2_PLUS_1:
            B = est.value
    elif B is None and f == X2_PLUS_1:
        B = B_X2_PLUS_1
    if args.predict:
        row["predictor_name"], row["predicted"] = _poly_prediction(f, args.n, t, B)
    else:
        row["predictor_name"], row["predicted"] = "", math.nan
    if est is not None:
        row["B_prime_cap"] = est.prime_cap
        row["B_estimate"] = est.value
        row["B_last_block"] = est.last_block_increment
    return [row]


def cmd_predict(args):
    r = RegimeParams(args.n, args.theta, args.c)
    return [{
        "n": r.n,
        "theta": r.theta,
        "c": r.c,
        "delta": r.delta,
        "k": r.k,
        "predict_mean": predict_mean(r),
        "bernoulli_main_term": bernoulli_main_term(r.n, r.delta),
    }]


def cmd_suite(args):
    only = None
    if args.only:
        only = {int(x) for x in args.only.split(",")}
    results = run_suite(args.scale, only)
    args.suite_failed = any(not r.passed for r in results)
    return [
        {"number": r.number, "name": r.name, "status": r.status, "seconds": r.seconds, "detail": r.detail}
        for r in results
    ]


# -- parser -------------------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--limit", type=int, default=None,
                   help="prime table limit (default: what the command needs)")
    p.add_argument("--max-limit", type=int, default=DEFAULT_LIMIT_CAP,
                   help="resource cap on --limit (default %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="root seed for sampling (default 0)")
    p.add_argument("--json", action="store_true", help="emit JSON instead of CSV")
    p.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto; output does not depend on it")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="lcmpsi", description="psi(A) = log lcm(A) experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        p.set_defaults(func=func)
        return p

    p = add("sieve", cmd_sieve, "Prime table summary. CSV: limit,prime_count,psi")
    p.add_argument("--stats", action="store_true", help="accepted for compatibility; stats are always printed")

    p = add("psi", cmd_psi, "psi of a set read from a file. CSV: n,size,psi")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--input", required=True, help="whitespace-separated integers, '#' comment lines")
    p.add_argument("--method", choices=("factored", "indicator"), default="factored")

    moment_cols = "CSV: n,delta_or_k,expectation,second_moment,variance,method"
    p = add("expect", cmd_expect, f"Exact E psi under independent inclusion. {moment_cols}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--method", choices=("direct", "grouped"), default="direct")

    p = add("variance", cmd_variance, f"Exact Var psi under independent inclusion. {moment_cols}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--cap", type=int, default=VARIANCE_CAP, help="pairwise cap on n (default %(default)s)")

    p = add("meank", cmd_meank, f"Exact moments over size-k subsets. {moment_cols}")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--second-moment", action="store_true")
    p.add_argument("--method", choices=("auto", "direct", "breakpoint"), default="auto")
    p.add_argument("--cap", type=int, default=PAIR_CAP, help="pairwise cap on n (default %(default)s)")

    p = add("sample", cmd_sample,
            "Monte Carlo psi. CSV: model,n,delta_or_k,trials,mean_psi,var_psi,mean_size,q<level>...,degenerate")
    p.add_argument("--model", choices=("bernoulli", "uniform-k"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--delta", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--quantiles", default="0.05,0.5,0.95")
    p.add_argument("--dump-psis", metavar="FILE", help="write one psi per line")

    p = add("oracle", cmd_oracle,
            "Exhaustive enumeration. CSV as expect/meank, or n,k,min_psi,argmin,max_psi,argmax with --extremal")
    p.add_argument("--n", type=int, required=True)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--delta", type=float)
    g.add_argument("--k", type=int)
    p.add_argument("--extremal", action="store_true")

    p = add("extremal", cmd_extremal,
            "Small/large psi constructions. CSV: n,k,kind,size,psi,y,t_effective[,max_reference,min_reference]")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--kind", choices=("smooth", "primes"), required=True)
    p.add_argument("--report-bounds", action="store_true")
    p.add_argument("--theta", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--output", metavar="FILE", help="write the set, one integer per line")

    p = add("poly", cmd_poly,
            "Polynomial value sets. CSV: n,set_size,psi,predictor_name,predicted[,B_prime_cap,B_estimate,B_last_block]")
    p.add_argument("--coeffs", required=True, help='"a0,a1,...,ad", constant term first; write --coeffs=-1,0,1 when a0 is negative')
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--predict", action="store_true")
    p.add_argument("--estimate-B", type=int, metavar="P", help="truncate the B series at primes <= P")
    p.add_argument("--B", type=float, help="second-order constant for an irreducible quadratic")

    p = add("predict", cmd_predict,
            "Main-term predictors. CSV: n,theta,c,delta,k,predict_mean,bernoulli_main_term")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--c", type=float, required=True)

    p = add("suite", cmd_suite, "Acceptance grid. CSV: number,name,status,seconds,detail")
    p.add_argument("--scale", choices=SCALES, default="quick")
    p.add_argument("--only", help="comma-separated check numbers")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            rows = args.func(args)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (UsageError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    emit(rows, args)
    if getattr(args, "suite_failed", False):
        return EXIT_CHECK_FAILED
    return EXIT_OK


def main():
    sys.exit(run())
