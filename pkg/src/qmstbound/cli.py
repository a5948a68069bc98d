"""Command line front end: generate instances, solve bounds, run self-checks.

Parameter precedence for `solve`: command line flags beat QMST_* environment
variables beat built-in defaults (for example `QMST_NOUTERMAX=5` is read for
--noutermax when the flag is absent).

The solve report is one CSV row with the fixed column set

    n,d,m,UB,LB_DNN,gap_dnn,time_dnn,LB_CUTS,gap_cuts,time_total,iterations,cuts,closed

written to stdout and appended to --csv when given (header written once).
Gap columns are 100*(UB-LB)/UB; `closed` is the share of the DNN gap closed
by cuts, 100*(LB_CUTS-LB_DNN)/(UB-LB_DNN).  Columns needing an unknown UB
stay blank.  Solver progress goes to stderr.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from dataclasses import replace
from pathlib import Path

from .instances import (DENSITIES, FAMILIES, InstanceFormatError, InstanceSpec,
                        generate, read_instance, write_instance)
from .solver import PrsmParams, solve_bound
from .validation import run_all

CSV_COLUMNS = ["n", "d", "m", "UB", "LB_DNN", "gap_dnn", "time_dnn",
               "LB_CUTS", "gap_cuts", "time_total", "iterations", "cuts",
               "closed"]

# (name, cast); flag is --<name with underscores as dashes>, env is QMST_<upper name>
_PARAM_FIELDS = [
    ("tau", float),
    ("gamma1", float),
    ("gamma2", float),
    ("eps_prsm", float),
    ("eps_proj", float),
    ("cut_violation_eps", float),
    ("ncutsmax", int),
    ("ncutsmin", int),
    ("epslbimprov", float),
    ("noutermax", int),
    ("max_total_iters", int),
    ("time_limit", float),
]


def _env_value(name: str, cast):
    raw = os.environ.get(f"QMST_{name.upper()}")
    if raw is None:
        return None
    try:
        return cast(raw)
    except ValueError:
        raise SystemExit(f"error: environment QMST_{name.upper()}={raw!r} "
                         f"is not a valid {cast.__name__}")


def _build_params(args: argparse.Namespace) -> PrsmParams:
    params = PrsmParams()
    overrides = {}
    for name, cast in _PARAM_FIELDS:
        value = getattr(args, name)
        if value is None:
            value = _env_value(name, cast)
        if value is not None:
            overrides[name] = value
    if args.no_cuts:
        overrides["noutermax"] = 1
    if overrides:
        params = replace(params, **overrides)
    params.validate()
    return params


def _fmt_bound(x: float) -> str:
    return format(x, ".10g")


def _solve_row(inst, res) -> dict:
    n, m = inst.n, inst.m
    ub = inst.ub
    row = {
        "n": n,
        "d": round(200.0 * m / (n * (n - 1))),
        "m": m,
        "UB": _fmt_bound(ub) if ub is not None else "",
        "LB_DNN": _fmt_bound(res.lb_dnn),
        "time_dnn": format(res.time_dnn, ".2f"),
        "LB_CUTS": _fmt_bound(res.lb_cuts),
        "time_total": format(res.time_total, ".2f"),
        "iterations": res.iterations,
        "cuts": res.cuts_added,
        "gap_dnn": "",
        "gap_cuts": "",
        "closed": "",
    }
    if ub is not None and ub > 0:
        row["gap_dnn"] = format(100.0 * (ub - res.lb_dnn) / ub, ".4f")
        row["gap_cuts"] = format(100.0 * (ub - res.lb_cuts) / ub, ".4f")
    if ub is not None and ub - res.lb_dnn > 1e-12:
        row["closed"] = format(
            100.0 * (res.lb_cuts - res.lb_dnn) / (ub - res.lb_dnn), ".4f")
    return row


def _append_csv(path: Path, row: dict) -> None:
    fresh = not path.exists() or path.stat().st_size == 0
    with path.open("a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        if fresh:
            writer.writeheader()
        writer.writerow(row)


def cmd_generate(args: argparse.Namespace) -> int:
    density = args.d
    if density is None:
        density = _env_value("d", int)
    if density is None:
        density = 100
    try:
        spec = InstanceSpec(family=args.family, n=args.n, density=density,
                            seed=args.seed, cmax_diag=args.cmax_diag,
                            cmax_off=args.cmax_off)
        inst = generate(spec)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_instance(inst, args.out)
    print(f"wrote {args.out} ({spec.family}, n={inst.n}, m={inst.m}, "
          f"d={spec.density}, seed={spec.seed})")
    return 0


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        inst = read_instance(args.instance)
    except (InstanceFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.ub is not None:
        inst.ub = args.ub
    try:
        params = _build_params(args)
        res = solve_bound(inst, params)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    for r in res.outer_log:
        print(
            f"round {r.index}: valid lb {r.valid_lb.value:.6f}, "
            f"{r.inner_iterations} iterations, residuals "
            f"{r.primal_residual:.2e}/{r.dual_residual:.2e}, "
            f"cuts +{r.n_cuts_added} (found {r.n_violated_found}, "
            f"active {r.n_active_cuts}), stop {r.inner_stop}",
            file=sys.stderr,
        )
    print(f"termination: {res.termination_reason}", file=sys.stderr)

    row = _solve_row(inst, res)
    writer = csv.DictWriter(sys.stdout, fieldnames=CSV_COLUMNS)
    writer.writeheader()
    writer.writerow(row)
    if args.csv is not None:
        _append_csv(Path(args.csv), row)
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    reports = run_all()
    ok = True
    for rep in reports:
        for line in rep.lines():
            print(line)
        ok = ok and rep.passed
    print("all checks passed" if ok else "CHECKS FAILED")
    return 0 if ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmstbound",
        description="Lower bounds for the quadratic minimum spanning tree problem.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="generate a benchmark instance file")
    p_gen.add_argument("--family", required=True, choices=FAMILIES)
    p_gen.add_argument("--n", required=True, type=int, help="vertex count")
    p_gen.add_argument("--d", type=int, choices=DENSITIES, default=None,
                       help="edge density percent (default 100)")
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("--cmax-diag", type=float, default=100.0,
                       help="SV only: maximum diagonal cost")
    p_gen.add_argument("--cmax-off", type=float, default=100.0,
                       help="SV only: maximum interaction cost")
    p_gen.add_argument("--out", required=True, help="output instance path")
    p_gen.set_defaults(func=cmd_generate)

    p_solve = sub.add_parser("solve", help="compute lower bounds for an instance")
    p_solve.add_argument("instance", help="instance file path")
    p_solve.add_argument("--ub", type=float, default=None,
                         help="known upper bound (overrides the file value)")
    p_solve.add_argument("--csv", default=None,
                         help="append the result row to this CSV file")
    p_solve.add_argument("--no-cuts", action="store_true",
                         help="stop after the cut-free relaxation")
    for name, cast in _PARAM_FIELDS:
        p_solve.add_argument(f"--{name.replace('_', '-')}", type=cast,
                             default=None, dest=name)
    p_solve.set_defaults(func=cmd_solve)

    p_val = sub.add_parser("validate", help="run the model self-checks")
    p_val.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
