"""Command-line interface for the free-stream experiments.

Subcommands:

* ``fsp-sweep``        - constant-state Euler runs over (method, degree)
* ``metric-errors``    - discrete-vs-analytic metric term errors
* ``check-identities`` - divergence defect of the metric rows
* ``bases-selftest``   - quadrature/edge-basis/commutation health check

Every subcommand writes the fixed-format CSV and, unless --no-figure is
given, a PNG summary next to it.

Exit codes: 0 success; 1 a checked tolerance failed; 2 bad configuration;
3 the Euler solver diverged during a sweep.
"""

from __future__ import annotations

import argparse
import sys

from .harness import (
    IDENTITY_TOLERANCE,
    bases_selftest,
    check_identities,
    run_fsp_sweep,
    run_metric_error_sweep,
)
from .metrics import DegenerateElementError, METHODS
from .report import emit_csv, read_csv, render_figure  # noqa: F401

__all__ = ["main", "build_parser"]

_DEFAULT_DEGREES = range(2, 16)


def _parse_mesh(text: str) -> tuple[int, int, int]:
    parts = text.lower().split("x")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"mesh must look like 2x2x2, got {text!r}"
        )
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"mesh dimensions must be integers: {text!r}")
    if any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"mesh dimensions must be positive: {text!r}")
    return dims


def _parse_degree_range(text: str) -> range:
    try:
        lo, hi = (int(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"degree range must look like 2:15, got {text!r}"
        )
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad degree range {text!r}")
    return range(lo, hi + 1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freestream",
        description="Metric-term constructions and free-stream preservation "
        "experiments for a curved-element Euler solver.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--method",
        action="append",
        choices=sorted(METHODS),
        help="metric construction; repeatable, default: all",
    )
    grp = common.add_mutually_exclusive_group()
    grp.add_argument("--degree", type=int, action="append", help="single degree N; repeatable")
    grp.add_argument(
        "--degree-range",
        type=_parse_degree_range,
        metavar="LO:HI",
        help="inclusive degree range, e.g. 2:15 (the default)",
    )
    common.add_argument("--mesh", type=_parse_mesh, default=(2, 2, 2), help="element tiling, e.g. 2x2x2")
    common.add_argument("--amplitude", type=float, default=0.1, help="warp amplitude of the test mapping")
    common.add_argument(
        "--geometry",
        choices=("interpolated", "analytic"),
        default="interpolated",
        help="geometry pathway feeding the projection quadratures",
    )
    common.add_argument("--eval-points", type=int, default=51, help="dense grid points per direction for error norms")
    common.add_argument("--out", default=None, help="CSV output path")
    common.add_argument("--seed", type=int, default=None, help="seed for randomized self-test fields")
    common.add_argument("--no-figure", action="store_true", help="skip the PNG summary")

    p_fsp = sub.add_parser(
        "fsp-sweep", parents=[common], help="constant-state Euler preservation sweep"
    )
    p_fsp.add_argument("--cfl", type=float, default=0.2, help="CFL number for the time step")
    p_fsp.add_argument("--t-end", type=float, default=1.0, help="final time of each run")

    sub.add_parser("metric-errors", parents=[common], help="metric terms vs analytic values")
    sub.add_parser("check-identities", parents=[common], help="divergence defect of metric rows")
    sub.add_parser("bases-selftest", parents=[common], help="basis and quadrature health check")
    return parser


def _degrees(args) -> list[int]:
    if args.degree:
        if any(d < 1 for d in args.degree):
            raise ValueError("degrees must be >= 1")
        return sorted(set(args.degree))
    if args.degree_range is not None:
        return list(args.degree_range)
    return list(_DEFAULT_DEGREES)


def _methods(args) -> list[str]:
    if args.method:
        # de-duplicate but keep the command-line order
        return list(dict.fromkeys(args.method))
    return sorted(METHODS)


def _finish(records, args, default_name: str, kind: str | None) -> None:
    out = args.out or default_name
    path = emit_csv(records, out)
    print(f"wrote {path}")
    if kind is not None and not args.no_figure:
        fig = render_figure(records, path, kind)
        if fig is not None:
            print(f"figure {fig}")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        degrees = _degrees(args)
        methods = _methods(args)
    except ValueError as exc:
        parser.error(str(exc))

    if args.eval_points < 2:
        parser.error("--eval-points must be at least 2")
    if args.command == "fsp-sweep" and args.t_end < 0:
        parser.error("--t-end must be non-negative")
    if args.command == "fsp-sweep" and args.cfl <= 0:
        parser.error("--cfl must be positive")

    try:
        if args.command == "fsp-sweep":
            records = run_fsp_sweep(
                methods,
                degrees,
                dims=args.mesh,
                amplitude=args.amplitude,
                cfl=args.cfl,
                t_end=args.t_end,
                eval_points=args.eval_points,
                pathway=args.geometry,
            )
            for r in records:
                if r.quantity == "rho_e" or r.quantity == "diverged":
                    print(
                        f"{r.method:13s} N={r.degree:2d} {r.quantity:9s} "
                        f"linf={r.linf_error:.3e} ({r.walltime_s:.2f}s)"
                    )
            _finish(records, args, "fsp_sweep.csv", "fsp")
            if any(r.quantity == "diverged" for r in records):
                return 3
            return 0

        if args.command == "metric-errors":
            records = run_metric_error_sweep(
                methods,
                degrees,
                dims=args.mesh,
                amplitude=args.amplitude,
                eval_points=args.eval_points,
                pathway=args.geometry,
            )
            for r in records:
                print(
                    f"{r.method:13s} N={r.degree:2d} l2={r.l2_error:.3e} "
                    f"linf={r.linf_error:.3e}"
                )
            _finish(records, args, "metric_errors.csv", "metric-errors")
            return 0

        if args.command == "check-identities":
            records, ok = check_identities(
                methods,
                degrees,
                dims=args.mesh,
                amplitude=args.amplitude,
                pathway=args.geometry,
            )
            for r in records:
                checked = r.method != "cross"
                status = "PASS" if r.linf_error <= IDENTITY_TOLERANCE else (
                    "FAIL" if checked else "expected-nonzero"
                )
                print(
                    f"{r.method:13s} N={r.degree:2d} scaled defect={r.linf_error:.3e} {status}"
                )
            _finish(records, args, "check_identities.csv", "identities")
            return 0 if ok else 1

        if args.command == "bases-selftest":
            records, ok = bases_selftest(degrees, seed=args.seed)
            for r in records:
                print(f"N={r.degree:2d} {r.quantity:14s} residual={r.linf_error:.3e}")
            _finish(records, args, "bases_selftest.csv", None)
            return 0 if ok else 1
    except DegenerateElementError as exc:
        print(f"error: degenerate geometry: {exc}", file=sys.stderr)
        return 2

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
