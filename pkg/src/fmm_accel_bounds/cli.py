"""Command-line front end: ``fmm-bounds {bounds,lebesgue,sample,table,verify}``.

Exit codes: 0 on success, 1 when a bound or property check fails, 2 on
usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import bounds, checks, experiments
from .expansions import lebesgue_constant

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


def parse_orders(text: str) -> list[int]:
    """Parse ``a..b`` (inclusive), a comma list ``3,5,10`` or a single integer."""
    try:
        if ".." in text:
            lo, hi = (int(x) for x in text.split("..", 1))
            if lo > hi:
                raise UsageError(f"empty order range {text!r}")
            values = list(range(lo, hi + 1))
        else:
            values = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"cannot parse order list {text!r}") from None
    if not values or min(values) < 0:
        raise UsageError(f"orders must be non-negative integers, got {text!r}")
    return values


def _orders_arg(text: str) -> list[int]:
    try:
        return parse_orders(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _g(x: float) -> str:
    return format(x, ".17g")


def _emit_rows(header, rows, fmt, out) -> None:
    if fmt == "csv":
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(header)]
    out.write("  ".join(str(h).rjust(w) for h, w in zip(header, widths)) + "\n")
    for row in rows:
        out.write("  ".join(str(v).rjust(w) for v, w in zip(row, widths)) + "\n")


# {{{ commands

def cmd_bounds(args, out) -> int:
    geometry = bounds.ChainGeometry(args.R, args.r)
    staged = None
    if args.R2 is not None or args.r2 is not None:
        if args.R2 is None or args.r2 is None:
            raise UsageError("--R2 and --r2 must be given together")
        staged = bounds.ChainGeometry(args.R, args.r, args.R2, args.r2)
    # validate every row before printing any
    giga = [bounds.GigaqbxBoundInput(p, args.tf) for p in args.p]
    header = ["p", "s2l2l", "s2m2l"] + (["m2l2l"] if staged else []) + ["gigaqbx"]
    rows = []
    for p, g_in in zip(args.p, giga):
        row = [p, _g(bounds.bound_chain_s2l2l(geometry, p)),
               _g(bounds.bound_chain_s2m2l(geometry, p))]
        if staged:
            row.append(_g(bounds.bound_chain_m2l2l(staged, p)))
        row.append(_g(bounds.bound_gigaqbx(g_in)))
        rows.append(row)
    _emit_rows(header, rows, args.format, out)
    return EXIT_OK


def cmd_lebesgue(args, out) -> int:
    rows = []
    for p in args.p:
        asym = _g(bounds.lebesgue_asymptotic(p)) if p >= 1 else ""
        rows.append([p, _g(lebesgue_constant(p)), asym])
    _emit_rows(["p", "lebesgue", "asymptotic"], rows, args.format, out)
    return EXIT_OK


def cmd_sample(args, out) -> int:
    if args.p < 0 or args.q < 0:
        raise UsageError("orders must be non-negative")
    sample = experiments.sample_scenario(args.chain, args.seed, args.size_scale)
    sample = replace(sample, orders=(args.p, args.q))
    err = experiments.measure_error(sample, args.p, args.q)
    bound = experiments.chain_bound(sample, args.p)
    ratio = err / bound if bound > 0 else float("inf")
    g = sample.geometry
    header = ["chain", "p", "q", "R", "r", "R2", "r2", "error", "bound", "ratio"]
    row = [sample.chain, args.p, args.q, _g(g.R), _g(g.r),
           "" if g.R_prime is None else _g(g.R_prime),
           "" if g.r_prime is None else _g(g.r_prime),
           _g(err), _g(bound), _g(ratio)]
    _emit_rows(header, [row], args.format, out)
    if args.dump:
        payload = {
            "sample": sample.to_dict(),
            "chain_expansion": experiments.chain_expansion(sample, args.p, args.q).to_dict(),
            "reference_expansion": experiments.reference_expansion(sample, args.q).to_dict(),
        }
        try:
            Path(args.dump).write_text(json.dumps(payload, indent=2) + "\n")
        except OSError as exc:
            raise UsageError(f"cannot write {args.dump}: {exc}") from None
    return EXIT_OK if ratio <= experiments.VIOLATION_SLACK else EXIT_FAIL


def _table_config(args) -> experiments.ExperimentConfig:
    config = (experiments.load_config(args.config) if args.config
              else experiments.ExperimentConfig())
    overrides = {}
    if args.chains is not None:
        overrides["chains"] = tuple(c for c in args.chains.split(",") if c)
    if args.full:
        overrides["orders"] = experiments.FULL_ORDERS
    if args.orders is not None:
        overrides["orders"] = tuple(args.orders)
    for key in ("samples_per_cell", "seed", "size_scale", "output_path"):
        if getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    if args.report_format is not None:
        overrides["format"] = args.report_format
    try:
        return replace(config, **overrides)
    except TypeError as exc:
        raise experiments.ConfigError(str(exc)) from None


def cmd_table(args, out) -> int:
    config = _table_config(args)
    reports = experiments.run_config(config)
    if args.format == "csv":
        out.write(experiments.reports_to_csv(reports))
        summary = sys.stderr
    else:
        summary = out
    ok = True
    for rep in reports:
        status = "ok" if rep.max_ratio <= experiments.VIOLATION_SLACK else "VIOLATION"
        ok &= status == "ok"
        summary.write(f"{rep.chain}: max_ratio={rep.max_ratio:.6f} "
                      f"mean_ratio={rep.mean_ratio:.6f} samples/cell={rep.samples} "
                      f"discarded={rep.discarded} {status}\n")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_verify(args, out) -> int:
    results = checks.run_suite(args.level, args.seed)
    if args.format == "csv":
        rows = [[r.name, "pass" if r.passed else "fail", _g(r.worst), _g(r.tolerance), r.cases]
                for r in results]
        _emit_rows(["property", "status", "worst", "tolerance", "cases"], rows, "csv", out)
    else:
        for r in results:
            out.write(r.line() + "\n")
    failed = [r.name for r in results if not r.passed]
    if failed:
        sys.stderr.write("failing properties: " + ", ".join(failed) + "\n")
        return EXIT_FAIL
    return EXIT_OK

# }}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmm-bounds",
        description="Acceleration-error bounds for Laplace FMM translation chains.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_format(p):
        p.add_argument("--format", choices=("text", "csv"), default="text",
                       help="output format on standard output")

    p = sub.add_parser("bounds", help="tabulate the closed-form chain bounds")
    p.add_argument("--R", type=float, required=True, help="outer separation R")
    p.add_argument("--r", type=float, required=True, help="inner radius r")
    p.add_argument("--R2", type=float, help="second-stage separation R' (three-stage chain)")
    p.add_argument("--r2", type=float, help="second-stage radius r' (three-stage chain)")
    p.add_argument("--tf", type=float, default=0.0, help="GIGAQBX target confinement factor")
    p.add_argument("--p", type=_orders_arg, default=parse_orders("3..10"),
                   help="orders, e.g. 3..10 or 3,5,10 (default 3..10)")
    add_format(p)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("lebesgue", help="Lebesgue constants and their asymptotic form")
    p.add_argument("--p", type=_orders_arg, default=parse_orders("0..10"),
                   help="orders, e.g. 0..10 or 1,10,100 (default 0..10)")
    add_format(p)
    p.set_defaults(func=cmd_lebesgue)

    p = sub.add_parser("sample", help="measure one random scenario")
    p.add_argument("--chain", choices=experiments.CHAINS, required=True)
    p.add_argument("--p", type=int, default=5)
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size-scale", type=float, default=1.0, dest="size_scale")
    p.add_argument("--dump", metavar="PATH", help="write the sample and expansions as JSON")
    add_format(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("table", help="estimate the leading constants of the chain bounds")
    p.add_argument("--config", metavar="PATH", help="experiment config JSON")
    p.add_argument("--chains", help="comma-separated subset of " + ",".join(experiments.CHAINS))
    p.add_argument("--orders", type=_orders_arg, help="order set for p and q (default 3,5,10)")
    p.add_argument("--full", action="store_true", help="use the order set 3,5,10,15,20")
    p.add_argument("--samples", type=int, dest="samples_per_cell")
    p.add_argument("--seed", type=int)
    p.add_argument("--size-scale", type=float, dest="size_scale")
    p.add_argument("--out", dest="output_path", metavar="PATH", help="report file")
    p.add_argument("--report-format", choices=("csv", "json"), dest="report_format")
    add_format(p)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("verify", help="run the randomized property suites")
    p.add_argument("--level", choices=tuple(checks.LEVELS), default="quick")
    p.add_argument("--seed", type=int, default=0)
    add_format(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args, out)
    except (UsageError, ValueError) as exc:
        sys.stderr.write(f"fmm-bounds {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"fmm-bounds {args.command}: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
