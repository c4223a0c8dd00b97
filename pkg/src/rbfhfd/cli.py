"""Command-line front end.

Subcommands print exact series weights, numeric weights, the flat-limit
check, truncation errors and optimal shape parameters, and write the sweep,
convergence and comparison CSV files.  Exit status is 0 on success, 1 on a
numeric failure and 2 on a usage error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import sys

import numpy as np

from . import analysis
from .formulas import FormulaId, KernelKind, weights_auto, weights_series
from .jets import TestFunctionId, default_point
from .series import FlatLimitSingular, NotInvertible, format_series

TRUNC_ENV = "RBFHFD_TRUNC"


def _default_trunc() -> int:
    return int(os.environ.get(TRUNC_ENV, "14"))


def _choice(parse, what):
    def conv(s):
        try:
            return parse(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"unknown {what} {s!r}") from None
    conv.__name__ = what
    return conv


_formula = _choice(FormulaId.parse, "formula")
_kernel = _choice(KernelKind.parse, "kernel")
_testfn = _choice(TestFunctionId.parse, "test function")


def _eps_grid(args) -> list:
    if args.eps_log:
        grid = np.logspace(np.log10(args.eps_start), np.log10(args.eps_stop), args.eps_count)
    else:
        grid = np.linspace(args.eps_start, args.eps_stop, args.eps_count)
    return [float(e) for e in grid]


def _point(args, f: TestFunctionId) -> tuple:
    pt = list(default_point(f))
    if args.x0 is not None:
        pt[0] = args.x0
    if f.dim == 2 and args.y0 is not None:
        pt[1] = args.y0
    return tuple(pt)


def _g(v) -> str:
    return format(float(v), ".17g")


def _fmt_key(k) -> str:
    return ",".join(str(v) for v in k) if isinstance(k, tuple) else str(k)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_derive(args, out) -> int:
    n = args.order or args.trunc
    sw = weights_series(args.formula, args.kernel, n)
    if args.format == "json":
        out.write(sw.to_json() + "\n")
        return 0
    p = args.formula.operator.order
    prefix = "h" if p == 1 else f"h^{p}"
    for k in sorted(sw.alpha, key=_sort_key):
        out.write(f"{prefix}*alpha[{_fmt_key(k)}] = {format_series(sw.alpha[k])}\n")
    for k in sorted(sw.beta, key=_sort_key):
        out.write(f"beta[{_fmt_key(k)}] = {format_series(sw.beta[k])}\n")
    return 0


def _sort_key(k):
    return k if isinstance(k, tuple) else (k,)


def _cmd_weights(args, out) -> int:
    ws = weights_auto(args.formula, args.kernel, args.eps, args.h, n=args.trunc)
    if args.format == "json":
        out.write(json.dumps(ws.to_dict(), indent=2) + "\n")
        return 0
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["formula", "kernel", "eps", "h", "kind", "offset", "value"])
    for kind, table in (("alpha", ws.alpha), ("beta", ws.beta)):
        for k in sorted(table, key=_sort_key):
            w.writerow([ws.formula.value, ws.kernel.value, _g(args.eps), _g(args.h), kind,
                        _fmt_key(k), _g(table[k])])
    if ws.ill_conditioned:
        print(f"warning: condition number {ws.cond:.3g}", file=sys.stderr)
    return 0


def _cmd_flat_check(args, out) -> int:
    bad = 0
    for line in analysis.flat_limit_report():
        out.write(f"{'PASS' if line.ok else 'FAIL'} {line.formula.value}"
                  f"{'' if line.ok else ' ' + line.message}\n")
        bad += not line.ok
    return 1 if bad else 0


def _cmd_lte(args, out) -> int:
    f = args.testfn
    pt = _point(args, f)
    r = analysis.lte_numeric(args.formula, args.kernel, f, pt, args.eps, args.h)
    if args.format == "json":
        out.write(json.dumps({"formula": r.formula.value, "kernel": r.kernel.value,
                              "testfn": f.value, "point": list(pt), "eps": r.eps, "h": r.h,
                              "tau0": r.tau0, "weights_path": r.path}, indent=2) + "\n")
        return 0
    w = csv.writer(out, lineterminator="\n")
    w.writerow(analysis.SWEEP_HEADER)
    w.writerow([r.formula.value, r.kernel.value, f.value, _g(pt[0]),
                _g(pt[1]) if len(pt) > 1 else "", _g(r.eps), _g(r.h), _g(abs(r.tau0))])
    return 0


def _cmd_optimal_eps(args, out) -> int:
    f = args.testfn
    pt = _point(args, f)
    if args.source == "template":
        poly = analysis.lte_poly_template(args.formula, f, pt)
    else:
        poly = analysis.lte_poly_derived(args.formula, args.kernel, f, pt)
    r = analysis.optimal_eps(poly)
    if args.format == "json":
        out.write(json.dumps({"formula": args.formula.value, "testfn": f.value,
                              "point": list(pt), "source": poly.source,
                              "coeffs": list(poly.coeffs), "eps_star": r.eps_star,
                              "z_c": r.z_c, "mechanism": r.mechanism,
                              "real_roots": list(r.candidates)}, indent=2) + "\n")
        return 0
    out.write(f"{r.eps_star:.10f}\n")
    return 0


def _cmd_sweep(args, out) -> int:
    f = args.testfn
    res = analysis.sweep(args.formula, args.kernel, f, _point(args, f), _eps_grid(args), args.h)
    analysis.write_sweep_csv(res, out)
    for eps, h, msg in res.errors:
        print(f"skipped eps={_g(eps)} h={_g(h)}: {msg}", file=sys.stderr)
    return 0


def _cmd_converge(args, out) -> int:
    f = args.testfn
    rows = analysis.convergence(args.formula, args.kernel, f, _point(args, f), args.eps, args.h)
    analysis.write_convergence_csv(args.formula, args.kernel, f, args.eps, rows, out)
    return 0


def _cmd_compare(args, out) -> int:
    f = args.testfn
    rows = analysis.compare_kernels(args.formula, f, _point(args, f), _eps_grid(args), args.h[0])
    analysis.write_compare_csv(args.formula, f, rows, out)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rbfhfd",
        description="Compact RBF-FD formulas with Gaussian and multiquadric kernels.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write to this file instead of stdout")
    common.add_argument("-N", "--trunc", type=int, default=_default_trunc(),
                        help=f"series truncation length (default ${TRUNC_ENV} or 14)")
    common.add_argument("--format", choices=["csv", "text", "json"], default=None,
                        help="output format (tables default to csv, derive to text)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    def add_formula(p, kernel=True):
        p.add_argument("--formula", type=_formula, required=True,
                       help="d1-4 ... d1-10, d2-4 ... d2-10, lap-2, lap-4, lap-6")
        if kernel:
            p.add_argument("--kernel", type=_kernel, default=KernelKind.GAUSSIAN,
                           help="ga (default) or mq")

    def add_testfn(p):
        p.add_argument("--testfn", type=_testfn, required=True, help="u1, u2, u4 ... u9")
        p.add_argument("--x0", type=float, help="reference point x (default per function)")
        p.add_argument("--y0", type=float, help="reference point y (2D functions)")

    def add_eps_range(p):
        p.add_argument("--eps-start", type=float, default=0.01)
        p.add_argument("--eps-stop", type=float, default=4.0)
        p.add_argument("--eps-count", type=int, default=400)
        p.add_argument("--eps-log", action="store_true", help="logarithmic spacing")

    p = add("derive", help="exact series weights in t = (eps*h)^2")
    add_formula(p)
    p.add_argument("--order", type=int, help="number of t-powers to print (default -N)")
    p.set_defaults(func=_cmd_derive, default_format="text")

    p = add("weights", help="numeric weights at one (eps, h)")
    add_formula(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.set_defaults(func=_cmd_weights, default_format="csv")

    p = add("flat-check", help="flat limits against compact FD tables")
    p.set_defaults(func=_cmd_flat_check, default_format="text")

    p = add("lte", help="local truncation error at one (eps, h)")
    add_formula(p)
    add_testfn(p)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--h", type=float, required=True)
    p.set_defaults(func=_cmd_lte, default_format="csv")

    p = add("optimal-eps", help="optimal shape parameter from the LTE polynomial")
    add_formula(p)
    add_testfn(p)
    p.add_argument("--source", choices=["derived", "template"], default="derived",
                   help="LTE polynomial from the series weights or the printed table row")
    p.set_defaults(func=_cmd_optimal_eps, default_format="text")

    p = add("sweep", help="|tau0| over an eps grid and step sizes")
    add_formula(p)
    add_testfn(p)
    add_eps_range(p)
    p.add_argument("--h", type=float, nargs="+", default=[0.1, 0.05, 0.01])
    p.set_defaults(func=_cmd_sweep, default_format="csv")

    p = add("converge", help="observed order under step refinement")
    add_formula(p)
    add_testfn(p)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--h", type=float, nargs="+", default=[0.1, 0.05, 0.025, 0.0125])
    p.set_defaults(func=_cmd_converge, default_format="csv")

    p = add("compare", help="GA vs MQ vs compact FD over an eps grid")
    add_formula(p, kernel=False)
    add_testfn(p)
    add_eps_range(p)
    p.add_argument("--h", type=float, nargs=1, default=[0.01])
    p.set_defaults(func=_cmd_compare, default_format="csv")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.format is None:
        args.format = args.default_format
    if hasattr(args, "testfn") and hasattr(args, "formula"):
        if args.testfn.dim != args.formula.operator.dim:
            print(f"error: {args.testfn.value} does not fit {args.formula.value}",
                  file=sys.stderr)
            return 2
    try:
        with contextlib.ExitStack() as stack:
            if args.output:
                out = stack.enter_context(open(args.output, "w", newline=""))
            else:
                out = sys.stdout
            return args.func(args, out)
    except (ArithmeticError, FlatLimitSingular, NotInvertible, analysis.NoOptimalEps) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
