"""Command-line interface.

Exit status: 0 success, 1 usage error, 2 numerical failure, 3 a check ran
and the property failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import sys
from concurrent.futures import ProcessPoolExecutor

import mpmath

from . import asymptotics, chain
from ._precision import EXTENDED_MIN_DIGITS, STANDARD_DIGITS, format_number, get_context, to_real
from .curvature import curvature_breakdown
from .exceptions import AnnulusError, ChainValidationError, DomainError
from .extremal import curvature_extremal
from .kernel import JET_INDICES, Annulus, TruncationPolicy, kernel_jet

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3

CHAIN_HELP = """\
chain specification (YAML or JSON):

  length: 6                                   # materialization length J
  R: {rule: geometric, first: 0.5, ratio: 0.5}
       # or {rule: power, first: 0.5, exponent: 2}   (R_j = first * j^-exponent)
  ratio: {rule: geometric, first: 0.05, ratio: 0.05}
       # r_j / R_j; or {rule: harmonic, offset: 2}  (r_j/R_j = 1/(j + offset))
  s: {safety: 0.9}                            # s_j = safety * (largest admissible chord)
  condition_iii: literal                      # or scaled: T_j = R_j (1 - (r_j/R_j)^0.3)

or explicit lists: R: [...], r: [...], s: [...] (s one entry shorter).
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _global_flags():
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("--precision-digits", type=int,
                   help="significant digits (default 16; 50 or more selects extended precision)")
    p.add_argument("--tolerance", type=float, help="absolute series tail tolerance")
    p.add_argument("--max-terms", type=int, help="series term cap (default 100000)")
    p.add_argument("--format", choices=("csv", "text"), help="output format")
    return p


GLOBAL_DEFAULTS = {"precision_digits": STANDARD_DIGITS, "tolerance": None,
                   "max_terms": 100_000, "format": None}


def build_parser():
    common = _global_flags()
    parser = _Parser(prog="annulus-bergman", parents=[common],
                     description="Bergman kernel and curvature of annuli.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("kernel", parents=[common], help="kernel value and derivative jet")
    p.add_argument("--r", required=True)
    p.add_argument("--z", required=True, help="point, e.g. 0.5 or 0.3+0.4j")

    p = sub.add_parser("curvature", parents=[common], help="24-term curvature breakdown")
    p.add_argument("--r", required=True)
    p.add_argument("--z", required=True)

    p = sub.add_parser("sweep", parents=[common], help="curvature along (r, 1) as CSV")
    p.add_argument("--r", required=True)
    p.add_argument("--samples", type=int, default=500)
    p.add_argument("--start", help="first abscissa (default r + 0.001 (1 - r))")
    p.add_argument("--stop", help="abscissa bound, excluded (default 1 - 0.001 (1 - r))")
    p.add_argument("--output", "-o", help="write CSV here instead of stdout")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")

    p = sub.add_parser("asymptotics", parents=[common], help="coefficient table comparison")
    p.add_argument("--case", choices=("sqrt", "r310"), required=True)

    p = sub.add_parser("theorem01", parents=[common], help="limits at sqrt(r) and r^(3/10)")
    p.add_argument("--part", type=int, choices=(1, 2), required=True)
    p.add_argument("--r-values", nargs="+", help="decreasing r values")

    p = sub.add_parser("chain", parents=[common], help="build a chain and check the lens lemma",
                       epilog=CHAIN_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--spec", required=True, help="chain specification file")
    p.add_argument("--level", type=float, default=-1.0)

    p = sub.add_parser("crosscheck", parents=[common],
                       help="24-term sum vs direct formula vs extremal problems")
    p.add_argument("--r-values", nargs="+", default=["0.05", "0.1", "0.3"])
    p.add_argument("--points", type=int, default=10)
    p.add_argument("--threshold", type=float, default=1e-6)
    return parser


def _policy(args):
    try:
        return TruncationPolicy(args.tolerance, args.max_terms)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _emit(rows, header, fmt, out):
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    else:
        widths = [max(len(str(x)) for x in col) for col in zip(header, *rows)]
        for row in [header, *rows]:
            out.write("  ".join(str(x).ljust(n) for x, n in zip(row, widths)).rstrip() + "\n")


def cmd_kernel(args, out):
    ctx = get_context(args.precision_digits)
    jet = kernel_jet(Annulus(args.r), args.z, _policy(args), args.precision_digits)
    fmt = lambda x: format_number(ctx, x)  # noqa: E731
    rows = []
    for a, b in JET_INDICES:
        v = jet.entry(a, b)
        re, im = (v.real, v.imag) if hasattr(v, "imag") else (v, 0)
        rows.append([f"({a},{b})", fmt(re), fmt(im)])
    _emit(rows, ["entry", "real", "imag"], args.format or "text", out)
    if (args.format or "text") == "text":
        out.write(f"terms={jet.terms} tail_bound={float(jet.tail_bound):.3g} "
                  f"condition={float(jet.condition):.3g}\n")
    return EXIT_OK


def cmd_curvature(args, out):
    ctx = get_context(args.precision_digits)
    b = curvature_breakdown(Annulus(args.r), args.z, _policy(args), args.precision_digits)
    fmt = lambda x: format_number(ctx, x)  # noqa: E731
    rows = [["g", fmt(b.g)], ["S", fmt(b.S)]]
    rows += [[f"A{j}", fmt(v)] for j, v in enumerate(b.a_terms, 1)]
    rows += [["R", fmt(b.R)], ["R_direct", fmt(b.R_direct)], ["discrepancy", fmt(b.discrepancy)]]
    _emit(rows, ["quantity", "value"], args.format or "text", out)
    return EXIT_OK


def sweep_abscissae(ctx, r, samples, start=None, stop=None):
    """``z_i = a + ((b - a) i)/n``; doubling ``n`` reproduces every old point bit for bit."""
    r = to_real(ctx, r)
    a = to_real(ctx, start) if start is not None else r + (1 - r) / 1000
    b = to_real(ctx, stop) if stop is not None else 1 - (1 - r) / 1000
    if not r < a < b < 1:
        raise UsageError(f"sweep range must satisfy r < start < stop < 1, got ({a}, {b})")
    return [a + ((b - a) * i) / samples for i in range(samples)]


def _sweep_row(task):
    r, z, digits, tolerance, max_terms = task
    ctx = get_context(digits)
    try:
        b = curvature_breakdown(Annulus(r), z, TruncationPolicy(tolerance, max_terms), digits)
        return [format_number(ctx, z), format_number(ctx, b.R), format_number(ctx, b.g),
                format_number(ctx, b.K)], None
    except AnnulusError as exc:
        return [format_number(ctx, z), "", "", ""], f"{type(exc).__name__}: {exc}"


def cmd_sweep(args, out):
    if args.samples < 2:
        raise UsageError("--samples must be at least 2")
    ctx = get_context(args.precision_digits)
    try:
        Annulus(args.r)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    zs = sweep_abscissae(ctx, args.r, args.samples, args.start, args.stop)
    _policy(args)
    tasks = [(args.r, z, args.precision_digits, args.tolerance, args.max_terms) for z in zs]
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_sweep_row, tasks, chunksize=max(1, len(tasks) // (4 * args.jobs))))
    else:
        results = [_sweep_row(t) for t in tasks]
    failed = any(err for _, err in results)
    header = ["z", "R", "g", "K"] + (["error"] if failed else [])
    rows = [row + ([err or ""] if failed else []) for row, err in results]
    buf = io.StringIO()
    _emit(rows, header, args.format or "csv", buf)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        out.write(buf.getvalue())
    if failed:
        sys.stderr.write("sweep: some points failed; output is partial\n")
        return EXIT_NUMERICAL
    return EXIT_OK


def _fmt_coef(x):
    return repr(round(float(x), 12))


def cmd_asymptotics(args, out):
    digits = args.precision_digits if args.precision_digits >= EXTENDED_MIN_DIGITS else None
    rows_out = []
    all_ok = True
    for row in asymptotics.verify_aj_tables(args.case, precision_digits=digits):
        all_ok &= row.passed
        for label, e, ref in zip(row.labels, row.extracted, row.reference):
            rows_out.append([row.term_index, row.kind, label, _fmt_coef(e), _fmt_coef(ref),
                             "pass" if row.passed else "FAIL"])
    _emit(rows_out, ["term", "kind", "basis", "extracted", "reference", "row_status"],
          args.format or "csv", out)
    return EXIT_OK if all_ok else EXIT_VERIFY


def _decreasing(values):
    return all(b < a for a, b in zip(values, values[1:]))


def cmd_theorem01(args, out):
    digits = args.precision_digits if args.precision_digits >= EXTENDED_MIN_DIGITS else None
    nstr = lambda x: mpmath.nstr(x, 15)  # noqa: E731
    if args.part == 1:
        rs = args.r_values or ["1e-3", "1e-4", "1e-5", "1e-6", "1e-7"]
        rows = asymptotics.verify_sqrt_divergence(rs, digits)
        norm = [float(n) for _, _, n in rows]
        Rs = [float(R) for _, R, _ in rows]
        ok = (_decreasing(Rs) and all(R < 0 for R in Rs)
              and _decreasing([abs(n - 1) for n in norm])
              and all(0.8 < n < 1.2 for r, n in zip(rs, norm) if float(r) <= 1e-5))
        table = [[nstr(r), nstr(R), nstr(n)] for r, R, n in rows]
        header = ["r", "R_sqrt_r", "R_times_2r_log_r2"]
    else:
        rs = args.r_values or [f"1e-{k}" for k in range(2, 13, 2)]
        rows = asymptotics.verify_r310_limit(rs, digits)
        a = [R for _, R, _ in rows]
        ok = (all(x < 2 for x in a) and all(y > x for x, y in zip(a, a[1:]))
              and all(abs(x - y) < 1e-9 for _, x, y in rows))
        table = [[nstr(r), nstr(x), nstr(y), nstr(2 - x)] for r, x, y in rows]
        header = ["r", "R_r310", "R_r710", "gap_to_2"]
    _emit(table, header, args.format or "text", out)
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_chain(args, out):
    try:
        spec = chain.load_chain_spec(args.spec)
    except OSError as exc:
        raise UsageError(f"cannot read {args.spec}: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad chain specification: {exc}") from None
    try:
        geom = chain.build_chain(spec)
    except ChainValidationError as exc:
        sys.stderr.write(f"chain rejected: {exc}\n")
        return EXIT_VERIFY
    reports = chain.check_chain(geom, args.level)
    rows = []
    for rep in reports:
        rows.append([rep.overlap, rep.home, repr(rep.z0.real), "pass" if rep.analytic_ok else "FAIL",
                     "pass" if rep.angles_ok else "FAIL", "pass" if rep.constant_ok else "FAIL",
                     rep.samples, rep.sublevel, rep.escapes, "pass" if rep.passed else "FAIL"])
    fmt = args.format or "text"
    if fmt == "text":
        out.write(f"annuli: {geom.length}  zeta: {geom.zeta!r}\n")
        for k, v in geom.status.items():
            out.write(f"condition ({k}): {v}\n")
    _emit(rows, ["overlap", "home", "z0", "inequality", "angles", "constant", "samples",
                 "sublevel", "escapes", "status"], fmt, out)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_VERIFY


def crosscheck_grid(r, points):
    """Interior radii of ``(r, 1)`` used by the crosscheck."""
    r = float(r)
    return [r + (1 - r) * k / (points + 1) for k in range(1, points + 1)]


def cmd_crosscheck(args, out):
    digits = args.precision_digits
    policy = _policy(args)
    rows, worst = [], 0.0
    for r in args.r_values:
        ann = Annulus(r)
        for x in crosscheck_grid(r, args.points):
            b = curvature_breakdown(ann, x, policy, digits)
            ext = curvature_extremal(ann, x, digits=digits)
            d = max(abs(b.R - b.R_direct), abs(b.R - ext), abs(b.R_direct - ext))
            worst = max(worst, float(d))
            rows.append([r, repr(x), repr(float(b.R)), repr(float(b.R_direct)), repr(float(ext)),
                         f"{float(d):.3g}"])
    _emit(rows, ["r", "z", "R_sum", "R_direct", "R_extremal", "max_diff"], args.format or "text", out)
    return EXIT_OK if worst < args.threshold else EXIT_VERIFY


COMMANDS = {
    "kernel": cmd_kernel, "curvature": cmd_curvature, "sweep": cmd_sweep,
    "asymptotics": cmd_asymptotics, "theorem01": cmd_theorem01, "chain": cmd_chain,
    "crosscheck": cmd_crosscheck,
}


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    if args.precision_digits < 1:
        sys.stderr.write("--precision-digits must be positive\n")
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, DomainError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except AnnulusError as exc:
        sys.stderr.write(f"numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERICAL
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
