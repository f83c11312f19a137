"""Command-line front end.

Exit codes: 0 success, 1 usage or validation error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .coeffile import CoefficientFile, CoefficientFileError
from .evaluator import Interpolant, max_rel_error, uniform_samples
from .functions import FUNCTIONS, get_function
from .multiindex import carry_count, fiber_tubes_from_tubes, fibers_from_tubes, lp_set
from .transform import diff_coeffs, fnt_forward, fnt_inverse, plan as make_plan


class UsageError(Exception):
    pass


class NumericalError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _parse_p(text: str) -> float:
    if text.lower() in ("inf", "infinity", "oo"):
        return math.inf
    try:
        p = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid exponent {text!r}") from None
    if not p > 0:
        raise argparse.ArgumentTypeError("p must be positive or inf")
    return p


def _parse_int_list(text: str) -> list:
    try:
        values = [int(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _fmt_p(p: float) -> str:
    return "inf" if math.isinf(p) else f"{p:g}"


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", newline=""), True


def _write_csv(path, comments: dict, header: list, rows: list) -> None:
    fh, close = _open_out(path)
    try:
        fh.write(f"# fastnewton {__version__}\n")
        fh.write("# " + " ".join(f"{k}={v}" for k, v in comments.items()) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    finally:
        if close:
            fh.close()


def _require_finite(arr, what: str) -> None:
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"non-finite values in {what}")


def _positive_m(m: int) -> int:
    if m < 1:
        raise UsageError(f"m must be at least 1, got {m}")
    return m


# ---------------------------------------------------------------------------
# subcommands


def cmd_projections(args) -> int:
    m = args.m_pos if args.m_pos is not None else args.m
    n = args.n_pos if args.n_pos is not None else args.n
    p = args.p_pos if args.p_pos is not None else args.p
    if m is None or n is None:
        raise UsageError("projections needs m and n")
    A = lp_set(_positive_m(m), n, p)
    T = A.tubes
    F = fibers_from_tubes(T)
    S = fiber_tubes_from_tubes(T)
    kappa = carry_count(T, len(A))
    out = [f"A = A_{{{m},{n},{_fmt_p(p)}}}", f"|A| = {len(A)}", "T:"]
    out += [f"  t_{i} = " + "(" + ",".join(map(str, r)) + ")" for i, r in enumerate(T.rows, 1)]
    out.append("F:")
    out += [f"  f_{i} = " + "(" + ",".join(map(str, r)) + ")" for i, r in enumerate(F.rows, 1)]
    out.append("S:")
    out += [f"  S_{i} = {line}" for i, line in enumerate(str(S).splitlines(), 1)]
    out.append(f"||T|| = {T.norm}")
    out.append(f"kappa = {kappa} = {float(kappa):g}")
    print("\n".join(out))
    return 0


def _build(args, m=None, n=None):
    m = _positive_m(args.m if m is None else m)
    n = args.n if n is None else n
    if n is None or n < 0:
        raise UsageError("--n must be a non-negative integer")
    t0 = time.perf_counter()
    A = lp_set(m, n, args.p)
    P = make_plan(A, kind=args.basis)
    return P, time.perf_counter() - t0


def cmd_transform(args) -> int:
    try:
        fn = get_function(args.function, args.m)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out is None:
        raise UsageError("transform needs --out")
    P, t_plan = _build(args)
    values = fn(P.grid.points())
    _require_finite(values, "function samples")
    t0 = time.perf_counter()
    c = fnt_forward(P, values)
    t_transform = time.perf_counter() - t0
    _require_finite(c, "coefficients")
    CoefficientFile.from_plan(P, c).save(args.out)
    print(f"|A| = {P.size}")
    print(f"kappa = {float(carry_count(P.T, P.size)):g}")
    print(f"plan_ms = {1e3 * t_plan:.3f}")
    print(f"transform_ms = {1e3 * t_transform:.3f}")
    return 0


def _read_points(path, m: int) -> np.ndarray:
    fh = sys.stdin if path == "-" else open(path, newline="")
    try:
        rows = []
        for rec in csv.reader(line for line in fh if not line.lstrip().startswith("#")):
            if not rec or all(not v.strip() for v in rec):
                continue
            try:
                rows.append([float(v) for v in rec])
            except ValueError:
                if rows:
                    raise UsageError(f"non-numeric row in points file: {rec}") from None
                continue  # header row
    finally:
        if fh is not sys.stdin:
            fh.close()
    pts = np.array(rows, dtype=float).reshape(-1, m) if rows and all(len(r) == m for r in rows) else None
    if pts is None:
        bad = next((len(r) for r in rows if len(r) != m), 0)
        raise UsageError(f"points must have {m} columns, found a row with {bad}")
    return pts


def _load(path) -> CoefficientFile:
    try:
        return CoefficientFile.load(path)
    except (OSError, CoefficientFileError) as exc:
        raise UsageError(f"cannot read coefficient file {path}: {exc}") from None


def cmd_evaluate(args) -> int:
    cf = _load(args.coeff_file)
    P = cf.to_plan()
    pts = _read_points(args.points, cf.m)
    q = Interpolant(P, cf.coeffs)(pts)
    _require_finite(q, "evaluated values")
    header = [f"x{i}" for i in range(1, cf.m + 1)] + ["value"]
    rows = [[repr(float(v)) for v in pt] + [repr(float(val))] for pt, val in zip(pts, q)]
    _write_csv(args.out, {"command": "evaluate", "file": args.coeff_file, "kind": cf.kind, "m": cf.m}, header, rows)
    return 0


def cmd_diff(args) -> int:
    cf = _load(args.coeff_file)
    if not 1 <= args.axis <= cf.m:
        raise UsageError(f"--axis must lie in 1..{cf.m}")
    if args.out is None:
        raise UsageError("diff needs --out")
    P = cf.to_plan()
    d = diff_coeffs(P, cf.coeffs, args.axis)
    _require_finite(d, "derivative coefficients")
    CoefficientFile(cf.kind, cf.axes, cf.tubes, d).save(args.out)
    return 0


def _median_ms(fn, reps: int) -> float:
    times = []
    for _ in range(reps):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return 1e3 * float(np.median(times))


def cmd_convergence(args) -> int:
    try:
        fn = get_function(args.function, args.m)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    samples = uniform_samples(args.m, args.samples, args.seed)
    rows = []
    for n in args.n_list:
        P, t_plan = _build(args, n=n)
        values = fn(P.grid.points())
        c = fnt_forward(P, values)
        _require_finite(c, "coefficients")
        t_tr = _median_ms(lambda: fnt_forward(P, values), args.reps)
        err = max_rel_error(Interpolant(P, c), fn, samples)
        rows.append([n, P.size, repr(err), f"{1e3 * t_plan:.3f}", f"{t_tr:.3f}"])
    comments = {"command": "convergence", "function": args.function, "m": args.m, "p": _fmt_p(args.p),
                "basis": args.basis, "n": ",".join(map(str, args.n_list)), "samples": args.samples,
                "seed": args.seed, "reps": args.reps}
    _write_csv(args.out, comments, ["n", "card", "max_rel_error", "t_plan_ms", "t_transform_ms"], rows)
    return 0


def cmd_bench(args) -> int:
    rows = []
    rng = np.random.default_rng(args.seed)
    for n in args.n_list:
        P, t_plan = _build(args, n=n)
        x = rng.standard_normal(P.size)
        fnt_forward(P, x)  # warm-up
        t_fwd = _median_ms(lambda: fnt_forward(P, x), args.reps)
        t_inv = _median_ms(lambda: fnt_inverse(P, x), args.reps)
        nbar = P.set.mean_degree
        work = P.size * P.m * Fraction(nbar)
        rows.append([n, P.size, f"{float(nbar):.6g}", f"{float(work):.6g}",
                     f"{1e3 * t_plan:.3f}", f"{t_fwd:.4f}", f"{t_inv:.4f}"])
    comments = {"command": "bench", "m": args.m, "p": _fmt_p(args.p), "basis": args.basis,
                "n": ",".join(map(str, args.n_list)), "reps": args.reps, "seed": args.seed}
    header = ["n", "card", "mean_degree", "card_m_nbar", "t_plan_ms", "t_forward_ms", "t_inverse_ms"]
    _write_csv(args.out, comments, header, rows)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fnt", description="Fast Newton transforms on downward closed sets.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def set_args(sp, n_default=None, list_n=False):
        sp.add_argument("--m", type=int, default=1, help="spatial dimension")
        if list_n:
            sp.add_argument("--n", dest="n_list", type=_parse_int_list, default=[25, 50, 100, 200],
                            help="comma-separated degrees")
        else:
            sp.add_argument("--n", type=int, default=n_default, help="degree")
        sp.add_argument("--p", type=_parse_p, default=2.0, help="l^p exponent (positive or inf)")
        sp.add_argument("--basis", choices=("newton", "chebyshev"), default="newton")

    sp = sub.add_parser("projections", help="print tube, fiber and fiber-tube projections")
    sp.add_argument("m_pos", nargs="?", type=int, metavar="m")
    sp.add_argument("n_pos", nargs="?", type=int, metavar="n")
    sp.add_argument("p_pos", nargs="?", type=_parse_p, metavar="p")
    sp.add_argument("--m", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--p", type=_parse_p, default=2.0)
    sp.set_defaults(func=cmd_projections)

    sp = sub.add_parser("transform", help="interpolate a test function and write a coefficient file")
    set_args(sp, n_default=10)
    sp.add_argument("--function", choices=list(FUNCTIONS), default="runge")
    sp.add_argument("--out", help="coefficient file to write")
    sp.set_defaults(func=cmd_transform)

    sp = sub.add_parser("evaluate", help="evaluate a coefficient file at points from a CSV")
    sp.add_argument("coeff_file")
    sp.add_argument("--points", required=True, help="CSV with one point per row ('-' for stdin)")
    sp.add_argument("--out", help="output CSV (default stdout)")
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("diff", help="differentiate a coefficient file along one axis")
    sp.add_argument("coeff_file")
    sp.add_argument("--axis", type=int, default=1, help="1-based axis")
    sp.add_argument("--out", help="coefficient file to write")
    sp.set_defaults(func=cmd_diff)

    sp = sub.add_parser("convergence", help="error and timing versus degree (CSV)",
                        description="Relative error is max|q - f| / max|f| over seeded uniform samples.")
    set_args(sp, list_n=True)
    sp.add_argument("--function", choices=list(FUNCTIONS), default="runge")
    sp.add_argument("--samples", type=int, default=10**5)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--reps", type=int, default=10)
    sp.add_argument("--out", help="output CSV (default stdout)")
    sp.set_defaults(func=cmd_convergence)

    sp = sub.add_parser("bench", help="repeat-call transform timings versus degree (CSV)")
    set_args(sp, list_n=True)
    sp.set_defaults(m=3)
    sp.add_argument("--reps", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="output CSV (default stdout)")
    sp.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"fnt: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"fnt: numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError) as exc:
        print(f"fnt: error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"fnt: numerical failure: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
