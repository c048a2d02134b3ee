"""``fracdiff`` command-line front end.

Exit codes: 0 success, 1 failed validation suite, 2 bad flags or input,
3 numerical failure, 4 grid or boundary-floor violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import fox_h, kernels as K
from .kernels import KernelSpec
from .moments import InadmissibleMomentError, MomentPoleError, MomentQuery, TailDivergenceError
from .moments import moment_formula, moment_quadrature
from .solver import DomainError, ResolutionError, SampledField, SolveConfig, solve
from .special_fn import GammaPoleError, MLConvergenceError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["main", "build_parser", "parse_grid", "RunReport", "CHUNK"]

EXIT_OK, EXIT_SUITE, EXIT_USAGE, EXIT_NUMERIC, EXIT_GRID = 0, 1, 2, 3, 4

# grid evaluation is split into fixed-size chunks so results never depend on --threads
CHUNK = 64

NUMERIC_ERRORS = (K.RegionError, K.QuadratureError, fox_h.NonConvergentIntegrandError, fox_h.HPoleError,
                  fox_h.PoleCollisionError,
                  GammaPoleError, MLConvergenceError, ResolutionError, MomentPoleError, TailDivergenceError,
                  ArithmeticError)


class UsageError(Exception):
    """Bad flag value or malformed input; maps to exit code 2."""


class GridError(Exception):
    """Input grid cannot be used; maps to exit code 4."""


@dataclass
class RunReport:
    command: str
    spec: dict
    rows_written: int = 0
    max_cross_route_discrepancy: float = 0.0
    wall_time: float = 0.0
    notes: list[str] = field(default_factory=list)

    def write(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(asdict(self), fh, indent=2, sort_keys=True)
            fh.write("\n")


# {{{ parsing helpers

def _number(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise UsageError(f"value must be finite: {text!r}")
    return v


def parse_grid(text: str) -> np.ndarray:
    """``lo:hi:n`` (inclusive linspace), a comma list, or one number; sorted ascending."""
    text = str(text).strip()
    if not text:
        raise UsageError("empty grid")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid {text!r} must read lo:hi:n")
        lo, hi = _number(parts[0]), _number(parts[1])
        try:
            n = int(parts[2])
        except ValueError:
            raise UsageError(f"grid count {parts[2]!r} is not an integer") from None
        if n < 1:
            raise UsageError(f"grid {text!r} is empty")
        if n > 1 and not hi > lo:
            raise UsageError(f"grid {text!r} needs hi > lo")
        return np.linspace(lo, hi, n)
    vals = [_number(p) for p in text.split(",") if p.strip()]
    if not vals:
        raise UsageError("empty grid")
    return np.unique(np.array(vals))


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return "%.17g" % v


def _write_csv(out: str | None, header: list[str], rows: list[list]) -> int:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    text = buf.getvalue()
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return len(rows)


def read_field_csv(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Read ``x,value`` rows; raise :class:`UsageError` naming the offending line."""
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    xs, vs = [], []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise UsageError(f"{path}: line 1: file is empty")
        if [h.strip() for h in header] != ["x", "value"]:
            raise UsageError(f"{path}: line 1: header must be 'x,value', got {','.join(header)!r}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 2:
                raise UsageError(f"{path}: line {line}: expected 2 fields, got {len(row)}")
            try:
                x, v = float(row[0]), float(row[1])
            except ValueError:
                raise UsageError(f"{path}: line {line}: non-numeric field in {','.join(row)!r}") from None
            if not (math.isfinite(x) and math.isfinite(v)):
                raise UsageError(f"{path}: line {line}: non-finite value")
            xs.append(x)
            vs.append(v)
    if len(xs) < 2:
        raise UsageError(f"{path}: need at least 2 data rows")
    return np.array(xs), np.array(vs)


def _field_from(x: np.ndarray, v: np.ndarray) -> SampledField:
    try:
        return SampledField.on_grid(x, v)
    except ValueError as exc:
        raise GridError(str(exc)) from None

# }}}


# {{{ commands

def _spec(args) -> KernelSpec:
    try:
        return KernelSpec(args.alpha, args.beta, args.eta)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _map_chunks(fn, x: np.ndarray, threads: int) -> list:
    chunks = [x[i:i + CHUNK] for i in range(0, x.size, CHUNK)]
    if threads <= 1 or len(chunks) == 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, chunks))


def _kernel_like(args, b_of_spec) -> RunReport:
    spec = _spec(args)
    ts = parse_grid(args.t)
    if np.any(ts <= 0):
        raise UsageError("t must be positive")
    x = parse_grid(args.x)
    b = b_of_spec(spec)
    report = RunReport(args.command, asdict(spec))
    rows = []
    worst = 0.0
    other = "contour" if args.route == "fourier" else "fourier"
    for t in ts:
        parts = _map_chunks(lambda c: K.evaluate(spec, c, float(t), args.route, b=b), x, args.threads)
        val = np.concatenate([np.atleast_1d(p.value) for p in parts])
        err = np.concatenate([np.atleast_1d(p.err_est) for p in parts])
        route = parts[0].route
        # a divergent density at the origin (alpha <= 1) is a value, not a failure
        singular = (x == 0) & np.isposinf(val)
        if not np.all(np.isfinite(val) | singular):
            raise ArithmeticError(f"route {route} produced non-finite values at t = {t:g}")
        if args.tol is not None:
            bad = err[~singular] > args.tol * np.abs(val[~singular]).max(initial=0.0)
            if np.any(bad):
                raise ArithmeticError(
                    f"error estimate {err.max():.3g} exceeds tol {args.tol:g} of the peak at t = {t:g}")
        if args.cross_check:
            alt = _map_chunks(lambda c: K.evaluate(spec, c, float(t), other, b=b), x, args.threads)
            a_val = np.concatenate([np.atleast_1d(p.value) for p in alt])
            a_conv = np.concatenate([np.atleast_1d(p.converged) for p in alt])
            ok = a_conv & ~singular & (err <= 1e-9 * np.abs(val)) & (val != 0)
            if np.any(ok):
                worst = max(worst, float(np.max(np.abs(val[ok] - a_val[ok]) / np.abs(a_val[ok]))))
        rows.extend([xi, t, spec.alpha, spec.beta, spec.eta, route, vi, ei] for xi, vi, ei in zip(x, val, err))
    report.rows_written = _write_csv(args.out, ["x", "t", "alpha", "beta", "eta", "route", "value", "err_est"], rows)
    report.max_cross_route_discrepancy = worst
    if args.cross_check:
        report.notes.append(f"cross-checked against the {other} route")
    return report


def cmd_kernel(args) -> RunReport:
    return _kernel_like(args, lambda s: 1.0)


def cmd_g1(args) -> RunReport:
    return _kernel_like(args, lambda s: 1.0)


def cmd_g2(args) -> RunReport:
    return _kernel_like(args, lambda s: s.beta)


def cmd_solve(args) -> RunReport:
    spec = _spec(args)
    t = _number(args.t)
    if not t > 0:
        raise UsageError("t must be positive")
    if (args.input is None) == (not args.delta):
        raise UsageError("give exactly one of --input FILE or --delta")
    if args.delta:
        if args.x is None:
            raise UsageError("--delta needs an --x grid")
        x = parse_grid(args.x)
        if x.size < 2:
            raise UsageError("--delta needs an --x grid of at least 2 points")
        f = _field_from(x, np.zeros_like(x))
        f = SampledField.delta(f.x0, f.dx, f.n, args.at)
    else:
        f = _field_from(*read_field_csv(args.input))
    g = None
    if args.g is not None:
        g = _field_from(*read_field_csv(args.g))
        if not g.same_grid(f):
            raise GridError("--g must use the same grid as the initial data")
    try:
        cfg = SolveConfig(tol=args.tol if args.tol is not None else 1e-6)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if g is not None and spec.beta <= 1:
        raise UsageError("--g is only admissible for 1 < beta <= 2")
    out = solve(spec, f, g, None, t, cfg)
    report = RunReport("solve", asdict(spec))
    report.rows_written = _write_csv(args.out, ["x", "N"], [[xi, vi] for xi, vi in zip(out.x, out.values)])
    return report


def cmd_moments(args) -> RunReport:
    spec = _spec(args)
    ts = parse_grid(args.t)
    if np.any(ts <= 0):
        raise UsageError("t must be positive")
    deltas = parse_grid(args.delta)
    rows = []
    worst = 0.0
    for t in ts:
        for d in deltas:
            q = MomentQuery(float(d), spec.alpha)
            if not q.admissible:
                raise UsageError(f"inadmissible moment order: {q.reason}")
            val = moment_formula(spec, q, float(t))
            row = [d, t, spec.alpha, spec.beta, spec.eta, val]
            if args.quadrature:
                quad = moment_quadrature(spec, q, float(t))
                worst = max(worst, abs(quad - val) / abs(val))
                row.append(quad)
            rows.append(row)
    header = ["delta", "t", "alpha", "beta", "eta", "formula"] + (["quadrature"] if args.quadrature else [])
    report = RunReport("moments", asdict(spec))
    report.rows_written = _write_csv(args.out, header, rows)
    report.max_cross_route_discrepancy = worst
    return report


def cmd_asymptotics(args) -> RunReport:
    spec = _spec(args)
    t = _number(args.t)
    if not t > 0:
        raise UsageError("t must be positive")
    report = RunReport("asymptotics", asdict(spec))
    rows = []
    try:
        A, B = K.small_x_behavior(spec, t)
        rows += [["small_x_A", A], ["small_x_B", B]]
    except ValueError as exc:
        report.notes.append(str(exc))
        print(f"note: {exc}", file=sys.stderr)
    rows.append(["origin_value", K.origin_value(spec, t, 1.0)])
    slope = K.tail_exponent(spec, t, args.tail_lo, args.tail_hi)
    rows += [["tail_slope", slope], ["tail_slope_predicted", -(1.0 + spec.alpha)]]
    report.rows_written = _write_csv(args.out, ["quantity", "value"], rows)
    return report


def cmd_validate(args) -> RunReport:
    from .validation import SUITES, run_suite

    names = args.suite or list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise UsageError(f"unknown suite(s) {', '.join(unknown)}; available: {', '.join(SUITES)}")
    report = RunReport("validate", {})
    failed = []
    for n in names:
        res = run_suite(n)
        print(res.summary(), flush=True)
        if args.verbose:
            for label, meas, lim, ok in res.checks:
                print(f"    {'ok ' if ok else 'BAD'} {label}: {meas:.3e} (limit {lim:.1e})")
            for note in res.notes:
                print(f"    note: {note}")
        if not res.passed:
            failed.append(n)
    report.notes = [f"failed: {', '.join(failed)}"] if failed else ["all suites passed"]
    report.rows_written = 0
    args._failed = bool(failed)
    return report


COMMANDS = {
    "kernel": cmd_kernel,
    "g1": cmd_g1,
    "g2": cmd_g2,
    "solve": cmd_solve,
    "moments": cmd_moments,
    "asymptotics": cmd_asymptotics,
    "validate": cmd_validate,
}

# }}}


# {{{ argument parser

def _threads_default() -> int:
    raw = os.environ.get("FRACDIFF_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return v


def _shared(p: argparse.ArgumentParser, route_default: str, x_default: str | None = "-5:5:101") -> None:
    p.add_argument("--alpha", type=float, default=2.0, help="space order in (0, 2]")
    p.add_argument("--beta", type=float, default=1.0, help="time order in (0, 2]")
    p.add_argument("--eta", type=float, default=1.0, help="diffusion coefficient")
    p.add_argument("--t", default="1", help="time, or a lo:hi:n / comma list where allowed")
    p.add_argument("--x", default=x_default, help="grid as lo:hi:n, a comma list or one value")
    p.add_argument("--route", choices=K.ROUTES, default=route_default)
    p.add_argument("--tol", type=float, default=None, help="error tolerance relative to the peak")
    p.add_argument("--out", default=None, help="CSV destination (default stdout)")
    p.add_argument("--config", default=None, help="TOML file whose keys set flag defaults")
    p.add_argument("--report", default=None, help="write a JSON run report here")
    p.add_argument("--threads", type=_positive_int, default=_threads_default(),
                   help="worker threads (default $FRACDIFF_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracdiff", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, route, helptext in (("kernel", "auto", "fundamental solution N(x, t)"),
                                  ("g1", "fourier", "initial-value propagator G1"),
                                  ("g2", "fourier", "source propagator G2")):
        p = sub.add_parser(name, help=helptext)
        _shared(p, route)
        p.add_argument("--cross-check", action="store_true",
                       help="also evaluate a second route and report the largest discrepancy")
    p = sub.add_parser("solve", help="Cauchy problem by spectral synthesis")
    _shared(p, "auto", None)
    p.add_argument("--input", default=None, help="initial data CSV with header x,value")
    p.add_argument("--delta", action="store_true", help="unit point mass on the --x grid")
    p.add_argument("--at", type=float, default=0.0, help="location of the point mass")
    p.add_argument("--g", default=None, help="initial velocity CSV (1 < beta <= 2)")
    p = sub.add_parser("moments", help="fractional absolute moments")
    _shared(p, "contour")
    p.add_argument("--delta", default="0.5", help="moment orders as lo:hi:n or a comma list")
    p.add_argument("--quadrature", action="store_true", help="add a brute-force quadrature column")
    p = sub.add_parser("asymptotics", help="small-x coefficients and the measured tail exponent")
    _shared(p, "contour")
    p.add_argument("--tail-lo", type=float, default=1e2)
    p.add_argument("--tail-hi", type=float, default=1e4)
    p = sub.add_parser("validate", help="run acceptance suites")
    _shared(p, "auto")
    p.add_argument("--suite", action="append", default=None, help="suite name (repeatable)")
    p.add_argument("--verbose", "-v", action="store_true")
    return parser


def _load_config(path: str) -> dict:
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"config {path}: {exc}") from None


_NEGATIVE_OK = re.compile(r"^-[0-9.]")


def _glue_negative(argv: list[str]) -> list[str]:
    # argparse mistakes "--x -5:5:101" for two options; "--x=-5:5:101" is unambiguous
    out: list[str] = []
    i = 0
    while i < len(argv):
        tok = argv[i]
        if tok.startswith("--") and "=" not in tok and i + 1 < len(argv) and _NEGATIVE_OK.match(argv[i + 1]):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
            continue
        out.append(tok)
        i += 1
    return out


def parse_args(argv: list[str] | None) -> argparse.Namespace:
    """Parse twice when ``--config`` is given: file values become defaults, flags still win."""
    parser = build_parser()
    argv = _glue_negative(list(sys.argv[1:] if argv is None else argv))
    args = parser.parse_args(argv)
    if args.config is None:
        return args
    cfg = _load_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    values = {}
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if dest not in known or dest in ("config", "help"):
            raise UsageError(f"config {args.config}: unknown key {key!r} for {args.command}")
        values[dest] = ",".join(map(str, val)) if isinstance(val, list) else val
        if dest in ("x", "t", "delta") and not isinstance(val, (list, str, bool)):
            values[dest] = str(val)
    sub.set_defaults(**values)
    return parser.parse_args(argv)

# }}}


def main(argv: list[str] | None = None) -> int:
    t0 = time.perf_counter()
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"fracdiff: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        report = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fracdiff {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GridError, DomainError) as exc:
        print(f"fracdiff {args.command}: grid error: {exc}", file=sys.stderr)
        return EXIT_GRID
    except InadmissibleMomentError as exc:
        print(f"fracdiff {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NUMERIC_ERRORS as exc:
        print(f"fracdiff {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"fracdiff {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report.wall_time = time.perf_counter() - t0
    if args.report:
        report.write(args.report)
    if getattr(args, "_failed", False):
        return EXIT_SUITE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
