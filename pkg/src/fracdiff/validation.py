"""Acceptance suites shared by the ``validate`` command and the test-suite.

Each suite returns a :class:`SuiteResult` carrying the measured
discrepancies, the thresholds they were held to and the wall time.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special as sc

from . import kernels as K
from .kernels import KernelSpec
from .moments import MomentQuery, moment_formula, moment_quadrature
from .oracle import run_l1, stable_density, talbot_invert
from .solver import SampledField, SolveConfig, solve
from .special_fn import mittag_leffler, rgamma

__all__ = ["SuiteResult", "SUITES", "run_suite", "run_all"]


@dataclass
class SuiteResult:
    name: str
    passed: bool = True
    checks: list[tuple[str, float, float, bool]] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    elapsed: float = 0.0
    time_limit: float | None = None

    def check(self, label: str, measured: float, limit: float, ok: bool | None = None) -> None:
        """Record ``measured <= limit`` (or an explicit verdict)."""
        good = bool(measured <= limit) if ok is None else bool(ok)
        if not math.isfinite(measured):
            good = False if ok is None else good
        self.checks.append((label, float(measured), float(limit), good))
        self.passed &= good

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        worst = [c for c in self.checks if not c[3]] or self.checks
        label, meas, lim, _ = max(worst, key=lambda c: c[1] / c[2] if c[2] else c[1])
        tl = f" (limit {self.time_limit:g}s)" if self.time_limit else ""
        return f"{status} {self.name}: {label} = {meas:.3e} vs {lim:.1e}; {self.elapsed:.2f}s{tl}"


def _timed(name: str, limit: float | None) -> Callable:
    def deco(fn: Callable[[SuiteResult], None]) -> Callable[[], SuiteResult]:
        def run() -> SuiteResult:
            res = SuiteResult(name, time_limit=limit)
            t0 = time.perf_counter()
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                fn(res)
            res.elapsed = time.perf_counter() - t0
            if limit is not None:
                res.check("runtime_s", res.elapsed, limit)
            return res
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return deco


def _rel(a, b) -> np.ndarray:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return np.abs(a - b) / np.maximum(np.abs(b), 1e-300)


# {{{ suites

@_timed("gaussian_limit", 1.0)
def gaussian_limit(res: SuiteResult) -> None:
    """alpha = 2, beta = 1 against the heat kernel on 201 points of [-10, 10]."""
    x = np.linspace(-10.0, 10.0, 201)
    spec = KernelSpec(2.0, 1.0, 1.0)
    ref = K.gaussian_kernel(x, 1.0)
    for route in ("contour", "fourier"):
        err = np.max(np.abs(K.fundamental_solution(spec, x, 1.0, route) - ref))
        res.check(f"sup|N_{route} - gauss|", err, 1e-8)


@_timed("levy_cauchy", 5.0)
def levy_cauchy(res: SuiteResult) -> None:
    """alpha = beta = 1 against the stable-density oracle (Cauchy law)."""
    x = np.linspace(-10.0, 10.0, 201)
    spec = KernelSpec(1.0, 1.0, 1.0)
    ref = stable_density(1.0, 1.0, x)
    closed = 1.0 / (np.pi * (1.0 + x**2))
    res.check("sup|oracle - cauchy|", float(np.max(np.abs(ref - closed))), 1e-7)
    for route in ("contour", "fourier"):
        err = np.max(np.abs(K.fundamental_solution(spec, x, 1.0, route) - ref))
        res.check(f"sup|N_{route} - oracle|", err, 1e-7)


THREE_ROUTE_GRID = [(a, b) for a in (0.75, 1.5) for b in (0.5, 1.0)]


@_timed("three_route", 60.0)
def three_route(res: SuiteResult) -> None:
    """Series, contour and cosine routes agree pairwise where two are defined."""
    x = np.geomspace(0.02, 50.0, 60)
    worst = 0.0
    compared = 0
    for a, b in THREE_ROUTE_GRID:
        spec = KernelSpec(a, b, 1.0)
        routes = {r: K.evaluate(spec, x, 1.0, r, strict=False) for r in ("series_small", "series_large", "contour", "fourier")}
        names = list(routes)
        for i, r1 in enumerate(names):
            for r2 in names[i + 1:]:
                both = np.asarray(routes[r1].converged) & np.asarray(routes[r2].converged)
                if not np.any(both):
                    continue
                d = _rel(routes[r1].value[both], routes[r2].value[both])
                worst = max(worst, float(d.max()))
                compared += int(both.sum())
        defined = sum(np.asarray(v.converged, int) for v in routes.values())
        res.check(f"points with <2 routes (alpha={a}, beta={b})", float(np.sum(defined < 2)), 0.0)
    res.check("max pairwise relative discrepancy", worst, 1e-6)
    npts = len(THREE_ROUTE_GRID) * x.size
    res.check("sample points (need >= 200)", npts, 200, ok=npts >= 200)
    res.notes.append(f"{compared} pairwise comparisons over {len(THREE_ROUTE_GRID) * x.size} points")


@_timed("mittag_leffler", 1.0)
def mittag_leffler_identities(res: SuiteResult) -> None:
    """E_{1,1} = exp, E_{2,1}(-x^2) = cos x, E_{1/2,1} = erfcx(-z), index shift."""
    z = np.linspace(-50.0, 5.0, 551)
    res.check("E_{1,1} vs exp", float(_rel(mittag_leffler(z, 1.0).real, np.exp(z)).max()), 1e-10)
    x = np.linspace(0.0, math.sqrt(50.0), 300)
    err = np.abs(mittag_leffler(-(x**2), 2.0).real - np.cos(x)).max()
    res.check("E_{2,1}(-x^2) vs cos", float(err), 1e-10)
    res.check("E_{1/2,1} vs erfcx", float(_rel(mittag_leffler(z, 0.5).real, sc.erfcx(-z)).max()), 1e-10)
    worst = 0.0
    zs = np.linspace(-20.0, 5.0, 126)
    for a, b in [(0.5, 1.0), (0.8, 0.6), (1.3, 1.0), (1.7, 1.7), (2.0, 0.9)]:
        lhs = mittag_leffler(zs, a, b)
        rhs = rgamma(b) + zs * mittag_leffler(zs, a, a + b)
        scale = np.maximum(np.abs(lhs), np.abs(zs * mittag_leffler(zs, a, a + b)))
        worst = max(worst, float((np.abs(lhs - rhs) / np.maximum(scale, 1e-300)).max()))
    res.check("index-shift recurrence", worst, 1e-10)


LAPLACE_GRID = [(b, a, t) for b in (0.5, 0.9, 1.5) for a in (0.5, 2.0, 5.0) for t in (0.5, 1.5, 3.0)]


@_timed("laplace_pair", 2.0)
def laplace_pair(res: SuiteResult) -> None:
    """Talbot inversion of s^(beta-1)/(s^beta + a) against E_beta(-a t^beta)."""
    worst = 0.0
    for b, a, t in LAPLACE_GRID:
        val = talbot_invert(lambda s: s ** (b - 1.0) / (s**b + a), t)
        ref = mittag_leffler(-a * t**b, b).real
        worst = max(worst, abs(val - ref))
    res.check("max |talbot - ML|", worst, 1e-6)


MOMENT_GRID = [(a, b, d) for a in (1.2, 1.5, 2.0) for b in (0.5, 0.8, 1.0) for d in (0.3, 0.7, min(a, 2.0) * 0.9)]


@_timed("moments", 120.0)
def moments(res: SuiteResult) -> None:
    """Closed form vs quadrature, small-order limit, Brownian limit, time scaling."""
    worst = 0.0
    for a, b, d in MOMENT_GRID:
        spec = KernelSpec(a, b, 1.0)
        q = MomentQuery(d, a)
        worst = max(worst, float(_rel(moment_quadrature(spec, q), moment_formula(spec, q))))
    res.check("formula vs quadrature (rel)", worst, 1e-5)
    lim = max(abs(moment_formula(KernelSpec(a, b), MomentQuery(1e-6, a)) - 1.0)
              for a in (0.6, 1.2, 1.5, 2.0) for b in (0.5, 0.8, 1.0))
    res.check("|<|x|^1e-6> - 1|", lim, 1e-4)
    brown = 0.0
    for b in (0.5, 0.8, 1.0):
        for eta, t in ((1.0, 1.0), (0.7, 2.5)):
            spec = KernelSpec(2.0, b, eta)
            target = 2.0 * eta * t**b / math.gamma(1.0 + b)
            for d in (2.0, 2.0 - 1e-8):
                brown = max(brown, abs(moment_formula(spec, MomentQuery(d, 2.0), t) - target) / target)
    res.check("delta, alpha -> 2 vs 2 eta t^beta / Gamma(1+beta)", brown, 1e-6)
    ts = np.array([0.5, 1.0, 2.0, 4.0])
    slope_err = 0.0
    for a, b, d in MOMENT_GRID:
        spec = KernelSpec(a, b, 1.3)
        m = [moment_formula(spec, MomentQuery(d, a), t) for t in ts]
        slope = np.polyfit(np.log(ts), np.log(m), 1)[0]
        slope_err = max(slope_err, abs(slope - b * d / a))
    res.check("time-scaling slope error", slope_err, 1e-8)


L1_SPEC = KernelSpec(1.5, 0.8, 1.0)
L1_GRID = (512, 25.6)


def l1_setup() -> tuple[SampledField, SampledField]:
    n, half = L1_GRID
    dx = 2.0 * half / n
    d = SampledField.delta(-half, dx, n)
    ref = solve(L1_SPEC, d, None, None, 1.0, SolveConfig(tol=1.0))
    return d, ref


@_timed("l1_convergence", 60.0)
def l1_convergence(res: SuiteResult) -> None:
    """L1 Caputo + spectral stepper against spectral synthesis of the same delta data."""
    d, ref = l1_setup()
    steps = [64, 128, 256, 512]
    errs = []
    for s in steps:
        u, _ = run_l1(L1_SPEC, d, 1.0, s)
        errs.append(float(np.max(np.abs(u.values - ref.values))))
    res.check("sup-norm at 256 steps", errs[2], 1e-3)
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]
    target = 2.0 - L1_SPEC.beta - 0.1
    res.check("observed order (min over refinements, need >=)", min(orders), target, ok=min(orders) >= target)
    kern = K.fundamental_solution(L1_SPEC, d.x, 1.0)
    res.notes.append("errors " + ", ".join(f"{s}:{e:.3e}" for s, e in zip(steps, errs)))
    res.notes.append(f"orders {', '.join(f'{o:.3f}' for o in orders)} (target >= {target:.2f})")
    far = np.abs(d.x) >= 1.0
    res.notes.append(
        f"grid solution vs continuum kernel: sup {np.max(np.abs(ref.values - kern)):.3e} overall,"
        f" {np.max(np.abs(ref.values - kern)[far]):.3e} for |x| >= 1 (spectral truncation of delta data)")


INVARIANT_SPECS = [(a, b) for a in (0.75, 1.0, 1.5, 2.0) for b in (0.5, 1.0)]


@_timed("invariants", None)
def invariants(res: SuiteResult) -> None:
    """Normalization, evenness, self-similarity, positivity and the Gaussian limit."""
    norm = 0.0
    for a, b in INVARIANT_SPECS:
        for t in (0.5, 1.0, 2.0):
            norm = max(norm, abs(moment_quadrature(KernelSpec(a, b, 1.0), MomentQuery(0.0, a), t) - 1.0))
    res.check("|int N dx - 1|", norm, 1e-6)

    x = np.geomspace(0.01, 30.0, 25)
    even = 0.0
    mirror = 0.0
    for a, b in INVARIANT_SPECS:
        spec = KernelSpec(a, b, 0.8)
        ev = {(r, sgn): K.evaluate(spec, sgn * x, 1.0, r) for r in ("contour", "fourier") for sgn in (1, -1)}
        mirror = max(mirror, float(np.max(np.abs(ev["fourier", 1].value - ev["fourier", -1].value))))
        for r1, r2 in (("contour", "contour"), ("contour", "fourier"), ("fourier", "contour")):
            e1, e2 = ev[r1, 1], ev[r2, -1]
            # points where either route reports no significant digits are not comparable
            ok = np.asarray(e1.converged) & np.asarray(e2.converged)
            even = max(even, float(_rel(e1.value[ok], e2.value[ok]).max()))
    res.check("cosine route N(x) - N(-x) (exact)", mirror, 0.0)
    res.check("evenness N(x) vs N(-x) (rel, cross-route)", even, 1e-8)

    sim = 0.0
    y = np.linspace(0.05, 8.0, 30)
    for a, b in INVARIANT_SPECS:
        spec = KernelSpec(a, b, 1.7)
        rows = []
        for t in (0.25, 1.0, 4.0):
            c = spec.scale(t)
            rows.append(c * K.fundamental_solution(spec, y * c, t, "contour"))
        rows = np.array(rows)
        sim = max(sim, float((np.ptp(rows, axis=0) / np.abs(rows).max(axis=0)).max()))
    res.check("self-similarity spread (rel)", sim, 1e-7)

    neg = 0.0
    xs = np.linspace(-40.0, 40.0, 161)
    for a in (0.5, 0.75, 1.0, 1.3, 1.7, 2.0):
        for b in (0.3, 0.6, 0.9, 1.0):
            ev = K.evaluate(KernelSpec(a, b), xs[xs != 0], 1.0, "contour")
            # a negative value is a violation only if it exceeds the quadrature's own error bar
            excess = -ev.value - np.maximum(ev.err_est, 1e-14 * np.abs(ev.value).max())
            neg = max(neg, float(excess.max()), 0.0)
    res.check("negative excess beyond error bar for beta <= 1", neg, 0.0)

    xg = np.linspace(-10.0, 10.0, 201)
    gauss = np.max(np.abs(K.fundamental_solution(KernelSpec(2.0, 1.0), xg, 1.0, "contour") - K.gaussian_kernel(xg, 1.0)))
    res.check("alpha = 2 contour route vs heat kernel", float(gauss), 1e-8)


TAIL_CASES = [(1.0, 1.0), (1.0, 0.5), (1.5, 1.0), (1.5, 0.5)]


@_timed("tail_exponent", None)
def tail_exponent(res: SuiteResult) -> None:
    """Measured log-log slope over |x| in [1e2, 1e4] against -(1 + alpha)."""
    for a, b in TAIL_CASES:
        slope = K.tail_exponent(KernelSpec(a, b, 1.0))
        res.check(f"|slope + 1 + alpha| (alpha={a}, beta={b}; slope {slope:.4f})", abs(slope + 1.0 + a), 0.05)
        res.notes.append(f"alpha={a} beta={b}: slope {slope:.5f}, predicted {-(1 + a):.2f}, 1/|x| claim -1")

# }}}


SUITES: dict[str, Callable[[], SuiteResult]] = {
    "gaussian_limit": gaussian_limit,
    "levy_cauchy": levy_cauchy,
    "three_route": three_route,
    "mittag_leffler": mittag_leffler_identities,
    "laplace_pair": laplace_pair,
    "moments": moments,
    "l1_convergence": l1_convergence,
    "invariants": invariants,
    "tail_exponent": tail_exponent,
}


def run_suite(name: str) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; available: {', '.join(SUITES)}")
    return SUITES[name]()


def run_all(names: list[str] | None = None) -> list[SuiteResult]:
    return [run_suite(n) for n in (names or list(SUITES))]
