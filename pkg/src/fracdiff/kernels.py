"""Green's functions and fundamental solutions of the space-time fractional
diffusion equation ``D_t^beta N = eta D_x^alpha N``.

With ``c = (eta t^beta)^(1/alpha)`` every kernel is self-similar,
``N(x, t) = Phi(|x| / c) / c``, and four independent routes are offered:

* ``series_small`` / ``series_large``: residue series of the H-function form,
* ``contour``: Mellin-Barnes quadrature of the same H-function,
* ``fourier``: cosine quadrature of the Mittag-Leffler symbol.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial.laguerre import laggauss
from numpy.polynomial.legendre import leggauss

from . import fox_h
from .fox_h import HParams, SeriesDivergenceWarning
from .special_fn import mittag_leffler, rgamma

__all__ = [
    "ROUTES",
    "RegionError",
    "QuadratureError",
    "KernelSpec",
    "KernelEval",
    "kernel_hparams",
    "evaluate",
    "fundamental_solution",
    "green_g1",
    "green_g2",
    "origin_value",
    "small_x_behavior",
    "tail_exponent",
    "gaussian_kernel",
]

ROUTES = ("series_small", "series_large", "contour", "fourier", "auto")


class RegionError(ValueError):
    """A residue-series route was requested where its series does not converge."""


class QuadratureError(ArithmeticError):
    """The cosine quadrature could not be set up for the requested parameters."""


@dataclass(frozen=True)
class KernelSpec:
    """Orders ``alpha`` (space), ``beta`` (time) and diffusivity ``eta``."""

    alpha: float
    beta: float
    eta: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 2:
            raise ValueError(f"alpha must lie in (0, 2], got {self.alpha}")
        if not 0 < self.beta <= 2:
            raise ValueError(f"beta must lie in (0, 2], got {self.beta}")
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValueError(f"eta must be positive, got {self.eta}")

    @property
    def is_density(self) -> bool:
        """True where the kernel is a probability density (``beta <= 1``)."""
        return self.beta <= 1

    def scale(self, t: float) -> float:
        """Similarity length ``(eta t^beta)^(1/alpha)``."""
        if not t > 0:
            raise ValueError(f"t must be positive, got {t}")
        return (self.eta * t**self.beta) ** (1.0 / self.alpha)


class KernelEval(NamedTuple):
    value: np.ndarray
    err_est: np.ndarray
    converged: np.ndarray
    route: str


def kernel_hparams(alpha: float, beta: float, b: float = 1.0) -> HParams:
    """H^{2,1}_{3,3} parameters of ``alpha |x| Phi`` for the symbol ``E_{beta,b}``.

    ``b = 1`` gives the fundamental solution (and G1), ``b = beta`` gives G2.
    """
    return HParams(
        2, 1,
        ((1.0, 1.0 / alpha), (b, beta / alpha), (1.0, 0.5)),
        ((1.0, 1.0), (1.0, 1.0 / alpha), (1.0, 0.5)),
    )


def gaussian_kernel(x, t: float, eta: float = 1.0):
    """Heat kernel ``(4 pi eta t)^(-1/2) exp(-x^2 / (4 eta t))``."""
    x = np.asarray(x, dtype=float)
    return np.exp(-x * x / (4.0 * eta * t)) / math.sqrt(4.0 * math.pi * eta * t)


# {{{ origin and small-|x| structure

def origin_value(spec: KernelSpec, t: float, b: float = 1.0) -> float:
    """``N(0, t)``: finite for ``alpha > 1`` or for the pure exponential symbol.

    Uses the Mellin transform of ``E_{beta,b}(-w)`` at ``s = 1/alpha``; returns
    ``inf`` where the integral of the symbol diverges.
    """
    a, be = spec.alpha, spec.beta
    c = spec.scale(t)
    if be == 1.0 and b == 1.0:
        return math.gamma(1.0 + 1.0 / a) / (math.pi * c)
    if a <= 1.0:
        # symbol decays like |k|^-alpha, not integrable
        return math.inf
    s = 1.0 / a
    val = math.gamma(s) * math.gamma(1.0 - s) * rgamma(b - be * s).real
    return val / (math.pi * a * c)


def _left_coefficient(h: HParams, xi: float) -> float:
    # grow the pole list one at a time so a higher-order pole further left
    # (where the two families coincide) is never touched
    for n in range(1, 65):
        r = fox_h.residue_terms(h, "left", n)[-1]
        if abs(r.xi - xi) <= 1e-12 * max(1.0, abs(xi)):
            return 0.0 if np.isneginf(r.log_coef.real) else float(np.exp(r.log_coef).real)
        if r.xi < xi:
            break
    return 0.0


def small_x_behavior(spec: KernelSpec, t: float) -> tuple[float, float]:
    """Coefficients ``(A, B)`` of ``N(x, t) ~ A + B |x|^(alpha-1)`` as ``x -> 0``.

    Read off the residues at ``xi = -1`` and ``xi = -alpha`` of the H-function
    form.  For ``alpha < 1`` the ``B`` term dominates; ``alpha = 1`` mixes the
    two powers into a logarithm and is rejected.
    """
    a = spec.alpha
    if abs(a - 1.0) < 1e-12:
        raise ValueError("small_x_behavior is undefined at alpha = 1 (the two powers merge)")
    h = kernel_hparams(a, spec.beta)
    c = spec.scale(t)
    A = _left_coefficient(h, -1.0) / (a * c)
    B = _left_coefficient(h, -a) / (a * spec.eta * t**spec.beta)
    return A, B

# }}}


# {{{ cosine quadrature of the Mittag-Leffler symbol

_GL_NODES = 20
_LAGUERRE_NODES = 128
_MIN_ROTATION = 4.0
_GEOMETRIC_LEVELS = 48
_ASYMPTOTIC_TOL = 1e-16
_MAX_ASYMPTOTIC_TERMS = 40


@functools.lru_cache(maxsize=None)
def _gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return leggauss(n)


@functools.lru_cache(maxsize=None)
def _gauss_laguerre() -> tuple[np.ndarray, np.ndarray]:
    return laggauss(_LAGUERRE_NODES)


@functools.lru_cache(maxsize=256)
def _asymptotic_plan(alpha: float, beta: float, b: float) -> tuple[float, np.ndarray]:
    """Cutoff ``U`` and coefficients ``a_j`` with ``E_{beta,b}(-u^alpha) ~ sum a_j u^(-alpha j)``
    accurate to ``1e-16`` for ``u >= U``."""
    if beta >= 2.0:
        raise QuadratureError("the cosine route needs beta < 2 (the symbol does not decay at beta = 2)")
    j = np.arange(1, _MAX_ASYMPTOTIC_TERMS + 2)
    coef = ((-1.0) ** (j + 1)) * rgamma(b - beta * j).real
    coef[np.abs(coef) < 1e-300] = 0.0
    if not np.any(coef):
        # exponential decay only (beta = b = 1)
        return 40.0 ** (1.0 / alpha), np.zeros(0)
    for w in np.geomspace(10.0, 1e8, 113):
        if beta > 1.0 and math.exp(w ** (1.0 / beta) * math.cos(math.pi / beta)) > _ASYMPTOTIC_TOL:
            continue
        mags = np.abs(coef) * w ** (-j.astype(float))
        for J in range(1, _MAX_ASYMPTOTIC_TERMS - 1):
            # first omitted terms bound the truncation error
            if mags[J:J + 3].max() < _ASYMPTOTIC_TOL:
                return w ** (1.0 / alpha), coef[:J]
    raise QuadratureError(f"no asymptotic cutoff found for E_{{{beta},{b}}}")


def _quantize_width(h: float) -> float:
    return 2.0 ** math.floor(math.log2(h))


@functools.lru_cache(maxsize=64)
def _symbol_table(alpha: float, beta: float, b: float, width: float, U: float):
    """Quadrature nodes, weights and symbol values on ``[0, U]``."""
    xg, wg = _gauss_legendre(_GL_NODES)
    n_uniform = max(1, int(math.ceil((U - width) / width)))
    left = width
    edges_u = np.linspace(left, U, n_uniform + 1)
    edges_g = width * 2.0 ** -np.arange(_GEOMETRIC_LEVELS, -1, -1, dtype=float)
    edges = np.concatenate([[0.0], edges_g, edges_u[1:]])
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
    weights = (half[:, None] * wg[None, :]).ravel()
    vals = mittag_leffler(-(nodes**alpha), beta, b).real
    return nodes, weights, vals


def _tail_cosine(y: float, U: float, coef: np.ndarray, alpha: float) -> float:
    """``int_U^inf cos(u y) sum_j a_j u^(-alpha j) du`` for ``y > 0``."""
    if coef.size == 0:
        return 0.0
    nu = alpha * np.arange(1, coef.size + 1)
    total = 0.0
    U2 = max(U, _MIN_ROTATION / y)
    if U2 > U:
        # slowly varying stretch [U, U2] on geometric panels
        xg, wg = _gauss_legendre(_GL_NODES)
        npan = max(1, int(math.ceil(4 * math.log2(U2 / U))))
        e = np.geomspace(U, U2, npan + 1)
        half = 0.5 * (e[1:] - e[:-1])
        mid = 0.5 * (e[1:] + e[:-1])
        u = (mid[:, None] + half[:, None] * xg[None, :]).ravel()
        w = (half[:, None] * wg[None, :]).ravel()
        f = np.cos(u * y) * (u[:, None] ** -nu[None, :] @ coef)
        total += float(w @ f)
    # rotate onto u = U2 + i s / y
    s, ws = _gauss_laguerre()
    a = y * U2
    rot = (1.0 + 1j * s[:, None] / a) ** -nu[None, :]
    integ = ws @ rot
    pref = 1j * np.exp(1j * y * U2) / y * U2 ** -nu
    total += float(np.real(np.sum(pref * integ * coef)))
    return total


def _tail_origin(U: float, coef: np.ndarray, alpha: float) -> float:
    nu = alpha * np.arange(1, coef.size + 1)
    live = coef != 0
    if np.any(live & (nu <= 1.0)):
        return math.inf
    return float(np.sum(coef[live] * U ** (1.0 - nu[live]) / (nu[live] - 1.0)))


def _oscillation_rate(alpha: float, beta: float, U: float) -> float:
    """Local angular frequency of the oscillating part of ``E_beta(-u^alpha)`` for ``beta > 1``."""
    if beta <= 1.0:
        return 0.0
    p = alpha / beta
    rates = [p * u ** (p - 1.0) * math.sin(math.pi / beta) for u in (1.0, U)]
    return max(rates)


def cosine_profile(alpha: float, beta: float, y, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """``Phi(y) = (1/pi) int_0^inf cos(u y) E_{beta,b}(-u^alpha) du`` and an error estimate."""
    y = np.abs(np.atleast_1d(np.asarray(y, dtype=float)))
    U, coef = _asymptotic_plan(alpha, beta, b)
    omega = float(y.max(initial=0.0)) + _oscillation_rate(alpha, beta, U)
    width = _quantize_width(min(1.0, 2.0 * math.pi / omega) if omega > 0 else 1.0)
    nodes, weights, vals = _symbol_table(alpha, beta, b, width, U)
    wf = weights * vals
    out = np.empty_like(y)
    err = np.empty_like(y)
    scale = float(np.abs(wf).sum())
    for i, yi in enumerate(y):
        body = float(np.cos(nodes * yi) @ wf)
        tail = _tail_origin(U, coef, alpha) if yi == 0 else _tail_cosine(yi, U, coef, alpha)
        out[i] = (body + tail) / math.pi
        err[i] = (1e-15 * scale * math.sqrt(nodes.size / _GL_NODES) + 1e-13 * abs(tail)) / math.pi
    return out, err

# }}}


# {{{ routes

def _as_array(x) -> tuple[np.ndarray, tuple]:
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr).ravel(), arr.shape


def _shape(v: np.ndarray, shape: tuple):
    v = v.reshape(shape)
    return v[()] if v.ndim == 0 else v


def _route_h(spec: KernelSpec, xs: np.ndarray, t: float, route: str, b: float):
    h = kernel_hparams(spec.alpha, spec.beta, b)
    c = spec.scale(t)
    ax = np.abs(xs)
    val = np.empty_like(ax)
    err = np.zeros_like(ax)
    conv = np.ones(ax.shape, dtype=bool)
    at0 = ax == 0
    if np.any(at0):
        val[at0] = origin_value(spec, t, b)
    nz = ~at0
    if np.any(nz):
        z = ax[nz] / c
        if route == "contour":
            res = fox_h.eval_contour(h, z)
        else:
            fn = fox_h.eval_series_small if route == "series_small" else fox_h.eval_series_large
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", SeriesDivergenceWarning)
                res = fn(h, z)
        pref = 1.0 / (spec.alpha * ax[nz])
        val[nz] = np.asarray(res.value) * pref
        err[nz] = np.asarray(res.error) * pref
        conv[nz] = np.asarray(res.converged)
    return val, err, conv


def _route_fourier(spec: KernelSpec, xs: np.ndarray, t: float, b: float):
    c = spec.scale(t)
    phi, err = cosine_profile(spec.alpha, spec.beta, np.abs(xs) / c, b)
    # values buried in quadrature roundoff carry no digits
    return phi / c, err / c, np.isfinite(phi) & (err <= 1e-9 * np.abs(phi))


def evaluate(spec: KernelSpec, x, t: float, route: str = "auto", b: float = 1.0,
             strict: bool = True) -> KernelEval:
    """Kernel values with error estimates along one route.

    ``b = 1`` selects the fundamental solution, ``b = beta`` the source
    kernel G2.  ``auto`` picks the closed-form heat kernel at
    ``(alpha, beta) = (2, 1)`` and the contour route otherwise.  With
    ``strict`` a series route raises :class:`RegionError` at points outside
    its convergence region; otherwise those points come back with
    ``converged = False``.
    """
    if route not in ROUTES:
        raise ValueError(f"unknown route {route!r}; choose from {ROUTES}")
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    xs, shape = _as_array(x)
    if not np.all(np.isfinite(xs)):
        raise ValueError("x must be finite")
    used = route
    if route == "auto":
        if spec.alpha == 2.0 and spec.beta == 1.0:
            val = gaussian_kernel(xs, t, spec.eta)
            return KernelEval(_shape(val, shape), _shape(np.abs(val) * 1e-16, shape),
                              _shape(np.ones(xs.shape, bool), shape), "closed_form")
        used = "contour"
    if used == "fourier":
        val, err, conv = _route_fourier(spec, xs, t, b)
    else:
        val, err, conv = _route_h(spec, xs, t, used, b)
    if strict and used.startswith("series") and not np.all(conv):
        bad = xs[~conv]
        raise RegionError(f"{used} does not converge at {bad.size} point(s), e.g. x = {bad[0]:g}")
    return KernelEval(_shape(val, shape), _shape(err, shape), _shape(conv, shape), used)


def fundamental_solution(spec: KernelSpec, x, t: float, route: str = "auto"):
    """``N(x, t)`` for a unit point source at the origin."""
    return evaluate(spec, x, t, route).value


def green_g1(spec: KernelSpec, x, t: float, route: str = "fourier"):
    """Propagator of the initial value ``f``; equals the fundamental solution."""
    return evaluate(spec, x, t, route, b=1.0).value


def green_g2(spec: KernelSpec, x, t: float, route: str = "fourier"):
    """Source propagator with symbol ``E_{beta,beta}(-eta |k|^alpha t^beta)``."""
    return evaluate(spec, x, t, route, b=spec.beta).value


def tail_exponent(spec: KernelSpec, t: float = 1.0, lo: float = 1e2, hi: float = 1e4,
                  npts: int = 41, route: str = "contour") -> float:
    """Least-squares slope of ``log N`` against ``log |x|`` over ``[lo, hi]``."""
    x = np.geomspace(lo, hi, npts)
    val = evaluate(spec, x, t, route, strict=False).value
    if np.any(val <= 0):
        raise ValueError("kernel is not positive on the fit window")
    slope, _ = np.polyfit(np.log(x), np.log(val), 1)
    return float(slope)

# }}}
