"""Scalar special functions: complex log-gamma, reciprocal gamma and the
two-parameter Mittag-Leffler function.

All routines accept scalars or arrays and work in complex arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "GammaPoleError",
    "MLConvergenceError",
    "MLParams",
    "log_gamma",
    "rgamma",
    "gamma",
    "mittag_leffler",
    "ml_series",
]


class GammaPoleError(ValueError):
    """Raised when log-gamma is requested at a non-positive integer."""


class MLConvergenceError(ArithmeticError):
    """Raised when the Mittag-Leffler evaluator cannot meet its accuracy target."""


# B_{2k} / (2k (2k - 1)) for k = 1..12
_STIRLING = np.array([
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
    77683.0 / 5796.0,
    -236364091.0 / 1506960.0,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_SHIFT_TO = 12.0
_POLE_TOL = 1e-14


def _is_nonpositive_integer(z: np.ndarray) -> np.ndarray:
    re = z.real
    return (z.imag == 0) & (re <= 0) & (np.abs(re - np.round(re)) <= _POLE_TOL * np.maximum(1.0, np.abs(re)))


def _log_gamma_unchecked(z: np.ndarray) -> np.ndarray:
    # upward recurrence keeps the standard branch (cut along the negative axis)
    shift = np.maximum(0.0, np.ceil(_SHIFT_TO - z.real)).astype(np.int64)
    w = z.astype(np.complex128, copy=True)
    acc = np.zeros_like(w)
    nmax = int(shift.max()) if shift.size else 0
    for k in range(nmax):
        active = shift > k
        acc[active] += np.log(w[active])
        w[active] += 1.0
    inv = 1.0 / w
    inv2 = inv * inv
    series = np.zeros_like(w)
    for c in _STIRLING[::-1]:
        series = series * inv2 + c
    series *= inv
    return (w - 0.5) * np.log(w) - w + _HALF_LOG_2PI + series - acc


def log_gamma(z):
    """Principal branch of ``log Gamma(z)``.

    Stirling's series after an upward shift to ``Re z >= 12``; the branch cut
    lies along the negative real axis, with values on the cut taken as the
    limit from above (the same convention as ``scipy.special.loggamma``).
    """
    arr = np.asarray(z, dtype=np.complex128)
    flat = np.atleast_1d(arr).ravel()
    bad = _is_nonpositive_integer(flat)
    if np.any(bad):
        raise GammaPoleError(f"log_gamma has a pole at z = {flat[bad][0].real:g}")
    out = _log_gamma_unchecked(flat).reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def rgamma(z):
    """Reciprocal gamma function ``1/Gamma(z)``, exactly zero at the poles of Gamma."""
    arr = np.asarray(z, dtype=np.complex128)
    flat = np.atleast_1d(arr).ravel()
    out = np.zeros_like(flat)
    ok = ~_is_nonpositive_integer(flat)
    if np.any(ok):
        with np.errstate(over="ignore", under="ignore"):
            out[ok] = np.exp(-_log_gamma_unchecked(flat[ok]))
    out = out.reshape(arr.shape)
    return out[()] if out.ndim == 0 else out


def gamma(z):
    """Gamma function via :func:`log_gamma` (complex result)."""
    with np.errstate(over="ignore"):
        return np.exp(log_gamma(z))


# {{{ Mittag-Leffler

@dataclass(frozen=True)
class MLParams:
    """Parameters ``(alpha, beta)`` of ``E_{alpha,beta}``."""

    alpha: float
    beta: float = 1.0

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"Mittag-Leffler order must be positive, got alpha={self.alpha}")
        if not math.isfinite(self.beta):
            raise ValueError(f"beta must be finite, got {self.beta}")

    def __call__(self, z):
        return mittag_leffler(z, self.alpha, self.beta)


# switch from the Taylor series to Laplace inversion above this modulus
TAYLOR_RADIUS = 1.0
_TAYLOR_MIN_ALPHA = 0.1
_LOG_EPS_MACHINE = math.log(np.finfo(float).eps)
_LOG_TARGET = math.log(1e-15)


def ml_series(z, alpha: float, beta: float = 1.0, nterms: int | None = None):
    """Partial sum of the defining power series of ``E_{alpha,beta}``.

    Evaluated by Horner's rule; ``nterms`` defaults to enough terms for
    ``|z| <= 1`` at double precision.
    """
    arr = np.asarray(z, dtype=np.complex128)
    if nterms is None:
        nterms = _taylor_terms(float(np.max(np.abs(arr), initial=0.0)), alpha, beta)
    coef = rgamma(alpha * np.arange(nterms) + beta)
    acc = np.zeros_like(arr)
    for c in coef[::-1]:
        acc = acc * arr + c
    return acc[()] if acc.ndim == 0 else acc


def _taylor_terms(r: float, alpha: float, beta: float) -> int:
    # first n with r^n / Gamma(alpha n + beta) < 1e-17 (after the terms peak)
    if r == 0.0:
        return 1
    logr = math.log(r)
    for n in range(1, 5000):
        arg = alpha * n + beta
        lg = math.lgamma(arg) if arg > 0 else 0.0
        if arg > 1 and n * logr - lg < -39.0:
            return n + 1
    raise MLConvergenceError("Taylor series for Mittag-Leffler needs more than 5000 terms")


def _optimal_param_rb(t, phi_j, phi_j1, pj, qj, log_eps):
    fac = 1.01
    f_max = math.exp(log_eps - _LOG_EPS_MACHINE)
    sq_j = math.sqrt(phi_j)
    threshold = 2.0 * math.sqrt((log_eps - _LOG_EPS_MACHINE) / t)
    sq_j1 = min(math.sqrt(phi_j1), threshold - sq_j)
    f_bar = None
    if pj < 1e-14 and qj < 1e-14:
        sqb_j, sqb_j1 = sq_j, sq_j1
        f_bar = 1.0
    elif pj < 1e-14:
        sqb_j = sq_j
        f_min = fac * (sq_j / (sq_j1 - sq_j)) ** qj if sq_j > 0 else fac
        if f_min < f_max:
            f_bar = f_min + f_min / f_max * (f_max - f_min)
            fq = f_bar ** (-1.0 / qj)
            sqb_j1 = (2.0 * sq_j1 - fq * sq_j) / (2.0 + fq)
    elif qj < 1e-14:
        sqb_j1 = sq_j1
        f_min = fac * (sq_j1 / (sq_j1 - sq_j)) ** pj
        if f_min < f_max:
            f_bar = f_min + f_min / f_max * (f_max - f_min)
            fp = f_bar ** (-1.0 / pj)
            sqb_j = (2.0 * sq_j + fp * sq_j1) / (2.0 - fp)
    else:
        f_min = fac * (sq_j + sq_j1) / (sq_j1 - sq_j) ** max(pj, qj)
        if f_min < f_max:
            f_min = max(f_min, 1.5)
            f_bar = f_min + f_min / f_max * (f_max - f_min)
            fp = f_bar ** (-1.0 / pj)
            fq = f_bar ** (-1.0 / qj)
            w = -phi_j1 * t / log_eps
            den = 2.0 + w - (1.0 + w) * fp + fq
            sqb_j = ((2.0 + w + fq) * sq_j + fp * sq_j1) / den
            sqb_j1 = (-(1.0 + w) * fq * sq_j + (2.0 + w - (1.0 + w) * fp) * sq_j1) / den
    if f_bar is None:
        return 0.0, 0.0, math.inf
    log_eps = log_eps - math.log(f_bar)
    w = -sqb_j1**2 * t / log_eps
    mu = (((1.0 + w) * sqb_j + sqb_j1) / (2.0 + w)) ** 2
    h = -2.0 * math.pi / log_eps * (sqb_j1 - sqb_j) / ((1.0 + w) * sqb_j + sqb_j1)
    n = math.ceil(math.sqrt(1.0 - log_eps / t / mu) / h)
    return mu, h, n


def _optimal_param_ru(t, phi_j, pj, log_eps):
    sq_phi = math.sqrt(phi_j)
    phibar = phi_j * 1.01 if phi_j > 0 else 0.01
    sq_phibar = math.sqrt(phibar)
    f_min, f_max, f_tar = 1.0, 10.0, 5.0
    for _ in range(200):
        phi_t = phibar * t
        lep = log_eps / phi_t
        n = math.ceil(phi_t / math.pi * (1.0 - 1.5 * lep + math.sqrt(1.0 - 2.0 * lep)))
        a = math.pi * n / phi_t
        sq_mu = sq_phibar * abs(4.0 - a) / abs(7.0 - math.sqrt(1.0 + 12.0 * a))
        fbar = ((sq_phibar - sq_phi) / sq_mu) ** (-pj)
        if pj < 1e-14 or f_min < fbar < f_max:
            break
        sq_phibar = f_tar ** (-1.0 / pj) * sq_mu + sq_phi
        phibar = sq_phibar**2
    mu = sq_mu**2
    h = (-3.0 * a - 2.0 + 2.0 * math.sqrt(1.0 + 12.0 * a)) / (4.0 - a) / n
    threshold = (log_eps - _LOG_EPS_MACHINE) / t
    if mu > threshold:
        q = 0.0 if abs(pj) < 1e-14 else f_tar ** (-1.0 / pj) * math.sqrt(mu)
        phibar = (q + sq_phi) ** 2
        if phibar < threshold:
            w = math.sqrt(_LOG_EPS_MACHINE / (_LOG_EPS_MACHINE - log_eps))
            u = math.sqrt(-phibar * t / _LOG_EPS_MACHINE)
            mu = threshold
            n = math.ceil(w * log_eps / 2.0 / math.pi / (u * w - 1.0))
            h = w / n
        else:
            n, h = math.inf, 0.0
    return mu, h, n


def _contour_plan(z: complex, alpha: float, beta: float):
    """Parabolic contour ``s = mu (1 + iu)^2`` and the poles left to the right of it.

    Follows Garrappa's optimal-parabolic-contour choice of ``(mu, h, N)``.
    """
    theta = math.atan2(z.imag, z.real)
    kmin = math.ceil(-alpha / 2.0 - theta / (2.0 * math.pi))
    kmax = math.floor(alpha / 2.0 - theta / (2.0 * math.pi))
    r = abs(z) ** (1.0 / alpha)
    poles = [r * complex(math.cos((theta + 2 * k * math.pi) / alpha), math.sin((theta + 2 * k * math.pi) / alpha))
             for k in range(kmin, kmax + 1)]
    phis = [(s.real + abs(s)) / 2.0 for s in poles]
    order = np.argsort(phis, kind="stable")
    poles = [poles[i] for i in order if phis[i] > 1e-15]
    phis = [phis[i] for i in order if phis[i] > 1e-15]

    s_star = [0.0j] + poles
    phi = [0.0] + phis + [math.inf]
    nsing = len(s_star)
    p = [max(0.0, -2.0 * (alpha - beta + 1.0))] + [1.0] * (nsing - 1)
    q = [1.0] * (nsing - 1) + [math.inf]

    log_eps = _LOG_TARGET
    for _ in range(20):
        admissible = [j for j in range(nsing)
                      if phi[j] < (log_eps - _LOG_EPS_MACHINE) and phi[j] < phi[j + 1]]
        best = (0.0, 0.0, math.inf, 0)
        for j in admissible:
            if j < nsing - 1:
                mu, h, n = _optimal_param_rb(1.0, phi[j], phi[j + 1], p[j], q[j], log_eps)
            else:
                mu, h, n = _optimal_param_ru(1.0, phi[j], p[j], log_eps)
            if n < best[2]:
                best = (mu, h, n, j)
        if best[2] <= 200:
            mu, h, n, j = best
            return mu, h, int(n), tuple(s_star[j + 1:])
        log_eps += math.log(10.0)
    raise MLConvergenceError(f"no admissible contour for E_{{{alpha},{beta}}}({z})")


def _ml_inversion(z: np.ndarray, alpha: float, beta: float, plan) -> np.ndarray:
    mu, h, n, poles = plan
    u = h * np.arange(-n, n + 1)
    s = mu * (1j * u + 1.0) ** 2
    ds = 2.0 * mu * (1j - u)
    with np.errstate(over="ignore", invalid="ignore"):
        weight = np.exp(s) * s ** (alpha - beta) * ds
        sa = s**alpha
    out = np.empty(z.shape, dtype=np.complex128)
    chunk = max(1, 200_000 // len(u))
    for i in range(0, z.size, chunk):
        zz = z[i:i + chunk, None]
        with np.errstate(over="ignore", invalid="ignore"):
            out[i:i + chunk] = (weight / (sa - zz)).sum(axis=1) * h / (2j * np.pi)
    for sp in poles:
        if sp.real > 700.0:
            # exp(s*) overflows; the residue dominates and the value is infinite
            out[:] = np.inf
            continue
        out += sp ** (1.0 - beta) * np.exp(sp) / alpha
    return out


def mittag_leffler(z, alpha: float, beta: float = 1.0):
    """Two-parameter Mittag-Leffler function ``E_{alpha,beta}(z)``.

    Uses the Taylor series for ``|z| <= 1`` and otherwise inverts the Laplace
    transform ``s^(alpha-beta) / (s^alpha - z)`` at ``t = 1`` by trapezoidal
    quadrature on an optimal parabolic contour, adding the residues of the
    poles that fall to the right of the contour.

    Returns a complex array (or scalar) of the same shape as ``z``.
    """
    MLParams(alpha, beta)
    arr = np.asarray(z, dtype=np.complex128)
    flat = np.atleast_1d(arr).ravel()
    out = np.empty_like(flat)
    if not np.all(np.isfinite(flat)):
        raise ValueError("Mittag-Leffler argument must be finite")
    if alpha == 1.0 and beta == 1.0:
        # the contour route only has absolute accuracy where exp(z) is tiny
        out = np.exp(flat).reshape(arr.shape)
        return out[()] if out.ndim == 0 else out

    absz = np.abs(flat)
    small = absz <= TAYLOR_RADIUS if alpha >= _TAYLOR_MIN_ALPHA else absz < 1e-15
    if np.any(small):
        out[small] = ml_series(flat[small], alpha, beta)

    rest = np.flatnonzero(~small)
    plans: dict = {}
    for i in rest:
        plan = _contour_plan(complex(flat[i]), alpha, beta)
        plans.setdefault(plan, []).append(i)
    for plan, idx in plans.items():
        idx = np.asarray(idx)
        out[idx] = _ml_inversion(flat[idx], alpha, beta, plan)

    out = out.reshape(arr.shape)
    return out[()] if out.ndim == 0 else out

# }}}
