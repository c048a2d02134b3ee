"""Fox H-function evaluation.

An H-function is the Mellin-Barnes integral

    H(z) = 1/(2 pi i) * int_L Theta(xi) z^(-xi) dxi

of a ratio of gamma products ``Theta``.  Three evaluators are provided:

* :func:`eval_contour` -- trapezoidal quadrature along a vertical line
  ``Re xi = gamma`` separating the two pole families;
* :func:`eval_series_small` -- residues at the left poles, an expansion in
  ascending powers of ``z``;
* :func:`eval_series_large` -- residues at the right poles, an expansion in
  descending powers of ``z``.

Coincident poles are merged and their order is computed after counting the
zeros contributed by the denominator; only effectively simple poles are
supported.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np

from .special_fn import _is_nonpositive_integer, _log_gamma_unchecked

__all__ = [
    "HParams",
    "ContourSpec",
    "HEval",
    "HPoleError",
    "PoleCollisionError",
    "NonConvergentIntegrandError",
    "SeriesDivergenceWarning",
    "theta",
    "log_theta",
    "strip",
    "default_contour",
    "eval_contour",
    "eval_series_small",
    "eval_series_large",
    "residue_terms",
    "scale_argument",
    "cancel",
    "ml_hparams",
    "exp_hparams",
    "bessel_k_hparams",
    "laplace_pair_hparams",
]

SEPARATION_DEPTH = 64
SEPARATION_TOL = 1e-9
MERGE_TOL = 1e-12
COLLISION_TOL = 1e-8
SERIES_RTOL = 1e-14
MAX_HALF_HEIGHT = 400.0


class HPoleError(ValueError):
    """A numerator gamma factor of Theta is evaluated at one of its poles."""


class PoleCollisionError(ValueError):
    """Residue series requested where poles are (nearly) multiple."""


class NonConvergentIntegrandError(ArithmeticError):
    """The Mellin-Barnes integrand does not decay along the vertical contour."""


class SeriesDivergenceWarning(RuntimeWarning):
    """Residue-series terms grow before reaching the truncation tolerance."""


@dataclass(frozen=True)
class HParams:
    """Parameter block ``H^{m,n}_{p,q}[z | (a_j, A_j); (b_j, B_j)]``."""

    m: int
    n: int
    upper: tuple[tuple[float, float], ...] = ()
    lower: tuple[tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "upper", tuple((float(a), float(A)) for a, A in self.upper))
        object.__setattr__(self, "lower", tuple((float(b), float(B)) for b, B in self.lower))
        p, q = len(self.upper), len(self.lower)
        if not (0 <= self.n <= p and 1 <= self.m <= q):
            raise ValueError(f"need 0 <= n <= p and 1 <= m <= q, got m={self.m}, n={self.n}, p={p}, q={q}")
        if any(A <= 0 for _, A in self.upper) or any(B <= 0 for _, B in self.lower):
            raise ValueError("all A_j and B_j must be strictly positive")
        for a, A in self.upper[: self.n]:
            for b, B in self.lower[: self.m]:
                k = np.arange(SEPARATION_DEPTH + 1)[:, None]
                l = np.arange(SEPARATION_DEPTH + 1)[None, :]
                if np.any(np.abs(A * (b + k) - B * (a - l - 1)) < SEPARATION_TOL):
                    raise ValueError(
                        f"pole families of Gamma({b}+{B}xi) and Gamma(1-{a}-{A}xi) overlap")

    @property
    def p(self) -> int:
        return len(self.upper)

    @property
    def q(self) -> int:
        return len(self.lower)

    def factors(self) -> list[tuple[float, float, int]]:
        """Gamma factors ``Gamma(c0 + c1 xi)`` with exponent +1 (numerator) or -1."""
        out = [(b, B, 1) for b, B in self.lower[: self.m]]
        out += [(1.0 - a, -A, 1) for a, A in self.upper[: self.n]]
        out += [(1.0 - b, -B, -1) for b, B in self.lower[self.m:]]
        out += [(a, A, -1) for a, A in self.upper[self.n:]]
        return out

    def decay_rate(self) -> float:
        """The exponent ``theta`` controlling ``|Theta(gamma + iy)| ~ exp(-pi theta |y| / 2)``."""
        return (sum(A for _, A in self.upper[: self.n]) - sum(A for _, A in self.upper[self.n:])
                + sum(B for _, B in self.lower[: self.m]) - sum(B for _, B in self.lower[self.m:]))


@dataclass(frozen=True)
class ContourSpec:
    """Truncated vertical contour ``[gamma - iT, gamma + iT]`` with ``nodes`` trapezoid nodes on ``[0, T]``."""

    gamma: float
    half_height: float
    nodes: int

    def __post_init__(self) -> None:
        if not self.half_height > 0:
            raise ValueError("half_height must be positive")
        if self.nodes < 16:
            raise ValueError("need at least 16 contour nodes")


class HEval(NamedTuple):
    value: np.ndarray | float
    error: np.ndarray | float
    converged: np.ndarray | bool
    nterms: int


def _scalar(x):
    x = np.asarray(x)
    return x[()] if x.ndim == 0 else x


# {{{ Theta

def log_theta(h: HParams, xi):
    """``log Theta(xi)`` as a complex number; ``-inf`` real part where a denominator factor vanishes."""
    xi = np.asarray(xi, dtype=np.complex128)
    flat = np.atleast_1d(xi).ravel()
    out = np.zeros_like(flat)
    for c0, c1, e in h.factors():
        arg = c0 + c1 * flat
        pole = _is_nonpositive_integer(arg)
        if e > 0:
            if np.any(pole):
                raise HPoleError(f"Gamma({c0:g} + {c1:g} xi) has a pole at xi = {flat[pole][0]}")
            out += _log_gamma_unchecked(arg)
        else:
            ok = ~pole
            out[ok] -= _log_gamma_unchecked(arg[ok])
            out[pole] = -np.inf
    return _scalar(out.reshape(xi.shape))


def theta(h: HParams, xi):
    """Gamma-product kernel ``Theta(xi)`` of the Mellin-Barnes integral."""
    with np.errstate(over="ignore", under="ignore"):
        return np.exp(log_theta(h, xi))

# }}}


# {{{ contour quadrature

def strip(h: HParams) -> tuple[float, float]:
    """Pole-free strip ``(left, right)``: right of every pole of ``Gamma(b_j + B_j xi)``
    and left of every pole of ``Gamma(1 - a_j - A_j xi)``."""
    left = max(-b / B for b, B in h.lower[: h.m])
    right = min(((1.0 - a) / A for a, A in h.upper[: h.n]), default=math.inf)
    return left, right


def default_contour(h: HParams, nodes: int = 16) -> ContourSpec:
    left, right = strip(h)
    if not left < right:
        raise ValueError(f"empty pole-free strip ({left}, {right}): no vertical contour exists")
    g = 0.5 * (left + right) if math.isfinite(right) else left + 0.5
    return ContourSpec(gamma=g, half_height=1.0, nodes=max(nodes, 16))


def _check_contour(h: HParams, c: ContourSpec) -> None:
    left, right = strip(h)
    if not left < c.gamma < right:
        raise ValueError(f"contour abscissa {c.gamma} outside the pole-free strip ({left}, {right})")


def _trapezoid(h: HParams, logz: np.ndarray, gamma: float, step: float, npts: int,
               with_abs: bool = False):
    y = step * np.arange(npts)
    lt = log_theta(h, gamma + 1j * y)
    w = np.full(npts, step / np.pi)
    w[0] *= 0.5
    # sum_k w_k Re[Theta_k exp(-(gamma + i y_k) log z)]
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        phase = np.exp(lt[None, :] - np.outer(logz, gamma + 1j * y))
    terms = phase.real * w
    if with_abs:
        return terms.sum(axis=1), np.abs(terms).sum(axis=1)
    return terms.sum(axis=1)


def _error_estimate(val: np.ndarray, coarse: np.ndarray, prev: np.ndarray | None,
                    mass: np.ndarray) -> np.ndarray:
    """Error of the fine rule from its two coarser neighbours.

    Both the step error and the truncation error decay exponentially, so
    halving the step or doubling the height roughly squares the relative
    error: ``e_fine ~ e_coarse**2``.  Cancellation between terms sets a
    floor of a few ulps of ``sum |terms|``.
    """
    scale = np.maximum(np.abs(val), 1e-300)
    with np.errstate(over="ignore", invalid="ignore"):
        rel = np.minimum(np.abs(val - coarse) / scale, 1.0) ** 2
        if prev is not None:
            rel = rel + np.minimum(np.abs(val - prev) / scale, 1.0) ** 2
    return rel * np.abs(val) + 16.0 * np.finfo(float).eps * mass


def eval_contour(h: HParams, z, c: ContourSpec | None = None, rtol: float = 1e-9) -> HEval:
    """Evaluate ``H(z)`` for ``z > 0`` by quadrature along ``Re xi = gamma``.

    With an explicit :class:`ContourSpec` a single fixed trapezoid rule is
    applied and the error is estimated from the half-node rule.  Without one,
    ``gamma`` is placed mid-strip, the step is set from the distance to the
    nearest pole and the half-height is doubled (up to 400) until the result
    changes by less than ``rtol``.
    """
    zarr = np.asarray(z, dtype=float)
    zf = np.atleast_1d(zarr).ravel()
    if np.any(zf <= 0):
        raise ValueError("eval_contour needs z > 0")
    logz = np.log(zf)
    rate = h.decay_rate()
    if rate <= 1e-12:
        raise NonConvergentIntegrandError(
            f"Mellin-Barnes integrand does not decay on a vertical line (theta = {rate:g})")

    if c is not None:
        _check_contour(h, c)
        step = c.half_height / (c.nodes - 1)
        fine = _trapezoid(h, logz, c.gamma, step, c.nodes)
        coarse = _trapezoid(h, logz, c.gamma, 2 * step, (c.nodes + 1) // 2)
        err = np.abs(fine - coarse)
        return HEval(_scalar(fine.reshape(zarr.shape)), _scalar(err.reshape(zarr.shape)),
                     _scalar((err <= rtol * np.abs(fine)).reshape(zarr.shape)), c.nodes)

    c0 = default_contour(h)
    left, right = strip(h)
    dist = min(c0.gamma - left, right - c0.gamma)
    lmax = float(np.max(np.abs(logz)))
    step = 2.0 * np.pi * dist / (40.0 + dist * lmax)
    half = max(8.0, 2.0 * 40.0 / (np.pi * rate))
    prev = None
    while True:
        npts = int(math.ceil(half / step)) + 1
        val = _trapezoid(h, logz, c0.gamma, step, npts)
        if prev is not None:
            change = np.abs(val - prev)
            if np.all(change <= rtol * np.maximum(np.abs(val), 1e-300)) or np.all(change == 0):
                break
        if half >= MAX_HALF_HEIGHT:
            if prev is None or np.any(~np.isfinite(val)):
                raise NonConvergentIntegrandError("contour quadrature did not settle by T = 400")
            break
        prev = val
        half = min(2.0 * half, MAX_HALF_HEIGHT)
    val, mass = _trapezoid(h, logz, c0.gamma, step, npts, with_abs=True)
    coarse = _trapezoid(h, logz, c0.gamma, 2 * step, (npts + 1) // 2)
    err = _error_estimate(val, coarse, prev, mass)
    conv = err <= rtol * np.abs(val) + 1e-300
    return HEval(_scalar(val.reshape(zarr.shape)), _scalar(err.reshape(zarr.shape)),
                 _scalar(conv.reshape(zarr.shape)), npts)

# }}}


# {{{ residue series

@dataclass(frozen=True)
class _Residue:
    xi: float
    log_coef: complex  # log of the residue coefficient; -inf real part for a vanishing residue


def _pole_laurent(c0: float, c1: float, xi0: float) -> tuple[int, float]:
    """Index ``k`` and ``log|c|``, sign of ``Gamma(c0 + c1 xi) ~ c / (xi - xi0)``."""
    k = int(round(-(c0 + c1 * xi0)))
    return k, (-1) ** k / (math.factorial(k) * c1) if k < 170 else (-1) ** k * math.exp(-math.lgamma(k + 1)) / c1


def residue_terms(h: HParams, side: str, terms: int) -> list[_Residue]:
    """Distinct poles on one side of the contour with their residue coefficients.

    ``side='left'`` collects the poles of the numerator ``Gamma(b_j + B_j xi)``
    factors (ascending powers of z); ``side='right'`` the poles of
    ``Gamma(1 - a_j - A_j xi)``.  The series is ``sum c_i z^(-xi_i)`` with the
    sign of the closing direction already folded into ``c_i``.
    """
    if side == "left":
        fam = [(b, B) for b, B in h.lower[: h.m]]
        locs = [(-(b + k) / B, j) for j, (b, B) in enumerate(fam) for k in range(terms)]
        reach = min((b + terms - 1) / B for b, B in fam)
        key = lambda x: -x  # noqa: E731
        inside = lambda x: -x <= reach + MERGE_TOL  # noqa: E731
    elif side == "right":
        fam = [(1.0 - a, A) for a, A in h.upper[: h.n]]
        if not fam:
            return []
        locs = [((c + l) / A, j) for j, (c, A) in enumerate(fam) for l in range(terms)]
        reach = min((c + terms - 1) / A for c, A in fam)
        key = lambda x: x  # noqa: E731
        inside = lambda x: x <= reach + MERGE_TOL  # noqa: E731
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")

    pts = sorted((x for x, _ in locs if inside(x)), key=key)
    merged: list[float] = []
    for x in pts:
        if merged and abs(x - merged[-1]) <= MERGE_TOL * max(1.0, abs(x)):
            continue
        if merged and abs(x - merged[-1]) < COLLISION_TOL:
            raise PoleCollisionError(f"poles at xi = {merged[-1]!r} and {x!r} nearly coincide")
        merged.append(x)

    sign = 1.0 if side == "left" else -1.0
    out = []
    for xi0 in merged[:terms]:
        order = 0
        log_c = 0.0 + 0.0j
        coef = sign
        for c0, c1, e in h.factors():
            arg = c0 + c1 * xi0
            if abs(arg - round(arg)) <= MERGE_TOL * max(1.0, abs(arg)) and round(arg) <= 0:
                _, lc = _pole_laurent(c0, c1, xi0)
                order += e
                coef *= lc if e > 0 else 1.0 / lc
            else:
                g = _log_gamma_unchecked(np.array([arg + 0j]))[0]
                log_c += e * g
        if order >= 2:
            raise PoleCollisionError(f"pole of order {order} at xi = {xi0}; logarithmic terms are not supported")
        if order <= 0:
            out.append(_Residue(xi0, complex(-np.inf, 0.0)))
        else:
            out.append(_Residue(xi0, log_c + np.log(complex(coef))))
    return out


def _sum_series(res: list[_Residue], z, side: str) -> HEval:
    zarr = np.asarray(z, dtype=float)
    zf = np.atleast_1d(zarr).ravel()
    if np.any(zf < 0):
        raise ValueError("series evaluators need z >= 0")
    with np.errstate(divide="ignore"):
        logz = np.log(zf)
    nz = zf.size
    total = np.zeros(nz)
    err = np.full(nz, np.inf)
    done = np.zeros(nz, dtype=bool)
    biggest = np.zeros(nz)
    best_term = np.full(nz, np.inf)
    best_sum = np.zeros(nz)
    for r in res:
        if np.isneginf(r.log_coef.real):
            continue
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            expo = r.log_coef - r.xi * logz
            term = np.exp(expo).real
        # 0^0 = 1 for a constant term at z = 0
        term = np.where((zf == 0) & (r.xi == 0), np.exp(r.log_coef).real, term)
        term = np.where((zf == 0) & (r.xi < 0), 0.0, term)
        active = ~done
        mag = np.abs(term)
        # optimal truncation bookkeeping for asymptotic series
        better = active & (mag < best_term)
        best_sum[better] = total[better]
        best_term[better] = mag[better]
        with np.errstate(invalid="ignore"):
            total[active] += term[active]
        biggest[active] = np.maximum(biggest[active], mag[active])
        newly = active & np.isfinite(total) & (mag <= SERIES_RTOL * np.abs(total))
        err[newly] = mag[newly]
        done |= newly
    eps = np.finfo(float).eps
    value = np.where(done, total, best_sum)
    err = np.where(done, err, best_term)
    err = np.where(np.isfinite(value), err, np.inf)
    err = np.maximum(err, 4 * eps * biggest)
    if not np.all(done):
        warnings.warn(f"{side} residue series not converged at {np.count_nonzero(~done)} point(s);"
                      " returning the optimally truncated sum", SeriesDivergenceWarning, stacklevel=3)
    return HEval(_scalar(value.reshape(zarr.shape)), _scalar(err.reshape(zarr.shape)),
                 _scalar(done.reshape(zarr.shape)), len(res))


def eval_series_small(h: HParams, z, terms: int = 120) -> HEval:
    """Residue series in ascending powers of ``z`` (poles left of the contour).

    The series stops at the first term below ``1e-14`` of the running sum.
    Where that never happens the optimally truncated sum is returned with
    ``converged=False`` and a :class:`SeriesDivergenceWarning`.
    """
    return _sum_series(residue_terms(h, "left", terms), z, "small-argument")


def eval_series_large(h: HParams, z, terms: int = 120) -> HEval:
    """Residue series in descending powers of ``z`` (poles right of the contour)."""
    return _sum_series(residue_terms(h, "right", terms), z, "large-argument")

# }}}


# {{{ transformations and identity families

def scale_argument(h: HParams, delta: float) -> HParams:
    """Parameters ``h'`` with ``H[h'](x) / delta == H[h](x**delta)``."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    return replace(h,
                   upper=tuple((a, A / delta) for a, A in h.upper),
                   lower=tuple((b, B / delta) for b, B in h.lower))


def cancel(h: HParams, tol: float = 1e-14) -> HParams:
    """Remove pairs shared by ``upper[n:]`` and ``lower[:m]`` (the cancellation law)."""
    upper = list(h.upper)
    lower = list(h.lower)
    m = h.m
    j = h.n
    while j < len(upper):
        a, A = upper[j]
        hit = next((i for i in range(m) if abs(lower[i][0] - a) <= tol and abs(lower[i][1] - A) <= tol), None)
        if hit is None or m == 1:
            j += 1
            continue
        del upper[j]
        del lower[hit]
        m -= 1
    return HParams(m, h.n, tuple(upper), tuple(lower))


def ml_hparams(alpha: float, beta: float = 1.0) -> HParams:
    """``E_{alpha,beta}(z) = H^{1,1}_{1,2}[-z | (0,1); (0,1), (1-beta, alpha)]``."""
    return HParams(1, 1, ((0.0, 1.0),), ((0.0, 1.0), (1.0 - beta, alpha)))


def exp_hparams(alpha: float) -> HParams:
    """``H^{1,0}_{0,1}[x | (alpha,1)] = x^alpha exp(-x)``."""
    return HParams(1, 0, (), ((alpha, 1.0),))


def bessel_k_hparams(nu: float) -> HParams:
    """``H^{2,0}_{0,2}[x | (nu/2,1), (-nu/2,1)] = 2 K_nu(2 sqrt(x))``."""
    return HParams(2, 0, (), ((nu / 2.0, 1.0), (-nu / 2.0, 1.0)))


def laplace_pair_hparams(rho: float, sigma: float) -> HParams:
    """``H^{1,0}_{1,1}[. | (rho,sigma); (0,1)]``, the inverse Laplace transform of
    ``s^-rho exp(-z s^sigma)`` read as ``t^(rho-1) H(z t^-sigma)``."""
    return HParams(1, 0, ((rho, sigma),), ((0.0, 1.0),))


def params_from_pairs(m: int, n: int, upper: Sequence[Sequence[float]], lower: Sequence[Sequence[float]]) -> HParams:
    return HParams(m, n, tuple(map(tuple, upper)), tuple(map(tuple, lower)))

# }}}
