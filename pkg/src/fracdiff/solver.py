"""Spectral solver for the Cauchy problem

    D_t^beta N = eta D_x^alpha N + phi(x, t),   N(x, 0) = f(x),  N_t(x, 0) = g(x)

on the whole line, approximated by a zero-padded periodic embedding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .kernels import KernelSpec
from .special_fn import mittag_leffler

__all__ = [
    "DomainError",
    "ResolutionError",
    "SampledField",
    "SourceTerm",
    "SolveConfig",
    "solve",
    "fourier_symbol_check",
    "spectral_grid",
]

DEFAULT_FLOOR = 1e-12


class DomainError(ValueError):
    """The sampled field does not decay to the boundary floor."""


class ResolutionError(ArithmeticError):
    """Spectral truncation error above the requested tolerance."""


@dataclass(frozen=True)
class SampledField:
    """Values on the uniform grid ``x0 + i dx``."""

    x0: float
    dx: float
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise ValueError("a sampled field needs a 1-D array of at least 2 values")
        if not self.dx > 0:
            raise ValueError(f"grid spacing must be positive, got {self.dx}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def on_grid(cls, x: np.ndarray, values: np.ndarray) -> "SampledField":
        x = np.asarray(x, dtype=float)
        dx = float(x[1] - x[0])
        if not np.allclose(np.diff(x), dx, rtol=1e-9, atol=0.0):
            raise ValueError("grid is not uniform")
        return cls(float(x[0]), dx, values)

    @classmethod
    def delta(cls, x0: float, dx: float, n: int, at: float = 0.0) -> "SampledField":
        """Discrete unit mass ``1/dx`` at the grid point nearest ``at``."""
        v = np.zeros(n)
        i = int(round((at - x0) / dx))
        if not 0 <= i < n:
            raise ValueError("delta location outside the grid")
        v[i] = 1.0 / dx
        return cls(x0, dx, v)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    def same_grid(self, other: "SampledField") -> bool:
        return self.n == other.n and math.isclose(self.x0, other.x0, abs_tol=1e-12 * self.dx) \
            and math.isclose(self.dx, other.dx, rel_tol=1e-12)

    def with_values(self, values: np.ndarray) -> "SampledField":
        return SampledField(self.x0, self.dx, values)

    def boundary_ratio(self) -> float:
        peak = float(np.max(np.abs(self.values)))
        if peak == 0.0:
            return 0.0
        return max(abs(self.values[0]), abs(self.values[-1])) / peak

    def check_floor(self, floor: float = DEFAULT_FLOOR, name: str = "field") -> None:
        r = self.boundary_ratio()
        if r > floor:
            raise DomainError(f"{name} boundary values are {r:.3g} of the peak (floor {floor:g}); widen the grid")


@dataclass(frozen=True)
class SourceTerm:
    """Prescribed source ``phi(x, t)``; ``evaluator`` must accept an array ``x`` and a scalar ``t``."""

    evaluator: Callable[[np.ndarray, float], np.ndarray]
    description: str = ""

    def sample(self, x: np.ndarray, t: float) -> np.ndarray:
        v = np.broadcast_to(np.asarray(self.evaluator(x, t), dtype=float), x.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError(f"source {self.description or 'phi'} is not finite at t = {t}")
        return v


@dataclass(frozen=True)
class SolveConfig:
    """Numerical controls for :func:`solve`.

    ``kmax`` zeroes wavenumbers above the cutoff (``None`` keeps every
    resolved mode), ``nk`` is the minimum FFT length, ``n_tau`` the number of
    graded panels for the source convolution and ``tol`` the admissible
    spectral truncation relative to the peak.
    """

    kmax: float | None = None
    nk: int = 64
    n_tau: int = 64
    tol: float = 1e-6
    pad: int = 4
    floor: float = DEFAULT_FLOOR

    def __post_init__(self) -> None:
        if self.kmax is not None and not self.kmax > 0:
            raise ValueError("kmax must be positive")
        if self.nk < 64:
            raise ValueError("nk must be at least 64")
        if self.n_tau < 8:
            raise ValueError("n_tau must be at least 8")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.pad < 4:
            raise ValueError("the periodic embedding needs a pad factor of at least 4")


def spectral_grid(n: int, dx: float, pad: int, nk: int = 0) -> tuple[int, np.ndarray]:
    """Padded FFT length and the non-negative wavenumbers of its real transform."""
    m = max(pad * n, nk)
    m += m % 2
    return m, 2.0 * np.pi * np.fft.rfftfreq(m, d=dx)


def _symbol(beta: float, b: float, arg: np.ndarray) -> np.ndarray:
    return mittag_leffler(arg, beta, b).real


def _tau_mesh(t: float, beta: float, n: int) -> np.ndarray:
    # graded towards xi = 0 where xi^(beta-1) is singular
    r = 1.0 / beta if beta < 1 else 1.0
    return t * (np.arange(n + 1) / n) ** r


def _convolution_weights(beta: float, lam: np.ndarray, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Product-quadrature weights for ``int_0^t w(xi) psi(xi) dxi`` with psi piecewise linear.

    ``w(xi) = xi^(beta-1) E_{beta,beta}(-lam xi^beta)`` has the exact moments
    ``M0(s) = s^beta E_{beta,beta+1}(-lam s^beta)`` and
    ``M1(s) = s^(beta+1) [E_{beta,beta+1} - E_{beta,beta+2}](-lam s^beta)``.
    Returns weights ``(left, right)`` of shape ``(len(lam), len(xi) - 1)``.
    """
    s = xi[None, :]
    arg = -lam[:, None] * s**beta
    e1 = _symbol(beta, beta + 1.0, arg)
    e2 = _symbol(beta, beta + 2.0, arg)
    m0 = s**beta * e1
    m1 = s ** (beta + 1.0) * (e1 - e2)
    d0 = np.diff(m0, axis=1)
    d1 = np.diff(m1, axis=1)
    a, b = xi[:-1][None, :], xi[1:][None, :]
    h = b - a
    left = (b * d0 - d1) / h
    right = (d1 - a * d0) / h
    return left, right


def solve(spec: KernelSpec, f: SampledField, g: SampledField | None, phi: SourceTerm | None,
          t: float, cfg: SolveConfig = SolveConfig()) -> SampledField:
    """``N(., t)`` on the grid of ``f`` by Fourier synthesis of the three propagator terms."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    if g is not None:
        if spec.beta <= 1:
            raise ValueError("a second initial condition g is only admissible for 1 < beta <= 2")
        if not g.same_grid(f):
            raise ValueError("f and g must live on the same grid")
    f.check_floor(cfg.floor, "f")
    if g is not None:
        g.check_floor(cfg.floor, "g")

    n, dx = f.n, f.dx
    m, k = spectral_grid(n, dx, cfg.pad, cfg.nk)
    keep = np.ones(k.shape, bool) if cfg.kmax is None else k <= cfg.kmax
    lam = spec.eta * k**spec.alpha
    lam_t = lam * t**spec.beta

    fh = np.fft.rfft(f.values, m)
    out = fh * _symbol(spec.beta, 1.0, -lam_t)
    trunc = np.abs(out)
    if g is not None:
        gterm = t * np.fft.rfft(g.values, m) * _symbol(spec.beta, 2.0, -lam_t)
        out = out + gterm
        trunc = trunc + np.abs(gterm)
    if phi is not None:
        sterm = _source_term(spec, phi, f, m, lam, t, cfg.n_tau)
        out = out + sterm
        trunc = trunc + np.abs(sterm)

    # resolved spectrum must have decayed at the Nyquist end (or the cutoff)
    peak = float(trunc.max(initial=0.0))
    edge = float(trunc[keep][-1]) if np.any(keep) else 0.0
    if peak > 0 and edge > cfg.tol * peak:
        raise ResolutionError(
            f"spectral tail at k = {k[keep][-1]:.4g} is {edge / peak:.3g} of the peak (tol {cfg.tol:g});"
            " refine the grid or smooth the data")
    out[~keep] = 0.0
    values = np.fft.irfft(out, m)[:n]
    return f.with_values(values)


def _source_term(spec: KernelSpec, phi: SourceTerm, f: SampledField, m: int,
                 lam: np.ndarray, t: float, n_tau: int) -> np.ndarray:
    xi = _tau_mesh(t, spec.beta, n_tau)
    x = f.x
    samples = np.stack([np.fft.rfft(phi.sample(x, t - s), m) for s in xi], axis=1)
    left, right = _convolution_weights(spec.beta, lam, xi)
    return np.sum(left * samples[:, :-1] + right * samples[:, 1:], axis=1)


def fourier_symbol_check(spec: KernelSpec, k: float, t: float, steps: int = 1000) -> float:
    """Largest residual of ``D_t^beta u + eta |k|^alpha u = 0`` for ``u = E_beta(-eta |k|^alpha t^beta)``.

    The Caputo derivative is discretized with the L1 formula on a uniform mesh
    of ``steps`` intervals over ``[0, t]``; the residual is taken over the
    second half of the mesh, away from the initial layer where ``u`` is only
    Hölder continuous.  At ``beta = 1`` a five-point (Richardson-extrapolated)
    central difference is used instead.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    beta = spec.beta
    if beta > 1:
        raise ValueError("the L1 residual check covers 0 < beta <= 1")
    lam = spec.eta * abs(k) ** spec.alpha
    if lam == 0.0:
        return 0.0
    dt = t / steps
    if beta == 1.0:
        tn = np.linspace(0.5 * t, t, steps // 2 + 1)
        u = lambda s: np.exp(-lam * s)  # noqa: E731
        h = dt
        du = (8.0 * (u(tn + h) - u(tn - h)) - (u(tn + 2 * h) - u(tn - 2 * h))) / (12.0 * h)
        return float(np.max(np.abs(du + lam * u(tn))))
    tg = dt * np.arange(steps + 1)
    u = mittag_leffler(-lam * tg**beta, beta).real
    du = np.diff(u)
    j = np.arange(steps)
    bj = (j + 1.0) ** (1.0 - beta) - j ** (1.0 - beta)
    scale = dt**-beta / math.gamma(2.0 - beta)
    res = []
    for n in range(steps // 2, steps + 1):
        d = scale * np.dot(bj[:n], du[n - 1::-1]) if n else 0.0
        res.append(d + lam * u[n])
    return float(np.max(np.abs(res)))
