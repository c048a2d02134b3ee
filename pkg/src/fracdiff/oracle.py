"""Independent numerical machinery used to validate the analytic routes.

Nothing here goes through the H-function code: the space operator is a
pseudo-spectral multiplier, time is stepped with the L1 Caputo scheme,
Laplace pairs are inverted on a Talbot contour and stable densities come
from adaptive oscillatory quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from .kernels import KernelSpec
from .solver import DEFAULT_FLOOR, SampledField, SourceTerm, spectral_grid

__all__ = [
    "AliasingWarning",
    "HistoryMismatchError",
    "OscillationError",
    "TimeStepPlan",
    "weyl_apply",
    "caputo_l1_step",
    "run_l1",
    "l1_scalar",
    "talbot_invert",
    "stable_density",
    "stable_tail_mass",
    "riemann_liouville_integral",
]


class AliasingWarning(RuntimeWarning):
    """Spectral energy near the Nyquist end exceeds the aliasing threshold."""


class HistoryMismatchError(ValueError):
    """The field handed to a step is not the last state recorded in the plan."""


class OscillationError(ArithmeticError):
    """Talbot quadrature did not settle under node doubling."""


ALIAS_TOL = 1e-8


# {{{ space operator

def _embed(field: SampledField, pad: int) -> tuple[int, np.ndarray, np.ndarray]:
    m, k = spectral_grid(field.n, field.dx, pad)
    return m, k, np.fft.rfft(field.values, m)


def weyl_apply(mu: float, field: SampledField, pad: int = 1,
               floor: float = DEFAULT_FLOOR) -> SampledField:
    """Apply the symmetric fractional derivative with Fourier multiplier ``-|k|^mu``.

    ``pad = 1`` treats the grid as one period; larger values zero-pad first.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    field.check_floor(floor)
    m, k, fh = _embed(field, pad)
    energy = np.abs(fh) ** 2
    total = energy.sum()
    top = energy[int(0.75 * k.size):].sum()
    if total > 0 and top > ALIAS_TOL * total:
        warnings.warn(f"spectral tail holds {top / total:.2e} of the energy; the field may be aliased",
                      AliasingWarning, stacklevel=2)
    out = np.fft.irfft(-(k**mu) * fh, m)[: field.n]
    return field.with_values(out)

# }}}


# {{{ L1 Caputo stepper

@dataclass
class TimeStepPlan:
    """Time mesh and memory of an L1 run.

    The mesh is ``t_j = horizon (j / steps)^grading``; ``grading = 1`` is
    uniform with step ``dt``.  ``history`` holds one snapshot per completed
    step, ``initial`` the state at ``t = 0``.
    """

    dt: float
    steps: int
    grading: float = 1.0
    history: list[SampledField] = field(default_factory=list)
    initial: SampledField | None = None
    _spectra: list[np.ndarray] = field(default_factory=list, repr=False)

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")
        if not self.grading >= 1:
            raise ValueError("grading exponent must be at least 1")

    @classmethod
    def uniform(cls, horizon: float, steps: int) -> "TimeStepPlan":
        return cls(horizon / steps, steps)

    @classmethod
    def graded(cls, horizon: float, steps: int, beta: float) -> "TimeStepPlan":
        """Mesh graded with exponent ``(2 - beta) / beta``, which restores order ``2 - beta``
        for solutions that behave like ``t^beta`` near the origin."""
        return cls(horizon / steps, steps, grading=max(1.0, (2.0 - beta) / beta))

    @property
    def horizon(self) -> float:
        return self.dt * self.steps

    @property
    def completed(self) -> int:
        return len(self.history)

    @property
    def done(self) -> bool:
        return self.completed >= self.steps

    def times(self) -> np.ndarray:
        return self.horizon * (np.arange(self.steps + 1) / self.steps) ** self.grading

    def current(self) -> SampledField | None:
        return self.history[-1] if self.history else self.initial


def _l1_weights(t: np.ndarray, m: int, beta: float) -> np.ndarray:
    """Coefficients ``a_j`` with ``D^beta u(t_m) ~ sum_{j=1..m} a_j (u_j - u_{j-1})``."""
    j = np.arange(1, m + 1)
    h = t[j] - t[j - 1]
    if beta == 1.0:
        a = np.zeros(m)
        a[-1] = 1.0 / h[-1]
        return a
    e = 1.0 - beta
    return ((t[m] - t[j - 1]) ** e - (t[m] - t[j]) ** e) / (h * math.gamma(2.0 - beta))


def caputo_l1_step(spec: KernelSpec, plan: TimeStepPlan, field: SampledField,
                   phi: SourceTerm | None = None, pad: int = 4) -> SampledField:
    """One implicit L1 step of ``D_t^beta N = eta D_x^alpha N + phi``.

    The space operator is diagonal in Fourier space, so the implicit solve is
    a division per mode and the scheme is unconditionally stable.
    """
    beta = spec.beta
    if not 0 < beta <= 1:
        raise ValueError("the L1 scheme covers 0 < beta <= 1")
    if plan.done:
        raise HistoryMismatchError("plan has already completed all of its steps")
    cur = plan.current()
    if cur is None:
        field.check_floor()
        plan.initial = field
        m_fft, k, fh = _embed(field, pad)
        plan._spectra = [fh]
    elif not (cur.same_grid(field) and np.array_equal(cur.values, field.values)):
        raise HistoryMismatchError(
            f"field does not match the state after step {plan.completed}; pass the last returned field")
    if len(plan._spectra) != plan.completed + 1:
        raise HistoryMismatchError("plan history and cached spectra are out of sync")

    m_fft, k = spectral_grid(field.n, field.dx, pad)
    lam = spec.eta * k**spec.alpha
    t = plan.times()
    m = plan.completed + 1
    a = _l1_weights(t, m, beta)
    spectra = plan._spectra
    rhs = a[-1] * spectra[-1]
    if m > 1:
        diffs = np.diff(np.stack(spectra), axis=0)  # u_j - u_{j-1}, j = 1..m-1
        rhs = rhs - a[:-1] @ diffs
    if phi is not None:
        rhs = rhs + np.fft.rfft(phi.sample(field.x, float(t[m])), m_fft)
    new = rhs / (a[-1] + lam)
    spectra.append(new)
    out = field.with_values(np.fft.irfft(new, m_fft)[: field.n])
    plan.history.append(out)
    return out


def run_l1(spec: KernelSpec, field: SampledField, horizon: float, steps: int,
           phi: SourceTerm | None = None, graded: bool = True, pad: int = 4) -> tuple[SampledField, TimeStepPlan]:
    """March ``field`` to ``horizon``; returns the final state and the filled plan."""
    plan = TimeStepPlan.graded(horizon, steps, spec.beta) if graded else TimeStepPlan.uniform(horizon, steps)
    cur = field
    for _ in range(steps):
        cur = caputo_l1_step(spec, plan, cur, phi, pad)
    return cur, plan


def l1_scalar(lam: float, beta: float, horizon: float, steps: int, grading: float = 1.0) -> float:
    """L1 solution at ``horizon`` of ``D^beta u = -lam u``, ``u(0) = 1`` (single Fourier mode)."""
    t = horizon * (np.arange(steps + 1) / steps) ** grading
    u = np.empty(steps + 1)
    u[0] = 1.0
    for m in range(1, steps + 1):
        a = _l1_weights(t, m, beta)
        hist = a[:-1] @ np.diff(u[:m]) if m > 1 else 0.0
        u[m] = (a[-1] * u[m - 1] - hist) / (a[-1] + lam)
    return float(u[-1])

# }}}


# {{{ Talbot inversion

# Weideman's optimized fixed Talbot contour
_TALBOT = (-0.6122, 0.5017, 0.6407, 0.2645)


def _talbot_sum(F: Callable[[np.ndarray], np.ndarray], t: float, nodes: int) -> float:
    s0, s1, s2, s3 = _TALBOT
    h = 2.0 * np.pi / nodes
    theta = -np.pi + h * (np.arange(nodes) + 0.5)
    cot = 1.0 / np.tan(s2 * theta)
    z = nodes / t * (s0 + s1 * theta * cot + 1j * s3 * theta)
    dz = nodes / t * (s1 * cot - s1 * s2 * theta / np.sin(s2 * theta) ** 2 + 1j * s3)
    vals = np.asarray(F(z), dtype=np.complex128)
    return float((h / (2j * np.pi) * np.sum(np.exp(z * t) * vals * dz)).real)


def talbot_invert(F: Callable[[np.ndarray], np.ndarray], t: float, nodes: int = 64,
                  tol: float = 1e-6) -> float:
    """Inverse Laplace transform of ``F`` at ``t`` by trapezoidal quadrature on a Talbot contour.

    ``F`` receives an array of complex ``s`` and must use the principal branch
    for fractional powers.  The result is compared against the rule with half
    the nodes and :class:`OscillationError` is raised if they differ by more
    than ``tol`` (relative to ``max(1, |f|)``).
    """
    if not t > 0:
        raise ValueError("t must be positive")
    if nodes < 8:
        raise ValueError("need at least 8 nodes")
    fine = _talbot_sum(F, t, nodes)
    coarse = _talbot_sum(F, t, nodes // 2)
    if not (math.isfinite(fine) and abs(fine - coarse) <= tol * max(1.0, abs(fine))):
        raise OscillationError(f"Talbot rule unsettled: {coarse!r} ({nodes // 2} nodes) vs {fine!r} ({nodes} nodes)")
    return fine

# }}}


# {{{ stable densities

_STABLE_SWITCH = 40.0
_STABLE_TERMS = 60


def _stable_series(alpha: float, y: float) -> tuple[float, float]:
    """Large-``y`` expansion of the standard density; returns (value, last term used)."""
    total = 0.0
    best = math.inf
    for n in range(1, _STABLE_TERMS + 1):
        lg = math.lgamma(n * alpha + 1.0) - math.lgamma(n + 1.0) - (n * alpha + 1.0) * math.log(y)
        sn = math.sin(n * math.pi * alpha / 2.0)
        if abs(sn) < 1e-12:
            continue
        term = (-1.0) ** (n + 1) * math.exp(lg) * sn / math.pi
        if abs(term) > best and abs(term) > 0:
            break
        total += term
        best = abs(term)
        if best < 1e-17 * abs(total):
            break
    return total, best


def stable_density(alpha: float, scale: float, x):
    """Symmetric stable density with characteristic function ``exp(-scale |k|^alpha)``.

    Quadrature of ``(1/pi) int_0^inf cos(k x) exp(-scale k^alpha) dk`` via
    QUADPACK's Fourier-integral rule, switching to the large-``|x|`` series
    far out in the tail.
    """
    if not 0 < alpha <= 2:
        raise ValueError("alpha must lie in (0, 2]")
    if not scale > 0:
        raise ValueError("scale must be positive")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    c = scale ** (1.0 / alpha)
    out = np.empty(xs.shape)
    for i, xi in enumerate(np.abs(xs).ravel()):
        y = xi / c
        if y == 0.0:
            val = math.gamma(1.0 + 1.0 / alpha) / math.pi
        elif y > _STABLE_SWITCH:
            val = _stable_series(alpha, y)[0]
        else:
            g = lambda k: math.exp(-(k**alpha))  # noqa: E731
            # exp(-k^alpha) < 1e-17 beyond kcut, so the window is finite
            kcut = 40.0 ** (1.0 / alpha)
            with warnings.catch_warnings():
                # QUADPACK flags roundoff once the absolute target is met
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                body, _ = integrate.quad(g, 0.0, 1.0, weight="cos", wvar=y, epsabs=1e-15, epsrel=1e-13, limit=400)
                tail, _ = integrate.quad(g, 1.0, kcut, weight="cos", wvar=y, epsabs=1e-15, epsrel=1e-13, limit=2000)
            val = (body + tail) / math.pi
        out.ravel()[i] = val / c
    out = out.reshape(np.shape(x))
    return out[()] if out.ndim == 0 else out


def stable_tail_mass(alpha: float, scale: float, X: float) -> float:
    """``int_X^inf`` of the stable density, from the term-wise integrated tail series."""
    c = scale ** (1.0 / alpha)
    y = X / c
    if alpha == 2.0:
        return 0.5 * math.erfc(y / 2.0)
    total = 0.0
    best = math.inf
    for n in range(1, _STABLE_TERMS + 1):
        lg = math.lgamma(n * alpha + 1.0) - math.lgamma(n + 1.0) - n * alpha * math.log(y)
        sn = math.sin(n * math.pi * alpha / 2.0)
        if abs(sn) < 1e-12:
            continue
        term = (-1.0) ** (n + 1) * math.exp(lg) * sn / (math.pi * n * alpha)
        if abs(term) > best:
            break
        total += term
        best = abs(term)
        if best < 1e-17 * abs(total):
            break
    return total

# }}}


def riemann_liouville_integral(f: Callable[[float], float], t: float, nu: float) -> float:
    """``(1/Gamma(nu)) int_0^t (t - tau)^(nu - 1) f(tau) dtau`` with the algebraic weight handled exactly."""
    if not nu > 0:
        raise ValueError("nu must be positive")
    if not t > 0:
        raise ValueError("t must be positive")
    val, _ = integrate.quad(f, 0.0, t, weight="alg", wvar=(0.0, nu - 1.0), epsabs=1e-15, epsrel=1e-13, limit=200)
    return val / math.gamma(nu)
