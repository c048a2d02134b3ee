"""Fractional absolute moments ``<|x|^delta>`` of the fundamental solution."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import fox_h
from .kernels import KernelSpec, evaluate, kernel_hparams
from .solver import SolveConfig
from .special_fn import rgamma

__all__ = [
    "InadmissibleMomentError",
    "TailDivergenceError",
    "MomentPoleError",
    "MomentQuery",
    "moment_formula",
    "moment_quadrature",
]


class InadmissibleMomentError(ValueError):
    """The requested order lies outside the window where the moment is finite."""


class TailDivergenceError(ArithmeticError):
    """``|x|^delta N`` is not integrable because of the power-law tail."""


class MomentPoleError(ArithmeticError):
    """A gamma or sine factor of the closed form is singular at this order."""


@dataclass(frozen=True)
class MomentQuery:
    """Moment order ``delta`` for a kernel of space order ``alpha``.

    ``admissible`` holds when ``delta > -1``, ``delta + alpha > 0`` and the
    tail allows it: ``delta < alpha`` for ``alpha < 2``, ``delta <= 2`` at
    ``alpha = 2``.
    """

    delta: float
    alpha: float
    admissible: bool = field(init=False)
    reason: str = field(init=False)

    def __post_init__(self) -> None:
        d, a = self.delta, self.alpha
        if not math.isfinite(d):
            reason = "delta must be finite"
        elif not d > -1:
            reason = f"delta = {d} must exceed -1"
        elif not d + a > 0:
            reason = f"delta + alpha = {d + a} must be positive"
        elif a < 2 and not d < a:
            reason = f"delta = {d} must be below alpha = {a}: the |x|^-(1+alpha) tail makes the moment infinite"
        elif a >= 2 and d > 2:
            reason = f"delta = {d} exceeds 2 at alpha = 2"
        else:
            reason = ""
        object.__setattr__(self, "admissible", not reason)
        object.__setattr__(self, "reason", reason)

    @classmethod
    def for_spec(cls, delta: float, spec: KernelSpec) -> "MomentQuery":
        return cls(delta, spec.alpha)


def _sine_ratio(delta: float, alpha: float) -> float:
    """``Gamma(-d/a) Gamma(1+d/a) / (Gamma(-d/2) Gamma(1+d/2)) = sin(pi d/2) / sin(pi d/a)``."""
    if alpha == 2.0:
        return 1.0
    if delta == 0.0:
        return alpha / 2.0
    den = math.sin(math.pi * delta / alpha)
    if abs(den) < 1e-300 or (abs(delta / alpha - round(delta / alpha)) < 1e-14):
        raise MomentPoleError(f"Gamma(-delta/alpha) is singular at delta/alpha = {delta / alpha:g}")
    return math.sin(math.pi * delta / 2.0) / den


def moment_formula(spec: KernelSpec, q: MomentQuery, t: float = 1.0, formal: bool = False) -> float:
    """Closed-form ``<|x(t)|^delta>`` over the whole line.

    The two gamma factors with negative arguments are paired with their
    reflections so only a ratio of sines remains, which is finite at
    ``delta = 0`` (the value there is exactly 1).  ``formal=True`` evaluates
    the Mellin expression outside the admissible window.
    """
    if q.alpha != spec.alpha:
        raise ValueError("query and spec disagree on alpha")
    if not (q.admissible or formal):
        raise InadmissibleMomentError(q.reason)
    if not t > 0:
        raise ValueError("t must be positive")
    a, b, d = spec.alpha, spec.beta, q.delta
    if not d > -1:
        raise MomentPoleError(f"Gamma(1 + delta) is singular at delta = {d}")
    ratio = _sine_ratio(d, a)
    scale = (spec.eta * t**b) ** (d / a)
    return 2.0 / a * scale * math.gamma(1.0 + d) * ratio * float(rgamma(1.0 + b * d / a).real)


# {{{ brute-force quadrature

_PANEL_NODES = 24
_GEOMETRIC_DECADES = 14
_PANELS_PER_DECADE = 3


def _panels(lo: float, hi: float, n: int, geometric: bool) -> tuple[np.ndarray, np.ndarray]:
    xg, wg = np.polynomial.legendre.leggauss(_PANEL_NODES)
    e = np.geomspace(lo, hi, n + 1) if geometric else np.linspace(lo, hi, n + 1)
    half = 0.5 * np.diff(e)
    mid = 0.5 * (e[1:] + e[:-1])
    return (mid[:, None] + half[:, None] * xg).ravel(), (half[:, None] * wg).ravel()


def _tail_series(spec: KernelSpec, delta: float, Y: float) -> tuple[float, float]:
    """``int_Y^inf y^delta Phi(y) dy`` from the large-argument residue series, term by term."""
    h = kernel_hparams(spec.alpha, spec.beta)
    total = 0.0
    last = math.inf
    for r in fox_h.residue_terms(h, "right", 60):
        if np.isneginf(r.log_coef.real):
            continue
        if not r.xi > delta:
            raise TailDivergenceError(
                f"tail term y^-(1+{r.xi:g}) times y^{delta:g} is not integrable (delta >= alpha)")
        c = float(np.exp(r.log_coef).real) / spec.alpha
        term = c * Y ** (delta - r.xi) / (r.xi - delta)
        if abs(term) > last:
            break
        total += term
        last = abs(term)
        if last < 1e-17 * abs(total):
            break
    return total, last


def moment_quadrature(spec: KernelSpec, q: MomentQuery, t: float = 1.0,
                      cfg: SolveConfig | None = None) -> float:
    """``int |x|^delta N(x, t) dx`` by panel quadrature of the contour-route kernel.

    The integrand is handled in the similarity variable ``y = |x| / c`` on
    geometric panels near the origin, uniform panels up to a cutoff ``Y``
    and the large-``y`` residue series integrated exactly beyond.
    """
    if q.alpha != spec.alpha:
        raise ValueError("query and spec disagree on alpha")
    d = q.delta
    if spec.alpha < 2 and d >= spec.alpha:
        raise TailDivergenceError(f"delta = {d} >= alpha = {spec.alpha}: the moment integral diverges")
    if not q.admissible:
        raise InadmissibleMomentError(q.reason)
    unit = KernelSpec(spec.alpha, spec.beta, 1.0)

    def phi(y: np.ndarray) -> np.ndarray:
        return evaluate(unit, y, 1.0, "contour").value

    Y = 16.0
    tail = 0.0
    if spec.alpha < 2:
        while True:
            tail, last = _tail_series(unit, d, Y)
            if last <= 1e-12 * max(abs(tail), 1e-300) or Y > 1e4:
                break
            Y *= 2.0
    else:
        # stretched-exponential tail: extend until it no longer contributes
        while Y < 256.0 and Y ** (d + 1.0) * abs(phi(np.array([Y]))[0]) > 1e-15:
            Y *= 1.5
    # the integrand is smooth and monotone in log y away from the origin
    decades = _GEOMETRIC_DECADES + math.log10(Y)
    y, w = _panels(10.0**-_GEOMETRIC_DECADES, Y, int(math.ceil(_PANELS_PER_DECADE * decades)), True)
    f = y**d * phi(y)
    body = float(w @ f)
    # the skipped sliver [0, 1e-14] is bounded by Phi(0) y^(1+delta)
    total = 2.0 * (body + tail)
    c = spec.scale(t)
    return c**d * total
