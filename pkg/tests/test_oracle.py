import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special as sc

from fracdiff import oracle
from fracdiff.kernels import KernelSpec
from fracdiff.oracle import (AliasingWarning, HistoryMismatchError, OscillationError, TimeStepPlan,
                             caputo_l1_step, l1_scalar, riemann_liouville_integral, run_l1, stable_density,
                             stable_tail_mass, talbot_invert, weyl_apply)
from fracdiff.solver import DomainError, SampledField, solve
from fracdiff.special_fn import mittag_leffler

X = np.linspace(-20, 20, 400, endpoint=False)
GAUSS = SampledField.on_grid(X, np.exp(-X**2))


# {{{ Weyl operator

def test_weyl_order_two_is_second_derivative():
    out = weyl_apply(2.0, GAUSS)
    assert np.max(np.abs(out.values - (4 * X**2 - 2) * np.exp(-X**2))) < 1e-11


def test_weyl_order_one_against_dawson():
    # -|k| = (d/dx) of the Hilbert transform, which maps exp(-x^2) to (2/sqrt(pi)) D(x)
    out = weyl_apply(1.0, GAUSS)
    ref = -(2 / math.sqrt(math.pi)) * (1 - 2 * X * sc.dawsn(X))
    # the periodic image of the slowly decaying Hilbert transform is the only error
    assert np.max(np.abs(out.values - ref)) < 5e-3
    padded = weyl_apply(1.0, GAUSS, pad=8)
    assert np.max(np.abs(padded.values - ref)) < 5e-4


@given(st.floats(0.3, 2.0), st.floats(0.3, 2.0))
def test_weyl_composes(mu, nu):
    a = weyl_apply(mu + nu, GAUSS)
    b = weyl_apply(mu, weyl_apply(nu, GAUSS), floor=1.0)
    assert np.max(np.abs(a.values + b.values)) < 1e-9 * np.max(np.abs(a.values))


def test_weyl_aliasing_warning():
    x = np.linspace(-3, 3, 40, endpoint=False)
    rough = SampledField.on_grid(x, np.exp(-(x / 0.15) ** 2))
    with pytest.warns(AliasingWarning):
        weyl_apply(1.5, rough)


def test_weyl_boundary_floor():
    with pytest.raises(DomainError):
        weyl_apply(1.0, SampledField.on_grid(X, np.ones(X.size)))

# }}}


# {{{ L1 stepping

def test_plan_times():
    p = TimeStepPlan.uniform(2.0, 8)
    assert np.allclose(p.times(), np.linspace(0, 2, 9))
    g = TimeStepPlan.graded(1.0, 10, 0.5)
    assert g.grading == 3.0 and g.times()[-1] == pytest.approx(1.0)
    assert TimeStepPlan.graded(1.0, 10, 1.0).grading == 1.0
    with pytest.raises(ValueError):
        TimeStepPlan(0.1, 10, grading=0.5)


def test_history_is_enforced():
    spec = KernelSpec(2.0, 0.7)
    plan = TimeStepPlan.uniform(1.0, 3)
    u1 = caputo_l1_step(spec, plan, GAUSS)
    with pytest.raises(HistoryMismatchError):
        caputo_l1_step(spec, plan, GAUSS)
    u2 = caputo_l1_step(spec, plan, u1)
    caputo_l1_step(spec, plan, u2)
    assert plan.done and plan.completed == 3
    with pytest.raises(HistoryMismatchError):
        caputo_l1_step(spec, plan, plan.current())


def test_l1_rejects_wave_regime():
    with pytest.raises(ValueError):
        caputo_l1_step(KernelSpec(2.0, 1.5), TimeStepPlan.uniform(1.0, 4), GAUSS)


def test_l1_scalar_backward_euler():
    assert l1_scalar(1.0, 1.0, 1.0, 10) == pytest.approx((1 / 1.1) ** 10, rel=1e-14)


@pytest.mark.parametrize("beta", [0.4, 0.7, 0.9])
def test_l1_scalar_order_on_graded_mesh(beta):
    ref = mittag_leffler(-2.0, beta).real
    grading = (2 - beta) / beta
    errs = [abs(l1_scalar(2.0, beta, 1.0, n, grading) - ref) for n in (64, 128, 256)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert min(orders) > 2 - beta - 0.15


def test_l1_against_heat_equation():
    spec = KernelSpec(2.0, 1.0)
    errs = []
    for n in (50, 100):
        u, plan = run_l1(spec, GAUSS, 0.5, n)
        errs.append(np.max(np.abs(u.values - solve(spec, GAUSS, None, None, 0.5).values)))
        assert plan.done
    assert errs[1] < 2e-3 and 1.8 < errs[0] / errs[1] < 2.2

# }}}


# {{{ Talbot

@pytest.mark.parametrize("a, t", [(1.0, 0.5), (3.0, 2.0), (0.2, 7.0)])
def test_talbot_exponential(a, t):
    assert talbot_invert(lambda s: 1 / (s + a), t) == pytest.approx(math.exp(-a * t), abs=1e-10)


@given(st.floats(0.1, 3.0), st.floats(0.2, 5.0))
def test_talbot_power(nu, t):
    val = talbot_invert(lambda s: s ** (-nu - 1), t)
    assert val == pytest.approx(t**nu / math.gamma(nu + 1), rel=1e-8)


@given(st.floats(0.3, 1.0), st.floats(0.1, 5.0), st.floats(0.2, 3.0))
def test_talbot_mittag_leffler_round_trip(beta, a, t):
    val = talbot_invert(lambda s: s ** (beta - 1) / (s**beta + a), t)
    assert abs(val - mittag_leffler(-a * t**beta, beta).real) < 1e-8


def test_talbot_rejects_discontinuous_target():
    with pytest.raises(OscillationError):
        talbot_invert(lambda s: np.exp(-s) / s, 1.0)


def test_talbot_argument_checks():
    with pytest.raises(ValueError):
        talbot_invert(lambda s: 1 / s, -1.0)
    with pytest.raises(ValueError):
        talbot_invert(lambda s: 1 / s, 1.0, nodes=4)

# }}}


# {{{ stable densities

def test_stable_closed_forms():
    x = np.linspace(-12, 12, 97)
    assert np.max(np.abs(stable_density(1.0, 2.0, x) - (2 / math.pi) / (4 + x**2))) < 1e-12
    assert np.max(np.abs(stable_density(2.0, 0.5, x) - np.exp(-x**2 / 2) / math.sqrt(2 * math.pi))) < 1e-13


@pytest.mark.parametrize("alpha", [0.6, 1.1, 1.5, 1.9])
def test_stable_normalization(alpha):
    X0 = 30.0
    body, _ = integrate.quad(lambda x: stable_density(alpha, 1.0, x), 0, X0, limit=400, points=[1.0])
    assert 2 * (body + stable_tail_mass(alpha, 1.0, X0)) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("alpha", [0.7, 1.3, 1.8])
def test_stable_both_sides_of_switch(alpha):
    # quadrature below y = 40, tail series above; both against the Mellin-Barnes kernel
    from fracdiff.kernels import fundamental_solution
    y = np.array([39.9, 40.1])
    ref = fundamental_solution(KernelSpec(alpha, 1.0), y, 1.0, "contour")
    assert np.allclose(stable_density(alpha, 1.0, y), ref, rtol=1e-9)

# }}}


def test_riemann_liouville_powers():
    for nu in (0.3, 0.5, 1.7):
        assert riemann_liouville_integral(lambda s: 1.0, 2.0, nu) == pytest.approx(2.0**nu / math.gamma(nu + 1), rel=1e-12)
        assert riemann_liouville_integral(lambda s: s, 2.0, nu) == pytest.approx(2.0 ** (nu + 1) / math.gamma(nu + 2), rel=1e-12)
    with pytest.raises(ValueError):
        riemann_liouville_integral(lambda s: 1.0, 1.0, 0.0)
