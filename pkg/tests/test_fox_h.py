import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special as sc

from fracdiff import fox_h
from fracdiff.fox_h import ContourSpec, HParams, HPoleError, NonConvergentIntegrandError
from fracdiff.special_fn import mittag_leffler


def test_exponential_family():
    h = fox_h.exp_hparams(0.5)
    z = np.array([0.1, 0.5, 3.0, 12.0])
    ref = z**0.5 * np.exp(-z)
    assert np.allclose(fox_h.eval_contour(h, z).value, ref, rtol=1e-10)
    small = fox_h.eval_series_small(h, z)
    assert np.all(small.converged)
    assert np.allclose(small.value, ref, rtol=1e-12)


def test_exponential_has_no_large_series():
    res = fox_h.eval_series_large(fox_h.exp_hparams(0.5), np.array([0.5, 3.0]))
    assert not np.any(res.converged)


@pytest.mark.parametrize("nu", [0.0, 0.3, 1.7])
def test_bessel_k(nu):
    z = np.array([0.05, 0.2, 2.0, 9.0])
    ref = 2 * sc.kv(nu, 2 * np.sqrt(z))
    assert np.allclose(fox_h.eval_contour(fox_h.bessel_k_hparams(nu), z).value, ref, rtol=1e-9)


@pytest.mark.parametrize("a, b", [(0.5, 1.0), (0.8, 1.0), (1.5, 0.7)])
def test_mittag_leffler_family(a, b):
    w = np.array([0.3, 1.0, 4.0])
    h = fox_h.ml_hparams(a, b)
    res = fox_h.eval_contour(h, w)
    assert np.allclose(res.value, mittag_leffler(-w, a, b).real, rtol=1e-9, atol=1e-13)


def test_explicit_contour_spec():
    h = fox_h.exp_hparams(1.0)
    res = fox_h.eval_contour(h, 2.0, ContourSpec(gamma=0.0, half_height=40.0, nodes=801))
    assert abs(res.value - 2.0 * math.exp(-2.0)) < 1e-10
    assert res.converged


def test_contour_outside_strip_rejected():
    with pytest.raises(ValueError):
        fox_h.eval_contour(fox_h.exp_hparams(1.0), 2.0, ContourSpec(gamma=-3.0, half_height=10.0, nodes=64))


def test_non_decaying_integrand():
    h = HParams(1, 0, ((0.0, 2.0),), ((0.0, 1.0),))
    assert h.decay_rate() < 0
    with pytest.raises(NonConvergentIntegrandError):
        fox_h.eval_contour(h, 1.0)


def test_theta_pole():
    h = fox_h.exp_hparams(0.0)
    with pytest.raises(HPoleError):
        fox_h.theta(h, -1.0)
    assert abs(fox_h.theta(h, 0.5) - math.gamma(0.5)) < 1e-14


@pytest.mark.parametrize("kwargs", [
    dict(m=0, n=0, upper=(), lower=((0, 1),)),
    dict(m=1, n=2, upper=((0, 1),), lower=((0, 1),)),
    dict(m=1, n=0, upper=(), lower=((0, -1),)),
])
def test_hparams_validation(kwargs):
    with pytest.raises(ValueError):
        HParams(**kwargs)


def test_overlapping_pole_families_rejected():
    # Gamma(xi) and Gamma(1 - 1 - xi) share every pole
    with pytest.raises(ValueError):
        HParams(1, 1, ((1.0, 1.0),), ((0.0, 1.0),))


def test_strip():
    left, right = fox_h.strip(fox_h.ml_hparams(0.5))
    assert left == 0.0 and right == 1.0


@given(st.floats(0.3, 3.0), st.floats(0.05, 6.0))
def test_scale_argument_round_trip(delta, x):
    h = fox_h.bessel_k_hparams(0.4)
    lhs = fox_h.eval_contour(fox_h.scale_argument(h, delta), x).value / delta
    rhs = fox_h.eval_contour(h, x**delta).value
    # deep in the exponential tail only absolute roundoff survives
    assert abs(lhs - rhs) <= 1e-8 * abs(rhs) + 1e-14


@given(st.floats(0.1, 8.0))
def test_cancellation_law(z):
    base = fox_h.exp_hparams(0.7)
    padded = HParams(2, 0, ((1.3, 0.6),), ((0.7, 1.0), (1.3, 0.6)))
    reduced = fox_h.cancel(padded)
    assert reduced == base
    assert abs(fox_h.eval_contour(padded, z).value - fox_h.eval_contour(base, z).value) <= 1e-9 * z**0.7 * math.exp(-z)


def test_residue_terms_order():
    terms = fox_h.residue_terms(fox_h.exp_hparams(0.0), "left", 6)
    assert [r.xi for r in terms] == [0.0, -1.0, -2.0, -3.0, -4.0, -5.0]
    coefs = [float(np.exp(r.log_coef).real) for r in terms]
    assert np.allclose(coefs, [(-1) ** k / math.factorial(k) for k in range(6)], rtol=1e-13)


def test_laplace_pair_family():
    # the integral must not depend on where the contour crosses the strip
    h = fox_h.laplace_pair_hparams(1.0, 0.5)
    z = np.array([0.5, 2.0])
    a = fox_h.eval_contour(h, z).value
    b = fox_h.eval_contour(h, z, ContourSpec(gamma=1.5, half_height=60.0, nodes=4001)).value
    assert np.allclose(a, b, rtol=1e-8, atol=1e-14)


def test_params_from_pairs():
    h = fox_h.params_from_pairs(1, 0, [], [[0.5, 1.0]])
    assert h == fox_h.exp_hparams(0.5)
