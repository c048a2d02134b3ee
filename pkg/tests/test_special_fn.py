import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import assume, given, strategies as st
from scipy import special as sc

from fracdiff.special_fn import GammaPoleError, MLParams, gamma, log_gamma, mittag_leffler, ml_series, rgamma


def ml_mpmath(z, a, b, dps=60):
    """Taylor series in extended precision: immune to the cancellation that limits doubles."""
    with mp.workdps(dps):
        return complex(mp.nsum(lambda k: mp.mpmathify(z) ** k / mp.gamma(a * k + b), [0, mp.inf]))


# {{{ gamma

FROZEN_LOGGAMMA = [
    (0.3 + 2j, -2.3594493559375710212 - 0.91690761351866975555j),
    (-7.5 + 0.1j, -8.45247022051203618 - 24.924729552995606139j),
    (20 - 30j, 21.345074493863444896 - 96.714347689536180139j),
]


@pytest.mark.parametrize("z, expected", FROZEN_LOGGAMMA)
def test_log_gamma_frozen(z, expected):
    assert abs(log_gamma(z) - expected) < 1e-13 * max(1.0, abs(expected))


complex_points = st.builds(complex, st.floats(-30, 60), st.floats(-60, 60))


@given(complex_points)
def test_log_gamma_matches_scipy(z):
    assume(min(abs(z - round(z.real)), abs(z)) > 1e-3 or z.real > 0.5)
    ref = sc.loggamma(z)
    assert abs(log_gamma(z) - ref) <= 1e-12 * max(1.0, abs(ref))


@given(st.floats(-8.9, 8.9), st.floats(-3, 3))
def test_reflection(x, y):
    z = complex(x, y)
    assume(abs(math.sin(math.pi * x)) > 1e-2 or abs(y) > 1e-2)
    lhs = gamma(z) * gamma(1 - z)
    rhs = np.pi / np.sin(np.pi * z)
    assert abs(lhs - rhs) <= 1e-11 * abs(rhs)


@given(st.floats(0.05, 40), st.floats(-20, 20))
def test_recurrence(x, y):
    z = complex(x, y)
    lhs = log_gamma(z + 1)
    rhs = log_gamma(z) + np.log(z)
    # equal modulo 2 pi i on the principal branch
    d = lhs - rhs
    assert abs(d.real) < 1e-11 * max(1.0, abs(lhs))
    assert abs(d.imag / (2 * np.pi) - round(d.imag / (2 * np.pi))) < 1e-11 * max(1.0, abs(lhs))


@pytest.mark.parametrize("n", [0, -1, -7, -30])
def test_poles(n):
    with pytest.raises(GammaPoleError):
        log_gamma(n)
    assert rgamma(n) == 0


def test_rgamma_vectorized_against_scipy():
    x = np.linspace(-6.5, 12.5, 97)
    assert np.allclose(rgamma(x).real, sc.rgamma(x), rtol=1e-13, atol=1e-15)


def test_gamma_integers():
    for n in range(1, 20):
        assert abs(gamma(n).real - math.factorial(n - 1)) <= 1e-13 * math.factorial(n - 1)

# }}}


# {{{ Mittag-Leffler

FROZEN_ML = [
    (-2.0, 1.5, 1.0, 0.029430685602826471728),
    (-10.0, 0.8, 1.0, 0.024902819761976532186),
    (-5.0, 0.5, 0.5, 0.010666394882413155097),
    (3.0, 0.7, 1.2, 127.16015193906930384),
    (-25.0, 1.9, 1.0, 0.43534902705681804333),
]


@pytest.mark.parametrize("z, a, b, expected", FROZEN_ML)
def test_ml_frozen(z, a, b, expected):
    assert abs(mittag_leffler(z, a, b) - expected) <= 1e-12 * max(1.0, abs(expected))


@given(st.floats(0.3, 2.0), st.floats(0.3, 2.0), st.floats(-15.0, 3.0))
def test_ml_against_mpmath(a, b, z):
    ref = ml_mpmath(z, a, b)
    assert abs(mittag_leffler(z, a, b) - ref) <= 1e-10 * max(1.0, abs(ref))


def test_ml_complex_argument():
    z = 1.5 - 2.0j
    assert abs(mittag_leffler(z, 0.9, 1.1) - ml_mpmath(z, 0.9, 1.1)) < 1e-12


def test_ml_elementary_cases():
    z = np.linspace(-40, 5, 181)
    assert np.allclose(mittag_leffler(z, 1.0).real, np.exp(z), rtol=1e-12, atol=1e-300)
    x = np.linspace(0, 7, 71)
    assert np.allclose(mittag_leffler(-x * x, 2.0).real, np.cos(x), atol=1e-12)
    xx = x[1:]
    assert np.allclose(mittag_leffler(-xx * xx, 2.0, 2.0).real, np.sin(xx) / xx, atol=1e-12)
    assert np.allclose(mittag_leffler(z, 0.5).real, sc.erfcx(-z), rtol=1e-12)
    zz = z[z != 0]
    assert np.allclose(mittag_leffler(zz, 1.0, 2.0).real, np.expm1(zz) / zz, rtol=1e-12)


@given(st.floats(0.2, 2.0), st.floats(0.1, 2.5), st.floats(-20.0, 4.0))
def test_ml_index_shift(a, b, z):
    lhs = mittag_leffler(z, a, b)
    tail = z * mittag_leffler(z, a, a + b)
    assert abs(lhs - (rgamma(b) + tail)) <= 1e-10 * max(abs(lhs), abs(tail), 1.0)


@given(st.floats(0.1, 1.0), st.floats(0.0, 30.0), st.floats(0.01, 5.0))
def test_ml_completely_monotone_decay(a, x, dx):
    # E_a(-x) is positive and decreasing for 0 < a <= 1
    u, v = mittag_leffler(-x, a).real, mittag_leffler(-(x + dx), a).real
    assert v > 0
    assert v <= u + 1e-15


def test_ml_series_agrees_inside_unit_disc():
    z = np.linspace(-0.9, 0.9, 19)
    assert np.allclose(ml_series(z, 0.6, 1.3), mittag_leffler(z, 0.6, 1.3), rtol=1e-14, atol=1e-15)


def test_mlparams():
    p = MLParams(0.5)
    assert abs(p(-1.0) - sc.erfcx(1.0)) < 1e-12
    with pytest.raises(ValueError):
        MLParams(0.0)
    with pytest.raises(ValueError):
        MLParams(1.0, math.inf)


def test_ml_shape_preserved():
    z = np.zeros((3, 4))
    assert mittag_leffler(z, 0.7).shape == (3, 4)
    assert np.isscalar(mittag_leffler(0.0, 0.7)) or np.ndim(mittag_leffler(0.0, 0.7)) == 0

# }}}
