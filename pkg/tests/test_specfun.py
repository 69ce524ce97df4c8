import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from mmwave_asep import specfun
from mmwave_asep.errors import NumericFailure, ParameterError


@pytest.mark.parametrize("a,b,z", [
    (-1 / 2.1, 1 - 1 / 2.1, -0.3), (-0.25, 0.75, -50.0), (-0.25, 0.75, -1e6),
    (-1 / 2.1, 1 - 1 / 2.1, -12.0), (0.5, 1.5, 20.0), (1.3, 2.7, -5.0), (-0.4, 0.6, -1e4),
])
def test_hyp1f1_against_mpmath(a, b, z):
    assert specfun.hyp1f1(a, b, z) == pytest.approx(float(mp.hyp1f1(a, b, z)), rel=1e-10)


@pytest.mark.parametrize("alpha", [2.1, 4.0])
@pytest.mark.parametrize("z", [-1e-3, -0.5, -3.0, -40.0, -900.0, -1e4, -1e8])
def test_hyp2f2_against_mpmath(alpha, z):
    args = (0.5, -1 / alpha, 0.5, 1 - 1 / alpha)
    assert specfun.hyp2f2(*args, z) == pytest.approx(float(mp.hyp2f2(*args, z)), rel=1e-10)
    # non-reducible parameter set with the same denominators
    args = (-0.5, -1 / alpha, 0.5, 1 - 1 / alpha)
    assert specfun.hyp2f2(*args, z) == pytest.approx(float(mp.hyp2f2(*args, z)), rel=1e-10)


@pytest.mark.parametrize("z", [-0.1, -4.0, -60.0, -400.0])
def test_hyp1f2_against_mpmath(z):
    a, b1, b2 = -1 / 2.1, 0.5, 1 - 1 / 2.1
    assert specfun.hyp1f2(a, b1, b2, z) == pytest.approx(float(mp.hyp1f2(a, b1, b2, z)), rel=1e-10)


@settings(max_examples=60, deadline=None)
@given(alpha=st.floats(1.2, 6.0), logz=st.floats(-4, 8))
def test_cancelled_parameters_equal_gamma_form(alpha, logz):
    z = 10.0 ** logz
    lhs = specfun.hyp2f2(0.5, -1 / alpha, 0.5, 1 - 1 / alpha, -z)
    rhs = 1.0 + float(specfun.hyp1f1_power_tail(alpha, z))
    assert lhs == pytest.approx(rhs, rel=1e-9)


def test_series_cancellation_is_detected_and_resolved():
    # e^-40 from its Taylor series loses ~34 digits in double precision
    assert specfun.hyp_series((), (), -40.0) == pytest.approx(math.exp(-40.0), rel=1e-12)


def test_series_rejects_bad_denominator():
    with pytest.raises(ParameterError):
        specfun.hyp_series((1.0,), (-2.0,), 0.5)


def test_erf_reference_value():
    # main-lobe hit probability for a 15 degree beam and 5 degree error std
    x = math.radians(7.5) / (math.sqrt(2.0) * math.radians(5.0))
    assert specfun.erf(x) == pytest.approx(0.86639, abs=5e-6)


@pytest.mark.parametrize("degree", range(0, 24))
def test_gauss_kronrod_exact_for_polynomials(degree):
    k, _ = specfun.gauss_kronrod(lambda x: x ** degree, np.array([-1.0]), np.array([1.0]))
    exact = 0.0 if degree % 2 else 2.0 / (degree + 1)
    assert k[0] == pytest.approx(exact, abs=1e-14)


def test_integrate_finite_with_kink():
    value = specfun.integrate_finite(lambda x: np.abs(x - 0.3), 0.0, 1.0, points=(0.3,))
    assert value == pytest.approx(0.5 * (0.09 + 0.49), rel=1e-12)


def test_integrate_semi_infinite_gaussian_and_power():
    g = specfun.integrate_semi_infinite(lambda x: np.exp(-x * x), 0.0)
    assert g == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-9)
    p = specfun.integrate_semi_infinite(lambda x: x ** -3.2, 1.0, growth=2.0)
    assert p == pytest.approx(1 / 2.2, rel=1e-7)


def test_integrate_semi_infinite_reports_nondecay():
    cfg = specfun.QuadratureConfig()
    with pytest.raises(NumericFailure):
        specfun.integrate_semi_infinite(lambda x: np.ones_like(x), 0.0, cfg, max_panels=200)


@pytest.mark.parametrize("a", [0.05, 0.7, 2.5])
def test_gil_pelaez_gaussian_cdf(a):
    # CF of N(0, 1/2) is exp(-w^2/4); F(-a) = 1/2 - (1/pi) int sin(aw)/w Phi(w) dw
    f = lambda w: np.sin(a * w) / w * np.exp(-w * w / 4)
    value = 0.5 - specfun.integrate_semi_infinite(f, 0.0, panel=math.pi / a) / math.pi
    assert value == pytest.approx(stats.norm.sf(a * math.sqrt(2)), abs=1e-7)


@pytest.mark.parametrize("alpha", [2.1, 4.0])
@pytest.mark.parametrize("z", [-1e-20, -1e-8, -0.3, -1.0, -2.0, -500.0])
def test_hyp2f2_minus_one_keeps_relative_accuracy(alpha, z):
    mp.mp.dps = 40
    args = (0.5, -1 / alpha, 0.5, 1 - 1 / alpha)
    ref = mp.hyp2f2(*args, z) - 1
    mp.mp.dps = 15
    assert specfun.hyp2f2_minus_one(*args, z) == pytest.approx(float(ref), rel=1e-13)
