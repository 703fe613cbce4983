import math

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from relay_ee.special import (complete_gamma, gamma_expectation, gauss_tail, half_gaussian_integral,
                              scaled_gauss_tail, upper_gamma)


@pytest.mark.parametrize("s", [-0.5, -2 / 3, -0.4, -1.5, 0.0, 0.7, 2.0])
@pytest.mark.parametrize("x", [1e-3, 0.1, 1.0, 5.0, 30.0])
def test_upper_gamma_against_mpmath(s, x):
    ref = float(mpmath.gammainc(s, x))
    assert float(upper_gamma(s, x)) == pytest.approx(ref, rel=1e-10)


def test_upper_gamma_recurrence():
    s, x = -0.5, 0.8
    lhs = float(upper_gamma(s + 1, x))
    rhs = s * float(upper_gamma(s, x)) + x ** s * math.exp(-x)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_complete_gamma_negative():
    assert complete_gamma(-0.5) == pytest.approx(-2 * math.sqrt(math.pi))
    with pytest.raises(ValueError):
        complete_gamma(-1.0)


def test_gauss_tail():
    assert float(gauss_tail(0.0)) == 0.5
    assert float(scaled_gauss_tail(40.0)) == pytest.approx(1 / (40 * math.sqrt(2 * math.pi)), rel=1e-3)


@given(st.floats(1e-6, 1e3), st.floats(0.0, 1e3), st.floats(0.01, 100))
@settings(max_examples=60, deadline=None)
def test_half_gaussian_integral(a, b, upper):
    ref = float(mpmath.quad(lambda v: mpmath.exp(-a * v * v - b * v), [0, upper]))
    assert half_gaussian_integral(a, b, upper) == pytest.approx(ref, rel=1e-8, abs=1e-300)


@given(st.floats(-5, 50), st.floats(0, 20))
@settings(max_examples=80, deadline=None)
def test_scaled_gauss_diff(x0, width):
    from relay_ee.special import scaled_gauss_diff
    with mpmath.workdps(40):
        x0m = mpmath.mpf(x0)
        d = mpmath.mpf(width)
        ref = mpmath.quad(lambda u: mpmath.exp(-u * (2 * x0m + u) / 2), [0, d]) / mpmath.sqrt(2 * mpmath.pi)
    assert scaled_gauss_diff(x0, width) == pytest.approx(float(ref), rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("delta", [0.5, 2 / 3, 0.4])
@pytest.mark.parametrize("x", [1e-3, 0.3, 1.0, 12.0])
@pytest.mark.parametrize("mu", [1.0, 2.5])
def test_gamma_expectation_closed_vs_quadrature(delta, x, mu):
    closed = gamma_expectation(x, delta, "exponential", mu, method="closed")
    quad = gamma_expectation(x, delta, "exponential", mu, method="quadrature")
    assert closed == pytest.approx(quad, rel=1e-9)


def test_gamma_expectation_deterministic():
    d = 0.5
    assert gamma_expectation(2.0, d, "deterministic", 1.0) == pytest.approx(
        float(mpmath.gammainc(-d, 2.0)) - float(mpmath.gamma(-d)), rel=1e-12)
