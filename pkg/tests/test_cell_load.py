import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, optimize, stats
from scipy.spatial import Voronoi

from relay_ee.cell_load import (TailMassError, busy_probabilities, cell_area_pdf, count_distribution_disc,
                                count_distribution_voronoi)
from relay_ee.params import reference_params

LB = 1e-5


def test_area_pdf_normalised_and_mean():
    f = cell_area_pdf(LB)
    # integrate in units of the mean area, x = S lambda_b
    total, _ = integrate.quad(lambda x: f(x / LB) / LB, 0, 50, epsabs=1e-13, limit=200)
    assert total == pytest.approx(1.0, abs=1e-8)
    mean, _ = integrate.quad(lambda x: x * f(x / LB) / LB ** 2, 0, 80, epsabs=1e-13, limit=200)
    assert mean == pytest.approx(1 / LB, rel=1e-6)
    assert f.mean == pytest.approx(1e5, rel=1e-15)


def test_area_pdf_mode_and_sign():
    f = cell_area_pdf(LB)
    grid = np.linspace(0, 5 / LB, 200_001)
    assert grid[np.argmax(f(grid))] == pytest.approx(f.mode, rel=1e-4)
    best = optimize.minimize_scalar(lambda s: -f(s), bounds=(0.1 / LB, 2 / LB), method="bounded",
                                    options={"xatol": 1e-6 / LB})
    assert best.x == pytest.approx((5 / 7) / LB, rel=1e-5)
    assert np.all(f(np.linspace(-1e5, 1e6, 1000)) >= 0)
    with pytest.raises(ValueError):
        cell_area_pdf(0.0)


def test_area_pdf_is_gamma():
    f = cell_area_pdf(LB)
    s = np.linspace(1, 6e5, 50)
    assert np.allclose(f(s), stats.gamma(3.5, scale=1 / (3.5 * LB)).pdf(s), rtol=1e-12)


def test_voronoi_count_examples():
    d = count_distribution_voronoi(0.0, LB)
    assert d.pmf[0] == 1.0 and d.mean == 0
    d = count_distribution_voronoi(LB, LB)
    assert d.pmf[0] == pytest.approx((1 + 2 / 7) ** -3.5, rel=1e-12)
    assert d.pmf[0] == pytest.approx(0.4149, abs=1e-4)
    assert d.pmf[1] == pytest.approx((7 / 9) ** 4.5, rel=1e-12)
    assert d.pmf[1] == pytest.approx(0.3228, abs=1e-4)


def test_voronoi_count_is_negative_binomial():
    c = 9.0
    d = count_distribution_voronoi(c * LB, LB)
    ref = stats.nbinom(3.5, 3.5 / (3.5 + c)).pmf(np.arange(len(d.pmf)))
    assert np.allclose(d.pmf, ref, rtol=1e-10, atol=1e-300)


@given(st.floats(0.0, 1e-1), st.floats(1e-7, 1e-3))
@settings(max_examples=50, deadline=None)
def test_count_invariants(lam, lb):
    d = count_distribution_voronoi(lam, lb)
    assert np.all(d.pmf >= 0)
    # cumulative rounding grows with the number of terms
    assert np.all(np.cumsum(d.pmf) <= 1 + 1e-12 + 1e-15 * len(d.pmf))
    assert d.tail_bound < 1e-10
    assert d.mean == pytest.approx(lam / lb, rel=1e-15)
    i = np.arange(len(d.pmf))
    assert abs(np.sum(i * d.pmf) - lam / lb) <= 1e-9 * max(1.0, lam / lb)


def test_explicit_i_max_tail_error():
    with pytest.raises(TailMassError):
        count_distribution_voronoi(10 * LB, LB, i_max=5)
    d = count_distribution_voronoi(LB, LB, i_max=80)
    assert d.i_max == 80


def test_disc_examples():
    assert count_distribution_disc(0.0, 20).pmf[0] == 1.0
    d = count_distribution_disc(1 / (math.pi * 400), 20)
    assert d.pmf[1] == pytest.approx(math.exp(-1), rel=1e-12)
    assert count_distribution_disc(8e-4, 20).mean == pytest.approx(1.005, abs=1e-3)
    with pytest.raises(TailMassError):
        count_distribution_disc(1e-2, 20, i_max=3)


@given(st.floats(0.0, 30.0), st.floats(0.0, 40.0))
@settings(max_examples=80, deadline=None)
def test_expected_min_two_ways(c, cap):
    d = count_distribution_voronoi(c * LB, LB)
    assert d.expected_min(cap, "series") == pytest.approx(d.expected_min(cap, "survival"), abs=1e-10)


def test_busy_examples():
    p = reference_params(lambda_nc=0.0)
    b = busy_probabilities(p)
    assert b.p_b1 == 0 and b.lambda_b1 == 0
    p = reference_params(lambda_nc=2e-5, m_b1=1, m_b2=284, m_r=15)
    b = busy_probabilities(p)
    u = count_distribution_voronoi(2e-5, 1e-5)
    assert b.p_b1 == pytest.approx(1 - u.pmf[0], abs=1e-12)
    b = busy_probabilities(reference_params(lambda_c=1.0))
    assert b.p_r == pytest.approx(1.0, abs=1e-12)


def test_busy_reference_values():
    b = busy_probabilities(reference_params(rho=1))
    assert 0 <= b.p_b1 <= 1 and 0 <= b.p_b2 <= 1 and 0 <= b.p_r <= 1
    assert b.lambda_r == pytest.approx(9e-5 * b.p_r)
    assert b.lambda_b2 <= 1e-5 and b.lambda_r <= 9e-5


@pytest.mark.parametrize("field,grid", [("lambda_nc", np.logspace(-7, -1, 25)),
                                        ("lambda_c", np.logspace(-6, 0, 25)),
                                        ("lambda_r", np.logspace(-7, -3, 25))])
def test_busy_monotone(field, grid):
    key = {"lambda_nc": "p_b1", "lambda_c": "p_r", "lambda_r": "p_b2"}[field]
    vals = [getattr(busy_probabilities(reference_params(**{field: float(v)})), key) for v in grid]
    assert np.all(np.diff(vals) >= -1e-12)


def test_non_integer_rho_caps_with_real_value():
    from fractions import Fraction
    p = reference_params(rho=Fraction(1, 3))
    u_r = count_distribution_voronoi(p.lambda_r, p.lambda_b)
    expect = float(np.sum(np.minimum(np.arange(len(u_r.pmf)), 1 / 3) * u_r.pmf)) * 3
    assert busy_probabilities(p).p_b2 == pytest.approx(expect, rel=1e-12)


@pytest.fixture(scope="module")
def voronoi_areas():
    """Areas of ~1e5 interior cells of a unit-density Poisson-Voronoi tessellation."""
    rng = np.random.default_rng(11)
    side = 340.0
    pts = rng.random((rng.poisson(side * side), 2)) * side
    vor = Voronoi(pts)
    areas = []
    for region_index in vor.point_region:
        reg = vor.regions[region_index]
        if not reg or -1 in reg:
            continue
        v = vor.vertices[reg]
        if v.min() < 5 or v.max() > side - 5:
            continue
        x, y = v[:, 0], v[:, 1]
        areas.append(0.5 * abs(np.dot(x, np.roll(y, 1)) - np.dot(y, np.roll(x, 1))))
    return np.array(areas), rng


@pytest.mark.parametrize("c", [0.5, 1.0, 9.0, 100.0])
def test_counts_against_voronoi_tessellation(voronoi_areas, c):
    areas, rng = voronoi_areas
    assert len(areas) >= 1e5
    u = rng.poisson(c * areas)
    d = count_distribution_voronoi(c, 1.0)
    m = max(u.max() + 1, len(d.pmf))
    emp = np.cumsum(np.bincount(u, minlength=m)) / len(u)
    ana = np.cumsum(np.concatenate((d.pmf, np.zeros(m - len(d.pmf)))))
    assert np.max(np.abs(emp - ana)) < 0.01
