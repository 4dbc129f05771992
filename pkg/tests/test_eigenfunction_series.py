import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from ssmlevy import RegimeError
from ssmlevy.eigenfunction_series import (
    Eigenfunction,
    LogValue,
    c_theta,
    c_theta_product_from,
    coefficients,
    eigenfunction,
    eval_I,
    eval_I_derivative,
    eval_N,
    log_I,
    log_series,
)
from ssmlevy.levy_exponent import brownian_drift, pochhammer, stable
from ssmlevy.special_cases import bessel_C_theta, bessel_eigen_reference, bessel_N_reference, mittag_leffler


def test_log_series_geometric():
    # sum 2^-n = 2
    lv = log_series(lambda lo, hi: -np.arange(lo, hi) * math.log(2.0))
    assert lv == pytest.approx(math.log(2.0), rel=1e-15)


def test_log_series_exponential_large_argument():
    z = 800.0
    lv = log_series(lambda lo, hi: np.arange(lo, hi) * math.log(z) - special.gammaln(np.arange(lo, hi) + 1.0))
    assert lv == pytest.approx(z, rel=1e-14)


def test_coefficients_brownian():
    # psi(u) = u^2/2 at alpha = 2: a_n = 1 / prod 2 k^2 = 1 / (2^n n!^2)
    a = coefficients(brownian_drift(0.0), 2.0, 8)
    ref = [1.0 / (2.0 ** n * math.factorial(n) ** 2) for n in range(9)]
    assert np.allclose(a, ref, rtol=1e-14)


def test_I_at_zero_is_one():
    for e in (brownian_drift(0.3), stable(1.5), pochhammer(1.5, 1.0, 0.5)):
        assert eval_I(e, 1.3, 0.0) == 1.0


@pytest.mark.parametrize("g", [-0.5, 0.0, 0.5, 1.0, 2.5])
def test_bessel_identity(g):
    e = brownian_drift(g)
    for x in (1e-3, 0.5, 7.0, 50.0, 300.0):
        assert eval_I(e, 2.0, x) == pytest.approx(bessel_eigen_reference(g, x), rel=1e-12)


def test_large_argument_returns_log_value():
    e = brownian_drift(0.0)
    v = eval_I(e, 2.0, 1e6)
    assert isinstance(v, LogValue)
    # I_0(sqrt(2x)) ~ exp(sqrt(2x)) / sqrt(2 pi sqrt(2x))
    s = math.sqrt(2e6)
    assert v.log == pytest.approx(s - 0.5 * math.log(2 * math.pi * s), rel=1e-6)


def test_derivative_by_finite_difference():
    e = pochhammer(1.5, 1.0, 0.5)
    z, h = 2.0, 1e-5
    fd = (eval_I(e, 1.0, z + h) - eval_I(e, 1.0, z - h)) / (2 * h)
    assert eval_I_derivative(e, 1.0, z) == pytest.approx(fd, rel=1e-8)
    E = eigenfunction(e, 1.0)
    fd2 = (math.exp(E.log_dI(z + h)) - math.exp(E.log_dI(z - h))) / (2 * h)
    assert math.exp(E.log_dI(z, order=2)) == pytest.approx(fd2, rel=1e-7)


@given(z1=st.floats(0.0, 100.0), z2=st.floats(0.0, 100.0))
@settings(max_examples=100, deadline=None)
def test_I_increasing(z1, z2):
    e = stable(1.5, 1.0, 0.5)
    lo, hi = sorted((z1, z2))
    assert log_I(e, 1.0, lo) <= log_I(e, 1.0, hi) + 1e-15 * (1 + hi)


def test_regime_violation():
    # theta = 6 for psi = u^2/2 - 3u, above alpha = 2
    with pytest.raises(RegimeError):
        Eigenfunction(brownian_drift(-3.0), 2.0)
    with pytest.raises(RegimeError):
        eval_I(brownian_drift(0.0), 2.0, -1.0)


def test_cache_is_shared():
    e = brownian_drift(0.25)
    assert eigenfunction(e, 2.0) is eigenfunction(brownian_drift(0.25), 2.0)


@pytest.mark.parametrize("g", [-0.3, -0.5, -0.7])
def test_c_theta_bessel(g):
    e = brownian_drift(g)
    exact = bessel_C_theta(g)
    assert c_theta(e, 2.0, "product").C_theta == pytest.approx(exact, rel=1e-11)
    assert c_theta(e, 2.0, "ratio_estimate").C_theta == pytest.approx(exact, rel=1e-11)


def test_c_theta_pochhammer_closed_form():
    # the product and the ratio both give rho^(1/rho) / (rho - 1)
    for rho in (1.3, 1.5, 1.8):
        e = pochhammer(rho, 1.0, 0.0)
        ref = rho ** (1 / rho) / (rho - 1)
        assert c_theta(e, rho, "product").C_theta == pytest.approx(ref, rel=1e-10)
        assert c_theta(e, rho, "ratio_estimate").C_theta == pytest.approx(ref, rel=1e-8)


def test_c_theta_claimed_value_three():
    # claimed: C_1 = rho / (rho - 1) = 3 for rho = 1.5
    prof = c_theta(pochhammer(1.5, 1.0, 0.0), 1.5, "product")
    assert abs(prof.C_theta - 3.0) <= 1e-6


def test_c_theta_product_from_log_psi():
    # the low-level product on the Bessel exponent psi(u) = u^2/2 - u/4 (theta = 1/2)
    def log_psi(u):
        u = np.asarray(u, dtype=float)
        return np.log(u) + np.log(0.5 * u - 0.25)

    C, err = c_theta_product_from(log_psi, 2.0, 0.5, 1.0, 0.5)
    assert err < 1e-10
    assert C == pytest.approx(bessel_C_theta(-0.25), rel=1e-11)


def test_c_theta_needs_negative_mean():
    with pytest.raises(RegimeError):
        c_theta(stable(1.5, 1.0, 0.5), 1.0)


@pytest.mark.parametrize("g", [-0.3, -0.5, -0.7])
def test_N_macdonald(g):
    e = brownian_drift(g)
    xs = np.geomspace(0.1, 10.0, 15)
    for x, ref in zip(xs, bessel_N_reference(g, xs)):
        assert eval_N(e, 2.0, float(x)) == pytest.approx(ref, rel=1e-9)


def test_N_large_argument():
    g = -0.5
    e = brownian_drift(g)
    for x in (30.0, 200.0):
        assert eval_N(e, 2.0, x) == pytest.approx(bessel_N_reference(g, x), rel=1e-10)


def test_N_pochhammer_mittag_leffler():
    rho = 1.5
    e = pochhammer(rho, 1.0, 0.0)
    for x in (0.5, 1.0, 2.0):
        z = x ** rho
        ref = special.gamma(rho - 1) * (mittag_leffler(rho, rho - 1, z) - x * mittag_leffler(rho, rho, z))
        assert eval_N(e, rho, z / rho) == pytest.approx(ref, rel=1e-9)


def test_N_decreasing_and_bounded():
    e = pochhammer(1.5, 1.0, 0.0)
    vals = [eval_N(e, 1.5, q) for q in (0.0, 0.1, 1.0, 5.0, 20.0)]
    assert vals[0] == pytest.approx(1.0)
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] > 0
