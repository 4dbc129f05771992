import math

import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from ssmlevy import RegimeError
from ssmlevy.eigenfunction_series import c_theta, eval_N
from ssmlevy.levy_exponent import brownian_drift, pochhammer, stable
from ssmlevy.special_cases import hartman_bessel_reference
from ssmlevy.transforms import (
    entrance_law_laplace,
    expfun_laplace,
    fpt_joint_laplace,
    fpt_up_laplace,
    hartman_ratio,
    id_laplace,
    levy_fpt_functional_laplace,
    selfdecomp_laplace,
    wolfe_levy_exponent,
)


def test_fpt_bessel_value():
    # I_0 ratio for psi = u^2/2, alpha = 2: I_0(sqrt 2) / I_0(sqrt 8)
    v = fpt_up_laplace(brownian_drift(0.0), 2.0, 1.0, 1.0, 2.0)
    ref = special.iv(0, math.sqrt(2.0)) / special.iv(0, math.sqrt(8.0))
    assert v == pytest.approx(ref, rel=1e-13)
    assert v == pytest.approx(0.368286384198739, rel=1e-12)


def test_fpt_trivial_cases():
    e = stable(1.5, 1.0, 0.5)
    assert fpt_up_laplace(e, 1.0, 0.0, 0.5, 2.0) == 1.0
    assert fpt_up_laplace(e, 1.0, 3.0, 2.0, 2.0) == 1.0
    with pytest.raises(RegimeError):
        fpt_up_laplace(e, 1.0, 1.0, 3.0, 2.0)


@given(q=st.floats(0.01, 5.0), c=st.floats(0.2, 5.0))
@settings(max_examples=50, deadline=None)
def test_fpt_self_similarity(q, c):
    e = pochhammer(1.5, 1.0, 0.5)
    alpha, x, a = 1.0, 0.5, 1.5
    lhs = fpt_up_laplace(e, alpha, q, c * x, c * a)
    rhs = fpt_up_laplace(e, alpha, q * c ** alpha, x, a)
    assert lhs == pytest.approx(rhs, rel=1e-12)


def test_joint_reduces_to_fpt_at_lam_zero():
    e = brownian_drift(0.5)
    assert fpt_joint_laplace(e, 2.0, 1.3, 0.0, 0.7, 1.9) == pytest.approx(fpt_up_laplace(e, 2.0, 1.3, 0.7, 1.9),
                                                                          rel=1e-13)


def test_joint_matches_levy_functional():
    e = stable(1.5, 1.0, 0.5)
    x, a, q, lam = 0.5, 2.0, 0.7, 0.4
    v1 = fpt_joint_laplace(e, 1.0, q, lam, x, a)
    v2 = levy_fpt_functional_laplace(e, 1.0, q, lam, math.log(x), math.log(a))
    assert v1 == pytest.approx(v2, rel=1e-13)


def test_joint_at_zero_start():
    assert fpt_joint_laplace(brownian_drift(0.0), 2.0, 1.0, 0.5, 0.0, 1.0) == 0.0


def test_levy_functional_q_zero():
    # q = 0: E[exp(-lam tau_a)] = exp(-phi(lam) (a - x))
    e = pochhammer(1.5, 1.0, 0.5)
    lam = 0.8
    v = levy_fpt_functional_laplace(e, 1.0, 0.0, lam, -1.0, 0.5)
    assert v == pytest.approx(math.exp(-e.phi(lam) * 1.5), rel=1e-13)


def test_expfun_equals_N():
    e = brownian_drift(-0.5)
    assert expfun_laplace(e, 2.0, 1.0) == eval_N(e, 2.0, 1.0)
    # psi = u^2/2 - u/2, alpha = 2: the K_{1/2} form collapses to exp(-sqrt(2q))
    assert expfun_laplace(e, 2.0, 0.5) == pytest.approx(math.exp(-1.0), rel=1e-12)


def test_entrance_law_normalisations():
    e = brownian_drift(-0.5)
    prof = c_theta(e, 2.0, "best")
    n = eval_N(e, 2.0, 2.0)
    assert entrance_law_laplace(e, 2.0, 2.0, 1.0, "dual") == pytest.approx(n / 0.5)
    assert entrance_law_laplace(e, 2.0, 2.0, 1.0, "dual_theta") == pytest.approx(n / (e.dpsi(1.0) * prof.C_theta))
    with pytest.raises(RegimeError):
        entrance_law_laplace(brownian_drift(0.5), 2.0, 1.0, 1.0)


def test_wolfe_exponent_matches_derivative():
    e = pochhammer(1.5, 1.0, 0.5)
    q, h = 1.5, 1e-5
    dlog = (math.log(1 / selfdecomp_laplace(e, 1.0, q + h)) - math.log(1 / selfdecomp_laplace(e, 1.0, q - h))) / (2 * h)
    assert wolfe_levy_exponent(e, 1.0, q) == pytest.approx(q * dlog, rel=1e-8)
    assert wolfe_levy_exponent(e, 1.0, 0.0) == 0.0


def test_id_laplace_variants():
    e = brownian_drift(0.5)
    q = 0.9
    bare = id_laplace(e, 2.0, q)
    comb = id_laplace(e, 2.0, q, "combined")
    assert comb == pytest.approx(bare * selfdecomp_laplace(e, 2.0, q), rel=1e-14)
    with pytest.raises(ValueError):
        id_laplace(e, 2.0, q, "other")


@pytest.mark.parametrize("g,lam,a,A", [(0.5, 0.5, 1.0, 2.0), (0.0, 1.0, 0.3, 4.0), (1.5, 2.0, 2.0, 2.5)])
def test_hartman_bessel(g, lam, a, A):
    v = hartman_ratio(brownian_drift(g), 2.0, lam, a, A)
    assert v == pytest.approx(hartman_bessel_reference(g, lam, a, A), rel=1e-12)


def test_hartman_is_a_transform():
    e = pochhammer(1.5, 1.0, 0.5)
    assert hartman_ratio(e, 1.0, 0.0, 1.0, 2.0) == pytest.approx(1.0, rel=1e-14)
    vals = [hartman_ratio(e, 1.0, lam, 1.0, 2.0) for lam in (0.1, 1.0, 10.0)]
    assert all(0 < b < a < 1 for a, b in zip(vals, vals[1:]))


def test_hartman_x_form_consistency():
    # x-form with q = 1: log-levels x <= a
    e = brownian_drift(0.5)
    v = hartman_ratio(e, 2.0, 0.7, a=0.2, x=-0.3)
    assert 0 < v < 1
    with pytest.raises(RegimeError):
        hartman_ratio(brownian_drift(-0.5), 2.0, 0.7, 1.0, 2.0)
