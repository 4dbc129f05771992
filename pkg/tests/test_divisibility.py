import json
import math

import mpmath
import numpy as np
import pytest

from ssmlevy import InversionUnstable
from ssmlevy.divisibility import (
    bernstein_check,
    complete_monotonicity_check,
    laplace_invert,
    log_grid,
    mp_selfdecomp_transform,
    selfdecomp_check,
    unimodality_check,
)
from ssmlevy.levy_exponent import brownian_drift, pochhammer, stable
from ssmlevy.transforms import selfdecomp_laplace


@pytest.mark.parametrize("f", [
    lambda q: 1 / (1 + q),
    lambda q: math.exp(-q),
    lambda q: (1 + q) ** -2.5,
    lambda q: math.exp(-math.sqrt(q)),
], ids=["resolvent", "exp", "power", "stable-half"])
def test_known_cm_functions_pass(f):
    rep = complete_monotonicity_check(f)
    assert rep.verdict == "pass"
    assert all(m >= -1e-9 for m in rep.margins.values())


@pytest.mark.parametrize("f", [
    lambda q: math.exp(-q * q),
    lambda q: 1 / (1 + q) + 0.2 * math.sin(q),
    lambda q: math.exp(-q) * (1 + 0.5 * math.cos(3 * q)),
], ids=["gaussian", "wiggle", "damped-cos"])
def test_non_cm_functions_fail(f):
    assert complete_monotonicity_check(f).verdict == "fail"


def test_noise_level_violation_is_inconclusive():
    # a constant perturbed at the 1e-14 level: differences are pure noise
    rng = np.random.default_rng(3)
    noise = {}

    def f(q):
        return noise.setdefault(q, 1.0 + 1e-14 * rng.standard_normal())

    rep = complete_monotonicity_check(f, tol=1e-16)
    assert rep.verdict in ("inconclusive", "pass")
    assert rep.warnings


def test_bernstein():
    assert bernstein_check(lambda q: math.sqrt(q)).verdict == "pass"
    assert bernstein_check(lambda q: math.log1p(q)).verdict == "pass"
    assert bernstein_check(lambda q: q * q).verdict == "fail"


def test_report_serializes():
    rep = complete_monotonicity_check(lambda q: 1 / (1 + q), grid=log_grid(0.1, 10, 5), order_max=3)
    d = json.loads(rep.to_json())
    assert d["verdict"] == "pass" and len(d["grid"]) == 5


@pytest.mark.parametrize("e,alpha", [
    (brownian_drift(0.0), 2.0),
    (brownian_drift(-0.5), 2.0),
    (stable(1.5, 1.0, 0.5), 1.0),
    (pochhammer(1.5, 1.0, 0.5), 1.0),
], ids=repr)
def test_selfdecomposability(e, alpha):
    assert complete_monotonicity_check(lambda q: selfdecomp_laplace(e, alpha, q)).verdict == "pass"
    assert selfdecomp_check(e, alpha).verdict == "pass"


def test_inversion_of_resolvent():
    t = np.linspace(0.1, 5.0, 25)
    grid = laplace_invert(lambda q: 1 / (1 + q), t)
    assert np.max(np.abs(np.asarray(grid.density) - np.exp(-t))) < 1e-8
    assert max(grid.error) < 1e-6


def test_inversion_rejects_excess_mass():
    with pytest.raises(InversionUnstable):
        laplace_invert(lambda q: 2 / (1 + q), np.linspace(0.01, 30.0, 80))


def test_inversion_rejects_negative_density():
    # exp(-q) is a point mass at 1: Stehfest rings to large negative values
    with pytest.raises(InversionUnstable):
        laplace_invert(lambda q: mpmath.exp(-q), np.linspace(0.2, 3.0, 30))


def test_bessel_density_unimodal():
    grid = laplace_invert(mp_selfdecomp_transform(brownian_drift(0.0), 2.0), np.geomspace(0.02, 40.0, 60))
    mode, verdict = unimodality_check(grid)
    assert verdict == "pass"
    assert 0.02 < mode < 40.0
    assert grid.mass == pytest.approx(1.0, abs=1e-3)
