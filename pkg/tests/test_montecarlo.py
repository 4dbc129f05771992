import math

import numpy as np
import pytest
from scipy import integrate, stats

from ssmlevy import RegimeError
from ssmlevy.eigenfunction_series import c_theta
from ssmlevy.levy_exponent import brownian_drift, pochhammer, stable
from ssmlevy.montecarlo import (
    MCEstimate,
    PathConfig,
    esscher_weighted_estimate,
    estimate_fpt_laplace,
    jump_table,
    rivero_moment,
    rivero_reference,
    run_paths,
    sample_jumps,
    sample_sigma_infty,
    simulate_levy_path,
    stable_increments,
    write_paths_csv,
    write_summary,
)
from ssmlevy.montecarlo import kernels
from ssmlevy.transforms import expfun_laplace, fpt_up_laplace


def test_start_at_level_is_one():
    cfg = PathConfig(brownian_drift(0.0), paths=10)
    est = estimate_fpt_laplace(cfg, 2.0, 1.0, 1.5, 1.5)
    assert est.value == 1.0 and est.se == 0.0


def test_regime_errors():
    cfg = PathConfig(brownian_drift(0.5), paths=10)
    with pytest.raises(RegimeError):
        estimate_fpt_laplace(cfg, 2.0, 1.0, 2.0, 1.0)
    with pytest.raises(RegimeError):
        sample_sigma_infty(cfg, 2.0)
    with pytest.raises(RegimeError):
        # theta = 4 exceeds alpha = 2
        rivero_moment(PathConfig(brownian_drift(-2.0), paths=10), 2.0)


def test_config_accepts_spec_dict():
    cfg = PathConfig({"family": "brownian", "gamma": 0.25})
    assert cfg.exponent == brownian_drift(0.25)
    with pytest.raises(ValueError):
        PathConfig(brownian_drift(0.0), eps=0.0)


def test_determinism_across_thread_counts():
    kw = dict(paths=5000, seed=11)
    a = run_paths(PathConfig(pochhammer(1.5, 1.0, 0.5), threads=1, **kw), 1.0, 0.0, 0.5, sigma_cap=50.0)
    b = run_paths(PathConfig(pochhammer(1.5, 1.0, 0.5), threads=3, **kw), 1.0, 0.0, 0.5, sigma_cap=50.0)
    for k in ("status", "sigma", "time", "xi_end", "steps"):
        assert np.array_equal(a[k], b[k])
    c = run_paths(PathConfig(pochhammer(1.5, 1.0, 0.5), threads=1, paths=5000, seed=12), 1.0, 0.0, 0.5,
                  sigma_cap=50.0)
    assert not np.array_equal(a["sigma"], c["sigma"])


def test_paths_end_on_or_above_level():
    r = run_paths(PathConfig(stable(1.5, 1.0, 0.5), paths=2000, seed=3), 1.0, 0.0, 0.7)
    hit = r["status"] == kernels.STATUS_HIT
    assert hit.mean() > 0.99
    # no positive jumps: upward passage is continuous
    assert np.allclose(r["xi_end"][hit], 0.7, atol=1e-12)
    assert np.all(r["sigma"] >= 0)


def test_brownian_grid_increments():
    cfg = PathConfig(brownian_drift(0.3, sigma=2.0), dt=1e-3, horizon=100.0, seed=5)
    p = simulate_levy_path(cfg)
    inc = np.diff(p.xi)
    n = len(inc)
    assert abs(inc.mean() - 0.3e-3) < 4 * math.sqrt(2e-3 / n)
    assert inc.var() == pytest.approx(2e-3, rel=4 * math.sqrt(2.0 / n))


def test_grid_path_has_no_positive_jumps_and_monotone_sigma():
    cfg = PathConfig(pochhammer(1.5, 1.0, 0.5), dt=1e-3, horizon=20.0, seed=2)
    p = simulate_levy_path(cfg, alpha=1.0, level=0.5)
    assert len(p.jumps) > 0 and np.all(p.jumps >= cfg.eps)
    assert np.all(np.diff(p.sigma) > 0)
    assert p.times[-1] == pytest.approx(20.0)
    assert "first_index" in p.crossings


def test_stable_cms_exponential_moments():
    e = stable(1.5, 1.0, 0.0)
    x = stable_increments(e, 1.0, 200_000, seed=9)
    for u in (0.3, 0.6):
        v = np.exp(u * x)
        assert abs(v.mean() - math.exp(float(e.psi(u)))) < 4 * v.std() / math.sqrt(len(v))


def test_pochhammer_jump_sizes_goodness_of_fit():
    e = pochhammer(1.5, 1.0, 0.5)
    tab = jump_table(e, 0.03)
    r = sample_jumps(tab, 200_000, np.random.default_rng(4))
    edges = np.concatenate([np.geomspace(0.03, 3.0, 21), [np.inf]])
    obs = np.histogram(r, edges)[0]
    nu = e.nu_density
    mass = np.array([integrate.quad(lambda s: float(nu(s)), lo, hi, limit=200)[0] for lo, hi in zip(edges[:-1],
                                                                                                 edges[1:])])
    assert mass.sum() == pytest.approx(tab.lam, rel=1e-6)
    expected = len(r) * mass / mass.sum()
    assert stats.chisquare(obs, expected).pvalue > 1e-3


def test_jump_table_small_jump_variance():
    e = stable(1.5, 1.0, 0.0)
    tab = jump_table(e, 0.03)
    # int_0^eps r^2 c r^{-1-rho} dr = c eps^{2-rho}/(2-rho)
    assert tab.var == pytest.approx(e.nu_const * 0.03 ** 0.5 / 0.5, rel=1e-6)
    assert tab.lam == pytest.approx(e.nu_const * 0.03 ** -1.5 / 1.5, rel=1e-6)


def test_brownian_fpt_cross_check():
    e = brownian_drift(0.0)
    est = estimate_fpt_laplace(PathConfig(e, paths=20_000, seed=1), 2.0, 1.0, 1.0, 2.0)
    assert est.within(fpt_up_laplace(e, 2.0, 1.0, 1.0, 2.0), k=4)
    assert est.resolved_fraction == 1.0


def test_pochhammer_expfun_cross_check():
    e = pochhammer(1.5, 1.0, 0.0)
    _, ests = sample_sigma_infty(PathConfig(e, paths=10_000, seed=2), 1.5, qs=(1.0,))
    assert ests[1.0].within(expfun_laplace(e, 1.5, 1.0), k=4)


def test_esscher_gamma_zero_has_unit_weights():
    cfg = PathConfig(brownian_drift(0.0), paths=3000, seed=8)
    est = esscher_weighted_estimate(cfg, 2.0, 0.0, lambda hit, s, t, x: hit * np.exp(-s), 1.0, 2.0, q=1.0)
    ref = estimate_fpt_laplace(cfg, 2.0, 1.0, 1.0, 2.0)
    assert est.ess == pytest.approx(3000.0)
    assert est.value == pytest.approx(ref.value, abs=5 * ref.se)


def test_rivero_reference_bessel():
    # psi = u^2/2 - u/4: theta = 1/2 < alpha = 2
    e = brownian_drift(-0.25)
    ref = rivero_reference(e, 2.0, c_theta(e, 2.0).C_theta)
    est = rivero_moment(PathConfig(e, paths=10_000, seed=4), 2.0)
    assert est.within(ref, k=4)


def test_outputs(tmp_path):
    est = MCEstimate(0.5, 0.01, 100, 0)
    write_summary(tmp_path / "s.json", {"a": est, "note": "x"})
    assert '"value": 0.5' in (tmp_path / "s.json").read_text()
    r = run_paths(PathConfig(brownian_drift(0.5), paths=5, seed=1), 2.0, 0.0, 0.2)
    write_paths_csv(tmp_path / "p.csv", r)
    assert len((tmp_path / "p.csv").read_text().splitlines()) == 6
