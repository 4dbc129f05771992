"""Monte Carlo estimators for the Lamperti functionals.

Randomness is split into fixed chunks of ``CHUNK`` paths; chunk ``i`` is
seeded from ``SeedSequence([seed, i])`` so results depend only on (seed,
path count), never on how many worker threads ran the chunks.
"""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate, special

from ..errors import RegimeError, SimulationError
from ..levy_exponent import BrownianDrift, CharacteristicExponent, Stable, from_spec
from . import kernels

CHUNK = 2048


@dataclass
class PathConfig:
    """Simulation settings. ``exponent`` may be a family spec dict."""

    exponent: object
    paths: int = 100_000
    seed: int = 0
    dt: float = 1e-3  # grid step for simulate_levy_path
    eps: float = 0.03  # small-jump truncation
    horizon: float = 1.0  # fixed horizon for simulate_levy_path
    h: float = 0.02  # target Sigma increment per step
    k_dist: float = 2.5  # level kept k_dist standard deviations away
    tau_min: float = 1e-7
    dt_max: float = 1.0
    c_var: float = 0.5  # bound on alpha^2 * var * dt within one Gaussian segment
    max_steps: int = 2_000_000
    tail_tol: float = 1e-6
    threads: int | None = None

    def __post_init__(self):
        if not isinstance(self.exponent, CharacteristicExponent):
            self.exponent = from_spec(self.exponent)
        if self.dt <= 0 or self.eps <= 0 or self.paths < 1:
            raise ValueError("need dt > 0, eps > 0 and paths >= 1")


@dataclass
class MCEstimate:
    value: float
    se: float
    paths: int
    seed: int
    ess: float | None = None
    resolved_fraction: float = 1.0
    extra: dict = field(default_factory=dict)

    def within(self, reference, k=3.0):
        return abs(self.value - reference) <= k * self.se

    def to_dict(self):
        return asdict(self)


@dataclass
class LampertiPath:
    times: np.ndarray
    xi: np.ndarray
    sigma: np.ndarray
    jumps: np.ndarray
    crossings: dict = field(default_factory=dict)


# -- jump tables --------------------------------------------------------------

_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)


def _interval_masses(nu, edges, weight_pow=0):
    """int r^weight_pow nu(dr) over consecutive edges, Gauss-Legendre in log r."""
    s0, s1 = np.log(edges[:-1]), np.log(edges[1:])
    mid, half = 0.5 * (s0 + s1), 0.5 * (s1 - s0)
    s = mid[:, None] + half[:, None] * _GL_X[None, :]
    r = np.exp(s)
    return (np.asarray(nu(r)) * r ** (1 + weight_pow) * _GL_W[None, :]).sum(axis=1) * half


@dataclass(frozen=True)
class JumpTable:
    eps: float
    lam: float  # nu([eps, inf))
    drift: float  # b + int_eps^1 r nu(dr)
    var: float  # sigma + int_0^eps r^2 nu(dr)
    log_lam: np.ndarray
    log_r: np.ndarray


def jump_table(exponent: CharacteristicExponent, eps: float, n_grid=3000) -> JumpTable:
    if not exponent._has_jumps:
        empty = np.zeros(2)
        return JumpTable(eps, 0.0, exponent.b, exponent.sigma, empty, empty)
    nu = exponent.nu_density
    # upper end: where the remaining mass is negligible
    r_max = max(10.0, 10 * eps)
    while True:
        tail = _interval_masses(nu, np.array([r_max, 10 * r_max]))[0]
        if tail < 1e-13 * max(_interval_masses(nu, np.array([eps, r_max]))[0], 1e-300):
            break
        r_max *= 10.0
        if r_max > 1e12:
            raise SimulationError("jump measure has too heavy a tail to tabulate")
    edges = np.geomspace(eps, r_max, n_grid)
    m = _interval_masses(nu, edges)
    lam_tail = np.concatenate([np.cumsum(m[::-1])[::-1], [0.0]])
    keep = lam_tail > 0
    log_lam = np.log(lam_tail[keep])
    log_r = np.log(edges[keep])
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        s2 = integrate.quad(lambda r: r * r * float(nu(r)), 0.0, eps, limit=200)[0]
        hi = min(1.0, r_max)
        comp = integrate.quad(lambda r: r * float(nu(r)), eps, hi, limit=200)[0] if eps < 1 else -integrate.quad(
            lambda r: r * float(nu(r)), 1.0, eps, limit=200)[0]
    return JumpTable(eps, float(lam_tail[0]), exponent.b + comp, exponent.sigma + s2, log_lam, log_r)


# -- driver -----------------------------------------------------------------

def _threads(cfg):
    if cfg.threads:
        return int(cfg.threads)
    env = os.environ.get("SSM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _chunk_seed(seed, idx):
    return int(np.random.SeedSequence([int(seed), int(idx)]).generate_state(1)[0])


def run_paths(cfg: PathConfig, alpha, x0, level, depth=-math.inf, sigma_cap=math.inf, time_cap=math.inf,
              exponent=None, sign=1.0, paths=None, seed=None, floor=-math.inf):
    """Run the kernel over all chunks; returns a dict of per-path arrays in path order."""
    exp = exponent or cfg.exponent
    tab = jump_table(exp, cfg.eps)
    n = cfg.paths if paths is None else paths
    seed = cfg.seed if seed is None else seed
    sizes = [min(CHUNK, n - i) for i in range(0, n, CHUNK)]

    def job(i):
        return kernels.run_chunk(_chunk_seed(seed, i), sizes[i], float(x0), float(level), float(alpha),
                                 float(sign), tab.drift, tab.var, tab.lam, tab.log_lam, tab.log_r,
                                 float(depth), float(floor), float(sigma_cap), float(time_cap), cfg.h,
                                 cfg.k_dist, cfg.tau_min, cfg.dt_max, cfg.c_var, cfg.max_steps)

    nt = _threads(cfg)
    if nt > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=nt) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(i) for i in range(len(sizes))]
    keys = ("status", "sigma", "time", "xi_end", "steps")
    out = {k: np.concatenate([p[j] for p in parts]) for j, k in enumerate(keys)}
    out["table"] = tab
    return out


def _estimate(values, cfg, seed, weights=None, resolved=1.0, **extra):
    values = np.asarray(values, dtype=float)
    n = len(values)
    if weights is not None:
        values = values * weights
        ess = float(weights.sum() ** 2 / np.sum(weights ** 2)) if np.any(weights) else 0.0
    else:
        ess = None
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return MCEstimate(mean, se, n, seed, ess, resolved, extra)


def estimate_fpt_laplace(cfg: PathConfig, alpha, q, x, a, lam=0.0, sigma_tol=40.0):
    """E_x[exp(-q kappa_a - lam A_{kappa_a}) ; kappa_a < kappa_0] by simulation.

    Paths are abandoned once their remaining contribution is provably tiny:
    Sigma > sigma_tol / q, Levy time > sigma_tol / lam, or (mean < 0) a
    depth ``log(1/tail_tol)/theta`` below the start. When mean >= 0 and
    lam = 0, excursions deeper than ``log(1/tail_tol)/alpha`` below the level
    are skipped (they cannot change Sigma by more than tail_tol * a^alpha).
    """
    if not 0 < x <= a:
        raise RegimeError("need 0 < x <= a")
    exp = cfg.exponent
    if x == a:
        return MCEstimate(1.0, 0.0, cfg.paths, cfg.seed)
    theta = exp.cramer_root
    depth = -math.inf
    if theta is not None:
        depth = math.log(x) - math.log(1.0 / cfg.tail_tol) / theta
    sigma_cap = sigma_tol / q if q > 0 else math.inf
    time_cap = sigma_tol / lam if lam > 0 else math.inf
    if q == 0 and lam == 0 and theta is None:
        return MCEstimate(1.0, 0.0, cfg.paths, cfg.seed)
    floor = -math.inf
    if theta is None and lam == 0:
        # deep excursions add at most tail_tol * a^alpha to Sigma before the path returns
        floor = math.log(a) - math.log(1.0 / cfg.tail_tol) / alpha
    r = run_paths(cfg, alpha, math.log(x), math.log(a), depth, sigma_cap, time_cap, floor=floor)
    hit = r["status"] == kernels.STATUS_HIT
    vals = np.where(hit, np.exp(-q * r["sigma"] - lam * r["time"]), 0.0)
    unresolved = float(np.mean(r["status"] == kernels.STATUS_STEP_CAP))
    return _estimate(vals, cfg, cfg.seed, resolved=1.0 - unresolved, hit_fraction=float(hit.mean()),
                     mean_steps=float(r["steps"].mean()))


def sample_sigma_infty(cfg: PathConfig, alpha, qs=(), start=0.0):
    """Samples of Sigma_inf = int_0^inf exp(alpha xi_s) ds (mean < 0) and transform estimates."""
    exp = cfg.exponent
    theta = exp.cramer_root
    if theta is None:
        raise RegimeError("Sigma_inf is finite only when the mean is negative")
    depth = start - math.log(1.0 / cfg.tail_tol) / theta
    r = run_paths(cfg, alpha, start, math.inf, depth)
    ok = r["status"] == kernels.STATUS_DEPTH
    samples = r["sigma"]
    ests = {float(q): _estimate(np.exp(-q * samples), cfg, cfg.seed, resolved=float(ok.mean())) for q in qs}
    return samples, ests


def rivero_moment(cfg: PathConfig, alpha):
    """E[(int_0^inf exp(-alpha xi_s) ds)^{theta/alpha - 1}] under the Esscher-theta law."""
    exp = cfg.exponent
    theta = exp.cramer_root
    if theta is None or not theta < alpha:
        raise RegimeError("the fractional-moment identity needs mean < 0 and theta < alpha")
    shifted = exp.esscher(theta)
    # under psi_theta the mean is positive; stop once exp(-alpha xi) has decayed by tail_tol
    top = math.log(1.0 / cfg.tail_tol) / alpha + 4.0
    r = run_paths(cfg, alpha, 0.0, top, exponent=shifted, sign=-1.0)
    ok = r["status"] == kernels.STATUS_HIT
    vals = r["sigma"] ** (theta / alpha - 1.0)
    return _estimate(vals, cfg, cfg.seed, resolved=float(ok.mean()))


def rivero_reference(exp, alpha, c_theta):
    theta = exp.cramer_root
    ta = theta / alpha
    return c_theta * alpha * exp.dpsi(theta) / special.gamma(1.0 - ta)


def esscher_weighted_estimate(cfg: PathConfig, alpha, gamma, functional, x, a, q=0.0, sigma_tol=40.0):
    """E^{(gamma)}[F] from base-law paths reweighted by exp(gamma (xi_T - log x) - psi(gamma) T).

    ``functional(hit, sigma, time, xi_end)`` returns per-path values; T is the
    first passage above log a (paths that never get there carry F = 0).
    """
    exp = cfg.exponent
    theta = exp.cramer_root
    depth = -math.inf if theta is None else math.log(x) - math.log(1.0 / cfg.tail_tol) / theta
    sigma_cap = sigma_tol / q if q > 0 else math.inf
    r = run_paths(cfg, alpha, math.log(x), math.log(a), depth, sigma_cap)
    hit = r["status"] == kernels.STATUS_HIT
    w = np.exp(gamma * (r["xi_end"] - math.log(x)) - float(exp.psi(gamma)) * r["time"]) if gamma else np.ones(
        len(hit))
    w = np.where(hit, w, 0.0) if gamma else w
    f = np.asarray(functional(hit, r["sigma"], r["time"], r["xi_end"]), dtype=float)
    est = _estimate(f, cfg, cfg.seed, weights=w)
    if est.ess is not None and gamma and est.ess < 0.05 * len(f):
        est.extra["warning"] = "unreliable weights: ESS below 5% of paths"
    return est


# -- path simulation on a fixed grid ---------------------------------------

def simulate_levy_path(cfg: PathConfig, alpha=1.0, x0=0.0, level=None, rng=None):
    """One path on the grid k*dt up to the horizon, with Sigma by the trapezoid rule.

    Brownian: exact Gaussian increments. Stable (untempered): Chambers-Mallows-Stuck.
    Otherwise: compound Poisson jumps >= eps, Gaussian small jumps and drift.
    """
    exp = cfg.exponent
    rng = rng or np.random.default_rng(np.random.SeedSequence([cfg.seed, 0]))
    n = int(round(cfg.horizon / cfg.dt))
    dt = cfg.horizon / n
    jumps = np.zeros(0)
    if isinstance(exp, BrownianDrift):
        inc = exp.b * dt + math.sqrt(exp.sigma * dt) * rng.standard_normal(n)
    elif isinstance(exp, Stable) and exp.tilt == 0 and exp.gamma_shift == 0:
        scale = (exp.c * abs(math.cos(math.pi * exp.rho / 2))) ** (1 / exp.rho)
        z = kernels.cms_stable(n, exp.rho, int(rng.integers(2 ** 32)))
        inc = scale * dt ** (1 / exp.rho) * z
    else:
        tab = jump_table(exp, cfg.eps)
        counts = rng.poisson(tab.lam * dt, n)
        jumps = sample_jumps(tab, int(counts.sum()), rng)
        per_step = np.zeros(n)
        np.add.at(per_step, np.repeat(np.arange(n), counts), jumps)
        inc = tab.drift * dt + math.sqrt(tab.var * dt) * rng.standard_normal(n) - per_step
    if np.any(jumps < 0):
        raise SimulationError("a positive jump was generated")
    xi = np.concatenate([[x0], x0 + np.cumsum(inc)])
    e = np.exp(alpha * xi)
    sig = np.concatenate([[0.0], np.cumsum(0.5 * dt * (e[1:] + e[:-1]))])
    times = np.arange(n + 1) * dt
    crossings = {}
    if level is not None:
        above = np.nonzero(xi >= level)[0]
        crossings["first_index"] = int(above[0]) if len(above) else None
    return LampertiPath(times, xi, sig, jumps, crossings)


def sample_jumps(tab: JumpTable, n, rng):
    """Jump sizes from nu restricted to [eps, inf), by inverting the tabulated tail."""
    if n == 0:
        return np.zeros(0)
    target = tab.log_lam[0] + np.log(rng.random(n))
    # log_lam is decreasing; interpolate log r against it
    return np.exp(np.interp(-target, -tab.log_lam, tab.log_r))


def stable_increments(exp: Stable, t, n, seed):
    """n independent copies of xi_t for an untempered stable exponent (CMS)."""
    scale = (exp.c * abs(math.cos(math.pi * exp.rho / 2))) ** (1 / exp.rho)
    return scale * t ** (1 / exp.rho) * kernels.cms_stable(n, exp.rho, _chunk_seed(seed, 0))


# -- output -----------------------------------------------------------------

def write_summary(path, estimates: dict):
    with open(path, "w") as fh:
        json.dump({k: v.to_dict() if isinstance(v, MCEstimate) else v for k, v in estimates.items()}, fh,
                  indent=2, sort_keys=True)


def write_paths_csv(path, run):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "status", "sigma", "levy_time", "xi_end"])
        for i, (s, sg, t, x) in enumerate(zip(run["status"], run["sigma"], run["time"], run["xi_end"])):
            w.writerow([i, int(s), "%.17g" % sg, "%.17g" % t, "%.17g" % x])
