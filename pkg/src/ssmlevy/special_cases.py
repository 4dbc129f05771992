"""Closed-form oracles: Bessel and MacDonald functions, Mittag-Leffler functions,
the Pochhammer family triplet, the generalized factorial and generalized exponential."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .eigenfunction_series import LogValue, log_series
from .errors import ConfigError, QuadratureError, RegimeError
from .levy_exponent import Pochhammer, poch, _dpoch


# -- Bessel ------------------------------------------------------------------

def bessel_I(gamma, x):
    """Modified Bessel function of the first kind (scipy ``iv``)."""
    return special.iv(gamma, x)


def macdonald_K(gamma, x):
    """MacDonald function K_gamma (scipy ``kv``)."""
    if np.any(np.asarray(x) <= 0):
        raise RegimeError("K_gamma is evaluated on x > 0")
    return special.kv(gamma, x)


def macdonald_from_I(gamma, x, offset=0.1, levels=4):
    """K_gamma from the combination Gamma(1-g)Gamma(g)(I_{-g} - I_g)/2.

    At integer index the combination degenerates; there the symmetric average
    over ``gamma +- h`` is even in h, so it is taken at h = offset / 2^j and
    Richardson-extrapolated in h^2. Cancellation between the two I terms
    limits the accuracy once x is beyond about 10.
    """
    def raw(g):
        return 0.5 * math.pi / math.sin(math.pi * g) * (special.iv(-g, x) - special.iv(g, x))

    if abs(gamma - round(gamma)) > 1e-3:
        return raw(gamma)
    n = float(round(gamma))

    T = [0.5 * (raw(n + offset / 2 ** j) + raw(n - offset / 2 ** j)) for j in range(levels)]
    for k in range(1, levels):
        f = 4.0 ** k
        T = [(f * T[j + 1] - T[j]) / (f - 1) for j in range(len(T) - 1)]
    return T[0]


def bessel_eigen_reference(gamma, x):
    """Gamma(g+1) (x/2)^{-g/2} I_g(sqrt(2x)), the eigenfunction of psi(u) = u^2/2 + g u at alpha=2."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = special.gamma(gamma + 1) * (x / 2) ** (-gamma / 2) * special.iv(gamma, np.sqrt(2 * x))
    v = np.where(x == 0, 1.0, v)
    return v if v.ndim else float(v)


def bessel_N_reference(gamma, x):
    """Decreasing eigenfunction for gamma in (-1, 0): (x/2)^{nu/2} (2/Gamma(nu)) K_nu(sqrt(2x)), nu=-gamma."""
    nu = -gamma
    if not 0 < nu < 1:
        raise RegimeError("the MacDonald form needs gamma in (-1, 0)")
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (x / 2) ** (nu / 2) * 2.0 / special.gamma(nu) * special.kv(nu, np.sqrt(2 * x))
    v = np.where(x == 0, 1.0, v)
    return v if v.ndim else float(v)


def bessel_C_theta(gamma):
    """Exact C_theta for the Brownian family at alpha=2, theta=-2 gamma."""
    nu = -gamma
    return special.gamma(1 - nu) / (2 ** nu * special.gamma(1 + nu))


def hartman_bessel_reference(gamma, lam, a, A):
    """Classical Bessel ratio I_mu(sqrt(2a)) I_g(sqrt(2A)) / (I_mu(sqrt(2A)) I_g(sqrt(2a))) with
    mu = sqrt(g^2 + 2 lam), times the factor (a/A)^{(mu - g)/2} produced by the eigenfunction identity."""
    mu = math.sqrt(gamma * gamma + 2 * lam)
    ra, rA = math.sqrt(2 * a), math.sqrt(2 * A)
    ratio = special.ive(mu, ra) * special.ive(gamma, rA) / (special.ive(mu, rA) * special.ive(gamma, ra))
    return ratio * (a / A) ** ((mu - gamma) / 2)


# -- Mittag-Leffler ---------------------------------------------------------

def log_mittag_leffler(rho, beta, z, tol=1e-17):
    """log E_{rho,beta}(z) for z > 0 by log-space summation."""
    if z < 0:
        raise RegimeError("Mittag-Leffler evaluated on z >= 0 only")
    if z == 0:
        return -special.gammaln(beta) if beta > 0 else -math.inf
    lz = math.log(z)

    def terms(lo, hi):
        n = np.arange(lo, hi, dtype=float)
        return n * lz - special.gammaln(rho * n + beta)

    return log_series(terms, tol)


def mittag_leffler(rho, beta, z, tol=1e-17):
    """E_{rho,beta}(z) = sum z^n / Gamma(rho n + beta) on z >= 0."""
    if np.ndim(z):
        return np.array([mittag_leffler(rho, beta, float(v), tol) for v in np.ravel(z)]).reshape(np.shape(z))
    if z == 0:
        return float(special.rgamma(beta))
    lv = log_mittag_leffler(rho, beta, z, tol)
    return LogValue(lv) if lv > 709 else math.exp(lv)


def mittag_leffler_asymptotic(rho, beta, x):
    """Leading behaviour E_{rho,beta}(x^rho) ~ e^x x^{1-beta} / rho."""
    return math.exp(x) * x ** (1 - beta) / rho


def mellin_laplace_identity_check(rho, beta, lam):
    """Relative residual of int_0^inf e^{-(lam+1)x} x^{beta-1} E_{rho,beta}(x^rho) dx
    against (lam+1)^{rho-beta} / ((lam+1)^rho - 1)."""
    if lam <= 0:
        raise RegimeError("the integral converges for lambda > 0 only")
    s = lam + 1.0

    def g(x):
        # integrand without the x^{beta-1} weight
        if x == 0:
            return float(special.rgamma(beta))
        return math.exp(log_mittag_leffler(rho, beta, x ** rho) - s * x)

    def full(x):
        return math.exp(log_mittag_leffler(rho, beta, x ** rho) - s * x + (beta - 1) * math.log(x))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        head, e1 = integrate.quad(g, 0.0, 1.0, weight="alg", wvar=(beta - 1.0, 0.0), epsabs=0, epsrel=1e-13,
                                  limit=200)
        tail, e2 = integrate.quad(full, 1.0, math.inf, epsabs=0, epsrel=1e-13, limit=400)
    lhs = head + tail
    if e1 + e2 > 1e-9 * abs(lhs):
        raise QuadratureError("Mellin-Laplace integral did not converge", (0.0, math.inf))
    rhs = s ** (rho - beta) / (s ** rho - 1.0)
    return abs(lhs / rhs - 1.0)


# -- Pochhammer family ------------------------------------------------------

@dataclass(frozen=True)
class PochhammerFamily:
    rho: float
    beta_scale: float
    gamma: float
    b_gamma: float          # the drift-type quantity beta (gamma)_rho (Psi(gamma-1+rho) - Psi(gamma-1))
    drift: float            # drift of the truncated Levy-Khintchine form
    mean: float
    gamma_0: float          # zero of gamma -> b_gamma, equivalently of gamma -> mean
    nu_const: float

    def nu_density(self, r):
        """Density of nu on r > 0 (mirror image of the jump measure on y < 0)."""
        r = np.asarray(r, dtype=float)
        y = r / self.beta_scale
        return self.nu_const * np.exp(-(self.rho + self.gamma - 1) * y) / (-np.expm1(-y)) ** (self.rho + 1)

    def nu_tilde_literal(self, y):
        """Jump density on y < 0 with the normalisation rho (rho-1) / (beta Gamma(2-rho))."""
        y = np.asarray(y, dtype=float)
        k = self.rho * (self.rho - 1) / (self.beta_scale * special.gamma(2 - self.rho))
        return k * np.exp((self.rho + self.gamma - 1) * y / self.beta_scale) / (
            -np.expm1(y / self.beta_scale)) ** (self.rho + 1)

    def exponent(self):
        return Pochhammer(self.rho, self.beta_scale, self.gamma)


def pochhammer_b_gamma(rho, beta, gamma):
    """beta (gamma)_rho (Psi(gamma - 1 + rho) - Psi(gamma - 1)), with the removable pole at gamma = 0."""
    if gamma == 0.0:
        return beta * special.gamma(rho)
    return beta * float(poch(gamma, rho)) * (special.digamma(gamma - 1 + rho) - special.digamma(gamma - 1))


def pochhammer_gamma_0(rho):
    """Zero of gamma -> E[xi_1] for the Pochhammer family (independent of beta)."""
    def m(g):
        return _dpoch(g - 1.0, rho)

    lo = 1.0 - rho + 1e-12
    hi = lo + 1.0
    while m(hi) <= 0:
        hi += 1.0
    return optimize.brentq(m, lo, hi, xtol=1e-15, rtol=1e-15)


def pochhammer_triplet(rho, beta_scale, gamma):
    if gamma <= 1 - rho:
        raise ConfigError(f"pochhammer: gamma must exceed 1 - rho = {1 - rho}")
    if beta_scale <= 0:
        raise ConfigError("pochhammer: beta must be > 0")
    exp = Pochhammer(rho, beta_scale, gamma)
    return PochhammerFamily(float(rho), float(beta_scale), float(gamma), float(pochhammer_b_gamma(rho, beta_scale, gamma)),
                            exp.b, exp.mean, pochhammer_gamma_0(rho), float(exp.nu_const))


def psi_from_triplet(triplet_or_exp, u):
    """psi(u) by quadrature of the Levy-Khintchine integral (independent of the closed form)."""
    if isinstance(triplet_or_exp, PochhammerFamily):
        b, nu = triplet_or_exp.drift, triplet_or_exp.nu_density
    else:
        b, nu = triplet_or_exp.b, triplet_or_exp.nu_density
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        i1 = integrate.quad(lambda r: (math.expm1(-u * r) + u * r) * float(nu(r)), 0, 1, limit=200,
                            epsrel=1e-12)[0]
        i2 = integrate.quad(lambda r: math.expm1(-u * r) * float(nu(r)), 1, math.inf, limit=200,
                            epsrel=1e-12)[0]
    return b * u + i1 + i2


# -- generalized factorial / exponential ----------------------------------

def log_generalized_factorial(alpha, gamma, rho, n):
    """log (alpha, gamma)_{rho,n}; -inf when a factor vanishes."""
    if n == 0:
        return 0.0
    k = np.arange(1, n + 1, dtype=float)
    f = (k * alpha + gamma) ** rho - gamma ** rho
    if np.any(f <= 0):
        return -math.inf
    return math.fsum(np.log(f))


def generalized_factorial(alpha, gamma, rho, n):
    """(alpha, gamma)_{rho,n} = prod_{k=1}^n ((k alpha + gamma)^rho - gamma^rho)."""
    if n == 0:
        return 1.0
    if rho == 0:
        return 0.0
    return math.exp(log_generalized_factorial(alpha, gamma, rho, n))


def generalized_factorial_alternating(alpha, gamma, rho, n):
    """alpha^{rho n} sum_k (-1)^{n-k} (gamma/alpha)^{rho(n-k)} (1, gamma/alpha)_{rho,k}."""
    g = gamma / alpha
    terms = [(-1) ** (n - k) * g ** (rho * (n - k)) * generalized_factorial(1.0, g, rho, k) for k in range(n + 1)]
    return alpha ** (rho * n) * math.fsum(terms)


def generalized_exp(alpha, gamma, rho, x, tol=1e-17):
    """sum_n x^n / (alpha, gamma)_{rho,n}, i.e. I_{alpha,gamma,rho}(c_rho x)."""
    if x == 0:
        return 1.0
    lx = math.log(x)
    cache = [0.0]

    def terms(lo, hi):
        while len(cache) < hi:
            k = len(cache)
            cache.append(cache[-1] + math.log((k * alpha + gamma) ** rho - gamma ** rho))
        n = np.arange(lo, hi, dtype=float)
        return n * lx - np.asarray(cache[lo:hi])

    lv = log_series(terms, tol)
    return LogValue(lv) if lv > 709 else math.exp(lv)
