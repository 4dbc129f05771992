"""The entire eigenfunction I_{alpha,psi}, the constant C_theta and N_{alpha,psi,theta}.

Coefficients ``a_n = 1 / prod_{k<=n} psi(alpha k)`` are kept as a compensated
cumulative sum of ``-log psi(alpha k)``. Series are summed with max-term
normalisation and ``math.fsum`` so that the log channel never overflows.
"""

from __future__ import annotations

import functools
import math
import threading
from dataclasses import dataclass
from typing import NamedTuple

import mpmath
import numpy as np
from scipy import special

from .errors import ConvergenceError, RegimeError
from .levy_exponent import CharacteristicExponent

EULER_GAMMA = 0.577215664901532860606512090082
TOL_SERIES = 1e-17
COND_MAX = 1e8  # beyond this I(x)/N(x) the extended-precision path is used


class LogValue(NamedTuple):
    """A value too large for a double: ``sign * exp(log)``."""

    log: float
    sign: int = 1


def _kahan_cumsum(x, start=0.0, comp=0.0):
    out = np.empty(len(x))
    s, c = start, comp
    for i, v in enumerate(x):
        y = v - c
        t = s + y
        c = (t - s) - y
        s = t
        out[i] = s
    return out, c


def log_series(log_terms, tol=TOL_SERIES, n0=0, block=64, n_max=2_000_000):
    """log of sum_n exp(log_terms(n)) for a unimodal (log-concave) sequence.

    ``log_terms(lo, hi)`` returns the log terms for ``n in [lo, hi)``. Summation
    stops once past the peak three consecutive terms fall below ``tol`` times
    the running sum.
    """
    chunks = []
    lo = n0
    best = -math.inf
    small = 0
    done = False
    while not done:
        t = np.asarray(log_terms(lo, lo + block), dtype=float)
        chunks.append(t)
        best = max(best, float(np.max(t)))
        # running sum bound: exp(best) <= partial sum
        thresh = best + math.log(tol)
        for v, v_next in zip(t, np.append(t[1:], -math.inf)):
            if v < thresh and v_next <= v:
                small += 1
                if small >= 3:
                    done = True
                    break
            else:
                small = 0
        lo += block
        block = min(2 * block, 65536)
        if lo > n_max:
            raise ConvergenceError(f"series did not terminate within {n_max} terms")
    t = np.concatenate(chunks)
    t = t[np.isfinite(t)]
    m = float(np.max(t))
    return m + math.log(math.fsum(np.exp(t - m)))


class Eigenfunction:
    """I_{alpha,psi}(z) = sum_n a_n z^n for a (possibly Esscher-shifted) exponent."""

    def __init__(self, exponent: CharacteristicExponent, alpha: float):
        if alpha <= 0:
            raise RegimeError("alpha must be > 0")
        self.exponent = exponent
        self.alpha = float(alpha)
        if exponent.mean < 0 and not exponent.cramer_root < alpha:
            raise RegimeError(f"theta={exponent.cramer_root:.6g} >= alpha={alpha}: coefficients change sign")
        self._logc = np.zeros(1)
        self._comp = 0.0
        self._lock = threading.Lock()

    def log_coeffs(self, n_max):
        """log a_0 .. log a_{n_max}; extends the cache under a lock."""
        if n_max < len(self._logc):
            return self._logc[: n_max + 1]
        with self._lock:
            n_have = len(self._logc)
            if n_max >= n_have:
                n_new = max(n_max + 1, 2 * n_have)
                k = np.arange(n_have, n_new, dtype=float)
                psi = np.asarray(self.exponent.psi(self.alpha * k), dtype=float)
                if np.any(psi <= 0):
                    bad = int(k[np.argmax(psi <= 0)])
                    raise RegimeError(f"psi(alpha*{bad}) <= 0: theta >= alpha")
                lp = np.asarray(self.exponent.log_psi(self.alpha * k), dtype=float)
                ext, self._comp = _kahan_cumsum(-lp, self._logc[-1], self._comp)
                self._logc = np.concatenate([self._logc, ext])
        return self._logc[: n_max + 1]

    def coefficients(self, n_max):
        return np.exp(self.log_coeffs(n_max))

    def _terms(self, logz, deriv=0):
        def f(lo, hi):
            lc = self.log_coeffs(hi - 1)[lo:hi]
            n = np.arange(lo, hi, dtype=float)
            out = lc + (n - deriv) * logz
            with np.errstate(divide="ignore"):
                for j in range(deriv):
                    out = out + np.log(n - j)
            return out
        return f

    def log_I(self, z, tol=TOL_SERIES):
        if z < 0:
            raise RegimeError("I is evaluated on z >= 0")
        if z == 0:
            return 0.0
        return log_series(self._terms(math.log(z)), tol)

    def log_dI(self, z, tol=TOL_SERIES, order=1):
        """log of the ``order``-th derivative (order 1 or 2)."""
        if z == 0:
            return float(self.log_coeffs(order)[order]) + math.lgamma(order + 1)
        return log_series(self._terms(math.log(z), deriv=order), tol, n0=order)

    def __call__(self, z, tol=TOL_SERIES):
        if np.ndim(z):
            return np.array([self(float(v), tol) for v in np.ravel(z)]).reshape(np.shape(z))
        return _from_log(self.log_I(float(z), tol))

    def derivative(self, z, tol=TOL_SERIES):
        if np.ndim(z):
            return np.array([self.derivative(float(v), tol) for v in np.ravel(z)]).reshape(np.shape(z))
        return _from_log(self.log_dI(float(z), tol))


def _from_log(lv):
    if lv > 709.0:
        return LogValue(lv)
    return math.exp(lv)


@functools.lru_cache(maxsize=256)
def eigenfunction(exponent: CharacteristicExponent, alpha: float) -> Eigenfunction:
    """Shared, cached eigenfunction object for (exponent, alpha)."""
    return Eigenfunction(exponent, float(alpha))


def coefficients(exponent, alpha, n_max):
    return eigenfunction(exponent, alpha).coefficients(n_max)


def eval_I(exponent, alpha, z, tol=TOL_SERIES):
    return eigenfunction(exponent, alpha)(z, tol)


def eval_I_derivative(exponent, alpha, z, tol=TOL_SERIES):
    return eigenfunction(exponent, alpha).derivative(z, tol)


def log_I(exponent, alpha, z, tol=TOL_SERIES):
    return eigenfunction(exponent, alpha).log_I(z, tol)


# --------------------------------------------------------------------------
# C_theta

@dataclass(frozen=True)
class AsymptoticProfile:
    theta: float
    theta_alpha: float
    beta: float
    l_beta: float
    C_theta: float
    method_tag: str
    error_estimate: float
    rv_estimated: bool = False


def _check_theta_regime(exponent, alpha):
    theta = exponent.cramer_root
    if theta is None:
        raise RegimeError("C_theta needs mean < 0 (no Cramer root)")
    if not 0 < theta < alpha:
        raise RegimeError(f"C_theta needs 0 < theta < alpha, got theta={theta:.6g}")
    return theta


def c_theta_product_from(log_psi, alpha, theta, beta, l_beta, tol=1e-13, k_min=64, levels=11):
    """Product formula for C_theta with Richardson extrapolation in 1/K.

    Returns (C, error_estimate).
    """
    ta = theta / alpha
    pre = (EULER_GAMMA * beta * ta - ta * math.log(l_beta) - (1 + beta) * ta * math.log(alpha)
           - special.gammaln(1 + ta))
    # partial sums at K = k_min 2^j, accumulated incrementally
    k0, acc = 0, 0.0
    table = []
    err = math.inf
    for j in range(levels):
        K = k_min * 2 ** j
        k = np.arange(k0 + 1, K + 1, dtype=float)
        f = (-beta * ta / k - np.log1p(ta / k)
             + np.asarray(log_psi(alpha * k + theta)) - np.asarray(log_psi(alpha * k)))
        acc += math.fsum(f)
        k0 = K
        row = [acc]
        for p in range(1, j + 1):
            fac = 2.0 ** p
            row.append(row[p - 1] + (row[p - 1] - table[-1][p - 1]) / (fac - 1.0))
        table.append(row)
        if j >= 2:
            err = abs(row[-1] - table[-2][-1])
            if err < tol:
                break
    val = table[-1][-1]
    return math.exp(pre + val), err * math.exp(pre + val)


def c_theta(exponent, alpha, mode="product", tol=1e-12):
    """AsymptoticProfile with C_theta computed by the product formula or by the ratio limit."""
    theta = _check_theta_regime(exponent, alpha)
    beta, l_beta, estimated = exponent.regular_variation
    ta = theta / alpha
    if mode == "product" and estimated:
        mode = "ratio_estimate"
    if mode == "best":
        cands = [c_theta(exponent, alpha, "ratio_estimate", tol)]
        if not estimated:
            cands.append(c_theta(exponent, alpha, "product", tol))
        return min(cands, key=lambda p: p.error_estimate / p.C_theta)
    if mode == "product":
        C, err = c_theta_product_from(exponent.log_psi, alpha, theta, beta, l_beta, tol=tol)
        tag = "product"
    elif mode == "ratio_estimate":
        C, err = _c_theta_ratio(exponent, alpha, theta, tol)
        tag = "ratio_estimate"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return AsymptoticProfile(theta, ta, beta, l_beta, C, tag, err, estimated)


@functools.lru_cache(maxsize=128)
def _c_theta_cached(exponent, alpha, mode):
    return c_theta(exponent, alpha, mode)


def _c_theta_ratio(exponent, alpha, theta, tol):
    """lim_{z->inf} I(z) / (z^{theta/alpha} I_theta(z)), approached from above."""
    ta = theta / alpha
    e0 = eigenfunction(exponent, alpha)
    e1 = eigenfunction(exponent.esscher(theta), alpha)
    z, prev = 1.0, None
    for _ in range(60):
        r = math.exp(e0.log_I(z) - ta * math.log(z) - e1.log_I(z))
        if prev is not None and abs(prev - r) <= tol * r:
            return r, abs(prev - r)
        prev = r
        z *= 2.0
    raise ConvergenceError("ratio estimate of C_theta did not settle")


# --------------------------------------------------------------------------
# N

def eval_N(exponent, alpha, x, tol=TOL_SERIES, mode="best", profile=None):
    """N(x) = I(x) - C_theta x^{theta/alpha} I_theta(x).

    The double-precision difference is accepted when the predicted relative
    error ``(I / N) * err(C_theta)`` stays small and ``I / N <= COND_MAX``;
    otherwise the evaluation is redone in mpmath.
    """
    if np.ndim(x):
        return np.array([eval_N(exponent, alpha, float(v), tol, mode, profile) for v in np.ravel(x)]).reshape(
            np.shape(x))
    if x < 0:
        raise RegimeError("N is evaluated on x >= 0")
    prof = profile or _c_theta_cached(exponent, alpha, mode)
    if x == 0:
        return 1.0
    e0 = eigenfunction(exponent, alpha)
    e1 = eigenfunction(exponent.esscher(prof.theta), alpha)
    l0 = e0.log_I(x, tol)
    l1 = math.log(prof.C_theta) + prof.theta_alpha * math.log(x) + e1.log_I(x, tol)
    n = math.exp(l0) - math.exp(l1) if l0 < 709 else math.inf
    if l0 < 709 and n > 0:
        cond = math.exp(l0) / n
        if cond <= COND_MAX and cond * max(prof.error_estimate / prof.C_theta, 2e-16) < 1e-11:
            return n
    return _eval_N_mp(exponent, alpha, x, prof)


class _MpSeries:
    """I(z) for the exponent u -> psi(u + s) - psi(s) in mpmath arithmetic."""

    def __init__(self, exponent, alpha, shift, dps):
        self.exponent, self.dps = exponent, dps
        with mpmath.workdps(dps):
            self.alpha = mpmath.mpf(alpha)
            self.shift = shift
            self.base = exponent.psi_mp(shift) if shift else mpmath.mpf(0)
        self.logc = [mpmath.mpf(0)]

    def _coeff(self, n):
        while len(self.logc) <= n:
            k = len(self.logc)
            p = self.exponent.psi_mp(self.alpha * k + self.shift) - self.base
            if p <= 0:
                raise RegimeError("psi(alpha k) <= 0 in extended precision")
            self.logc.append(self.logc[-1] - mpmath.log(p))
        return self.logc[n]

    def __call__(self, z):
        with mpmath.workdps(self.dps):
            z = mpmath.mpf(z)
            if z == 0:
                return mpmath.mpf(1)
            lz = mpmath.log(z)
            tol = mpmath.mpf(10) ** (-self.dps - 3)
            s, prev, small = mpmath.mpf(0), mpmath.mpf(0), 0
            for n in range(400000):
                t = mpmath.exp(self._coeff(n) + n * lz)
                s += t
                small = small + 1 if (t < tol * s and t <= prev) else 0
                prev = t
                if small >= 3:
                    return s
        raise ConvergenceError("extended-precision series did not terminate")


@functools.lru_cache(maxsize=32)
def _mp_pair(exponent, alpha, dps):
    """(I, I_theta, theta/alpha, C_theta) at ``dps`` digits, theta refined in mpmath."""
    with mpmath.workdps(dps):
        theta = mpmath.findroot(lambda u: exponent.psi_mp(u), mpmath.mpf(exponent.cramer_root))
        ta = theta / alpha
        e0 = _MpSeries(exponent, alpha, 0, dps)
        e1 = _MpSeries(exponent, alpha, theta, dps)
        z, prev = mpmath.mpf(1), None
        target = mpmath.mpf(10) ** (-dps + 5)
        for _ in range(80):
            r = e0(z) / (z ** ta * e1(z))
            if prev is not None and abs(prev - r) < target * r:
                return e0, e1, ta, r
            prev = r
            z *= 2
    raise ConvergenceError("extended-precision C_theta did not settle")


def _eval_N_mp(exponent, alpha, x, prof):
    """Extended-precision N for arguments where I and the C_theta term nearly cancel."""
    if not exponent.has_mp:
        raise ConvergenceError(f"N({x}): cancellation exceeds double precision and family "
                               f"{exponent.family!r} has no extended-precision exponent")
    # digits lost ~ log10(I/N), and N decays at least as fast as 1/I grows
    lost = 2.0 * eigenfunction(exponent, alpha).log_I(x) / math.log(10)
    dps = 10 * (int(30 + lost) // 10 + 1)
    e0, e1, ta, C = _mp_pair(exponent, alpha, dps)
    with mpmath.workdps(dps):
        return float(e0(x) - C * mpmath.mpf(x) ** ta * e1(x))
