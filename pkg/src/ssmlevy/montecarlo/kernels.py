"""numba kernels for the Lamperti functional of a spectrally negative Levy path.

The path is advanced in Levy time by segments on which it is a Brownian
motion with drift; downward jumps of size >= eps arrive at exponential times
and are applied exactly at their arrival. Jumps below eps are folded into the
Gaussian part. Upcrossings are continuous, so a level is detected either at a
segment end or through the Brownian-bridge crossing probability.
"""

import math

import numpy as np
from numba import njit

STATUS_HIT = 0
STATUS_DEPTH = 1
STATUS_SIGMA_CAP = 2
STATUS_TIME_CAP = 3
STATUS_STEP_CAP = 4


_GL_U = np.array([0.033765242898423986, 0.16939530676686776, 0.38069040695840156,
                  0.6193095930415985, 0.8306046932331322, 0.966234757101576])
_GL_W = np.array([0.08566224618958517, 0.18038078652406933, 0.23395696728634552,
                  0.23395696728634552, 0.18038078652406933, 0.08566224618958517])


@njit(cache=True, nogil=True)
def _seg_integral(x0, x1, tau, a, var):
    # E[int_0^tau exp(a X_s) ds] for a Brownian bridge from x0 to x1 over tau
    y = a * (x1 - x0)
    v = 0.5 * a * a * var * tau
    s = 0.0
    for i in range(6):
        u = _GL_U[i]
        s += _GL_W[i] * math.exp(y * u + v * u * (1.0 - u))
    return tau * math.exp(a * x0) * s


@njit(cache=True, nogil=True)
def _jump_size(log_lam_tab, log_r_tab):
    # inverse of the tail function: Lambda(r) = U * Lambda(eps), tabulated in log-log
    target = log_lam_tab[0] + math.log(np.random.random())
    lo, hi = 0, log_lam_tab.shape[0] - 1
    if target <= log_lam_tab[hi]:
        return math.exp(log_r_tab[hi])
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if log_lam_tab[mid] >= target:
            lo = mid
        else:
            hi = mid
    w = (target - log_lam_tab[lo]) / (log_lam_tab[hi] - log_lam_tab[lo])
    return math.exp(log_r_tab[lo] + w * (log_r_tab[hi] - log_r_tab[lo]))


@njit(cache=True, nogil=True)
def run_chunk(seed, n_paths, x0, level, alpha, sign, mu, var, lam, log_lam_tab, log_r_tab,
              depth, floor, sigma_cap, time_cap, h, k_dist, tau_min, dt_max, c_var, max_steps):
    """Simulate ``n_paths`` paths; returns (status, sigma, levy_time, xi_end, steps).

    ``sign * alpha`` is the exponent rate of the integrated functional. The path
    stops at the first passage above ``level``, below ``depth``, or when a cap
    is reached. Below ``floor`` the path is returned to ``floor`` with no
    Sigma credit: upward passage is continuous, so this skips an excursion
    whose contribution to Sigma is below exp(sign * alpha * floor) times an
    O(1) variable.
    """
    np.random.seed(seed)
    status = np.empty(n_paths, np.int8)
    sig = np.empty(n_paths)
    tim = np.empty(n_paths)
    xend = np.empty(n_paths)
    steps = np.empty(n_paths, np.int64)
    a = sign * alpha
    s_ref = math.exp(a * x0)
    sd = math.sqrt(var)
    for p in range(n_paths):
        xi = x0
        S = 0.0
        T = 0.0
        st = STATUS_STEP_CAP
        n = 0
        while n < max_steps:
            n += 1
            # step size: Sigma increment about h relative to max(Sigma, exp(a x0)),
            # and keep the level a few sd away
            dt = h * max(S, s_ref) * math.exp(-a * xi)
            d = level - xi
            if var > 0.0:
                lim = (d / k_dist) ** 2 / var
                if lim < dt:
                    dt = lim
            elif mu > 0.0:
                lim = d / (k_dist * mu)
                if lim < dt:
                    dt = lim
            if var > 0.0 and a * a * var * dt > c_var:
                dt = c_var / (a * a * var)
            if dt > dt_max:
                dt = dt_max
            if dt < tau_min:
                dt = tau_min
            tau = dt
            jump = False
            if lam > 0.0:
                tj = -math.log(1.0 - np.random.random()) / lam
                if tj < tau:
                    tau = tj
                    jump = True
            x1 = xi + mu * tau + sd * math.sqrt(tau) * np.random.standard_normal()
            crossed = False
            if x1 >= level:
                crossed = True
                f = (level - xi) / (x1 - xi)
            elif var > 0.0:
                pc = math.exp(-2.0 * (level - xi) * (level - x1) / (var * tau))
                if np.random.random() < pc:
                    crossed = True
                    f = 0.5
            if crossed:
                S += _seg_integral(xi, level, f * tau, a, var)
                T += f * tau
                xi = level
                st = STATUS_HIT
                break
            S += _seg_integral(xi, x1, tau, a, var)
            T += tau
            xi = x1
            if jump:
                xi -= _jump_size(log_lam_tab, log_r_tab)
            if xi < depth:
                st = STATUS_DEPTH
                break
            if xi < floor:
                xi = floor
            if S > sigma_cap:
                st = STATUS_SIGMA_CAP
                break
            if T > time_cap:
                st = STATUS_TIME_CAP
                break
        status[p] = st
        sig[p] = S
        tim[p] = T
        xend[p] = xi
        steps[p] = n
    return status, sig, tim, xend, steps


@njit(cache=True, nogil=True)
def cms_stable(n, rho, seed):
    """Chambers-Mallows-Stuck draws of S_rho(1, beta=-1, 0) (S1 parameterisation)."""
    np.random.seed(seed)
    out = np.empty(n)
    t = math.tan(math.pi * rho / 2.0)
    b = math.atan(-t) / rho
    s = (1.0 + t * t) ** (1.0 / (2.0 * rho))
    for i in range(n):
        v = math.pi * (np.random.random() - 0.5)
        w = -math.log(1.0 - np.random.random())
        out[i] = (s * math.sin(rho * (v + b)) / math.cos(v) ** (1.0 / rho)
                  * (math.cos(v - rho * (v + b)) / w) ** ((1.0 - rho) / rho))
    return out
