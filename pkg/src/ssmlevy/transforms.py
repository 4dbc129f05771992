"""Closed-form Laplace transforms built on the eigenfunction series.

Ratios of eigenfunctions are formed in the log channel, so none of these
overflow for large arguments.
"""

from __future__ import annotations

import math

from .eigenfunction_series import _c_theta_cached, eigenfunction, eval_N
from .errors import RegimeError


def _log_I(exponent, alpha, z):
    return eigenfunction(exponent, alpha).log_I(z)


def _rho(exponent, lam):
    if lam < 0:
        raise RegimeError("lambda must be >= 0")
    return exponent.phi(lam)


def _levels(x, a):
    if not 0 <= x <= a:
        raise RegimeError(f"need 0 <= x <= a, got x={x}, a={a}")


def fpt_up_laplace(exponent, alpha, q, x, a):
    """E_x[exp(-q kappa_a)] = I(q x^alpha) / I(q a^alpha)."""
    _levels(x, a)
    if q < 0:
        raise RegimeError("q must be >= 0")
    if q == 0 or x == a:
        eigenfunction(exponent, alpha)  # regime check
        return 1.0
    return math.exp(_log_I(exponent, alpha, q * x ** alpha) - _log_I(exponent, alpha, q * a ** alpha))


def fpt_joint_laplace(exponent, alpha, q, lam, x, a):
    """E_x[exp(-q kappa_a - lam A_{kappa_a})] = (x/a)^rho I_rho(q x^alpha) / I_rho(q a^alpha)."""
    _levels(x, a)
    if q < 0:
        raise RegimeError("q must be >= 0")
    eigenfunction(exponent, alpha)
    rho = _rho(exponent, lam)
    if x == 0:
        return 0.0 if rho > 0 else fpt_up_laplace(exponent, alpha, q, x, a)
    shifted = exponent.esscher(rho)
    val = rho * math.log(x / a)
    if q > 0:
        val += _log_I(shifted, alpha, q * x ** alpha) - _log_I(shifted, alpha, q * a ** alpha)
    return math.exp(val)


def levy_fpt_functional_laplace(exponent, alpha, q, lam, x, a):
    """E_x[exp(-lam tau_a - q Sigma_{tau_a})] for the Levy process started at log-level x <= a."""
    if x > a:
        raise RegimeError(f"need x <= a, got x={x}, a={a}")
    if q < 0:
        raise RegimeError("q must be >= 0")
    eigenfunction(exponent, alpha)
    rho = _rho(exponent, lam)
    shifted = exponent.esscher(rho)
    val = rho * (x - a)
    if q > 0:
        val += _log_I(shifted, alpha, q * math.exp(alpha * x)) - _log_I(shifted, alpha, q * math.exp(alpha * a))
    return math.exp(val)


def expfun_laplace(exponent, alpha, q):
    """E[exp(-q Sigma_inf)] = N(q)."""
    if q < 0:
        raise RegimeError("q must be >= 0")
    return eval_N(exponent, alpha, q)


def entrance_law_laplace(exponent, alpha, q, y, which="dual"):
    """q-potential densities of the entrance laws of the dual process."""
    if which not in ("dual", "dual_theta"):
        raise ValueError(f"unknown entrance law {which!r}")
    m = exponent.mean
    if not m < 0:
        raise RegimeError("entrance laws need mean < 0")
    n = eval_N(exponent, alpha, q * y ** alpha)
    if which == "dual":
        if math.isinf(m):
            raise RegimeError("the dual entrance law needs a finite mean")
        return n / abs(m)
    prof = _c_theta_cached(exponent, alpha, "best")
    return n / (exponent.dpsi(prof.theta) * prof.C_theta)


def selfdecomp_laplace(exponent, alpha, q):
    """1 / I(q): Laplace transform of kappa_1 under the law started at 0+."""
    if q < 0:
        raise RegimeError("q must be >= 0")
    return math.exp(-_log_I(exponent, alpha, q))


def wolfe_levy_exponent(exponent, alpha, q):
    """phi_L(q) = q I'(q) / I(q), the Laplace exponent of the background subordinator."""
    if q < 0:
        raise RegimeError("q must be >= 0")
    if q == 0:
        return 0.0
    e = eigenfunction(exponent, alpha)
    return q * math.exp(e.log_dI(q) - e.log_I(q))


def id_laplace(exponent, alpha, q, which="bare"):
    """exp(-phi_L(q)) ("bare") or exp(-phi_L(q)) / I(q) ("combined")."""
    val = -wolfe_levy_exponent(exponent, alpha, q)
    if which == "combined":
        val -= _log_I(exponent, alpha, q)
    elif which != "bare":
        raise ValueError(f"unknown variant {which!r}")
    return math.exp(val)


def hartman_ratio(exponent, alpha, lam, a, A=None, x=None, q=1.0):
    """Generalized Hartman ratio.

    Without ``x``: (a/A)^rho I_rho(a) I(A) / (I_rho(A) I(a)) for 0 < a < A.
    With ``x`` (log-levels x <= a, ``A`` unused): the transform of tau_a under
    the h-transformed law, exp(rho(x-a)) I_rho(q e^{alpha x}) I(q e^{alpha a})
    / (I_rho(q e^{alpha a}) I(q e^{alpha x})).
    """
    if not exponent.mean >= 0:
        raise RegimeError("the Hartman ratio needs mean >= 0")
    rho = _rho(exponent, lam)
    shifted = exponent.esscher(rho)
    if x is None:
        if A is None or not 0 < a < A:
            raise RegimeError(f"need 0 < a < A, got a={a}, A={A}")
        u, v, pre = a, A, rho * math.log(a / A)
    else:
        if x > a:
            raise RegimeError(f"need x <= a, got x={x}, a={a}")
        u, v, pre = q * math.exp(alpha * x), q * math.exp(alpha * a), rho * (x - a)
    return math.exp(pre + _log_I(shifted, alpha, u) + _log_I(exponent, alpha, v)
                    - _log_I(shifted, alpha, v) - _log_I(exponent, alpha, u))
