"""Laplace exponents of spectrally negative Levy processes.

An exponent is evaluated as

    psi(u) = b u + (sigma / 2) u**2 + int_0^inf (exp(-u r) - 1 + u r 1{r <= 1}) nu(dr)

for u >= 0, where nu lives on (0, inf) and is the mirror image of the jump
measure. Every exponent carries an Esscher shift ``gamma_shift`` so that
``psi_gamma(u) = psi(u + gamma) - psi(gamma)`` is available without building
a new family by hand.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy import integrate, optimize, special

from .errors import ConfigError, QuadratureError, RegimeError, RootNotBracketed

TOL_ROOT = 1e-12
TOL_GEN = 1e-8

__all__ = [
    "TOL_ROOT",
    "JumpPiece",
    "LevyTriplet",
    "CharacteristicExponent",
    "BrownianDrift",
    "Stable",
    "Pochhammer",
    "Custom",
    "brownian_drift",
    "stable",
    "pochhammer",
    "custom",
    "from_spec",
    "psi_eval",
    "mean",
    "cramer_root",
    "phi_inverse",
    "esscher_shift",
    "apply_generator",
    "poch",
]


_STIRLING = (1 / 12, -1 / 360, 1 / 1260, -1 / 1680, 1 / 1188, -691 / 360360, 1 / 156)


def log_poch(x, rho):
    """log(Gamma(x + rho) / Gamma(x)) for x > 0, without the cancellation of two gammaln calls."""
    x = np.asarray(x, dtype=float)
    big = x >= 10
    out = np.empty_like(x)
    out[~big] = special.gammaln(x[~big] + rho) - special.gammaln(x[~big])
    xb = x[big]
    v = rho * np.log(xb) + (xb + rho - 0.5) * np.log1p(rho / xb) - rho
    y0, y1 = 1.0 / xb, 1.0 / (xb + rho)
    p0, p1 = y0.copy(), y1.copy()
    for c in _STIRLING:
        v += c * (p1 - p0)
        p0 *= y0 * y0
        p1 *= y1 * y1
    out[big] = v
    return out if out.ndim else float(out)


def poch(x, rho):
    """Pochhammer symbol ``Gamma(x + rho) / Gamma(x)`` for ``x + rho > 0``.

    Vanishes at the non-positive integers, where ``1/Gamma`` does.
    """
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x > 0
    out[pos] = np.exp(log_poch(x[pos], rho))
    neg = ~pos
    out[neg] = special.gamma(x[neg] + rho) * special.rgamma(x[neg])
    return out if out.ndim else float(out)


def _dpoch(x, rho):
    # d/dx Gamma(x + rho) rgamma(x); rgamma'(-n) = (-1)^n n!
    x = float(x)
    if x > 0:
        return poch(x, rho) * (special.digamma(x + rho) - special.digamma(x))
    g = special.gamma(x + rho)
    if x == round(x):
        n = int(-round(x))
        drg = (-1) ** n * math.factorial(n)
    else:
        drg = -special.digamma(x) * special.rgamma(x)
    return g * special.rgamma(x) * special.digamma(x + rho) + g * drg


def _kernel(u, r):
    """exp(-u r) - 1 + u r, accurate for small u r."""
    y = u * r
    if y < 1e-3:
        return y * y * (0.5 - y * (1.0 / 6.0 - y / 24.0))
    return math.expm1(-y) + y


def _quad(fun, lo, hi, what, epsrel=1e-11, points=None):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        kw = {} if points is None or math.isinf(hi) else {"points": points}
        val, err = integrate.quad(fun, lo, hi, limit=400, epsabs=1e-300, epsrel=epsrel, **kw)
    if not np.isfinite(val) or err > max(1e-7 * abs(val), 1e-13):
        raise QuadratureError(f"quadrature for {what} did not converge (err={err:.3g})", (lo, hi))
    return val


@dataclass(frozen=True)
class JumpPiece:
    """One closed-form piece of a custom jump density on ``[lo, hi)``.

    kind ``"exponential"``: ``c exp(-lam r)``; ``"power"``: ``c r^(-1-a) exp(-lam r)``
    with ``a < 2``; ``"polynomial"``: ``sum_k c_k r^k`` on a bounded interval.
    """

    kind: str
    c: float = 1.0
    a: float = 0.0
    lam: float = 0.0
    coeffs: tuple = ()
    lo: float = 0.0
    hi: float = math.inf

    def __post_init__(self):
        if self.kind not in ("exponential", "power", "polynomial"):
            raise ConfigError(f"nu piece: unknown kind {self.kind!r}")
        if not (0 <= self.lo < self.hi):
            raise ConfigError(f"nu piece: bad support [{self.lo}, {self.hi})")
        if self.kind == "power" and self.a >= 2:
            raise ConfigError("nu piece: power exponent a must be < 2")
        if math.isinf(self.hi):
            if self.kind == "polynomial":
                raise ConfigError("nu piece: polynomial pieces need bounded support")
            if self.lam <= 0 and not (self.kind == "power" and self.a > 0):
                raise ConfigError("nu piece: infinite mass at infinity")
        if self.c < 0 and self.kind != "polynomial":
            raise ConfigError("nu piece: negative density")

    def density(self, r):
        r = np.asarray(r, dtype=float)
        inside = (r >= self.lo) & (r < self.hi)
        rr = np.where(inside, r, 1.0)
        if self.kind == "exponential":
            val = self.c * np.exp(-self.lam * rr)
        elif self.kind == "power":
            val = self.c * rr ** (-1.0 - self.a) * np.exp(-self.lam * rr)
        else:
            val = np.polynomial.polynomial.polyval(rr, self.coeffs)
        return np.where(inside, val, 0.0)

    def heavy_tail(self):
        """True when int_1^inf r nu(dr) diverges."""
        return math.isinf(self.hi) and self.kind == "power" and self.lam <= 0 and self.a <= 1

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        try:
            kind = d.pop("kind")
        except KeyError:
            raise ConfigError("nu piece: missing field 'kind'") from None
        hi = d.pop("hi", math.inf)
        coeffs = tuple(d.pop("coeffs", ()))
        try:
            return cls(kind=kind, hi=math.inf if hi is None else float(hi), coeffs=coeffs,
                       **{k: float(v) for k, v in d.items()})
        except TypeError as exc:
            raise ConfigError(f"nu piece: {exc}") from None

    def to_dict(self):
        d = {"kind": self.kind, "c": self.c, "lo": self.lo, "hi": None if math.isinf(self.hi) else self.hi}
        if self.kind == "power":
            d.update(a=self.a, lam=self.lam)
        elif self.kind == "exponential":
            d.update(lam=self.lam)
        else:
            d.update(coeffs=list(self.coeffs))
        return d


@dataclass(frozen=True)
class LevyTriplet:
    b: float
    sigma: float
    nu: object  # callable density on (0, inf), or None
    family_tag: str

    def nu_density(self, r):
        if self.nu is None:
            return np.zeros_like(np.asarray(r, dtype=float))
        return self.nu(r)


class CharacteristicExponent:
    """Base class. Subclasses provide the unshifted exponent ``_psi0`` and friends."""

    family = "custom"
    has_mp = False

    def __init__(self, gamma_shift=0.0):
        if gamma_shift < 0:
            raise ConfigError("gamma_shift must be >= 0")
        self.gamma_shift = float(gamma_shift)
        self._psi0_at_shift = float(self._psi0(self.gamma_shift)) if self.gamma_shift else 0.0

    # -- subclass hooks -------------------------------------------------
    def _params(self):
        raise NotImplementedError

    def _psi0(self, u):
        raise NotImplementedError

    def _dpsi0(self, u):
        raise NotImplementedError

    def _log_psi0(self, u):
        return np.log(self._psi0(u))

    def _psi0_mp(self, u):
        raise NotImplementedError(f"no extended-precision exponent for family {self.family!r}")

    def _nu0(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    _b0 = 0.0
    _sigma0 = 0.0
    _has_jumps = False

    def _rv0(self):
        return None

    # -- identity ---------------------------------------------------------
    def _key(self):
        return (type(self).__name__, self._params(), self.gamma_shift)

    def __eq__(self, other):
        return isinstance(other, CharacteristicExponent) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        p = ", ".join(f"{k}={v!r}" for k, v in self.to_spec().items() if k != "family")
        s = f", gamma_shift={self.gamma_shift!r}" if self.gamma_shift else ""
        return f"{type(self).__name__}({p}{s})"

    # -- evaluation -------------------------------------------------------
    def psi(self, u):
        """psi_gamma(u) for scalar or array ``u >= 0``."""
        s = self.gamma_shift
        if s == 0.0:
            return self._psi0(u)
        return self._psi0(np.asarray(u, dtype=float) + s) - self._psi0_at_shift if np.ndim(u) else \
            float(self._psi0(float(u) + s) - self._psi0_at_shift)

    __call__ = psi

    def log_psi(self, u):
        """log psi_gamma(u); only meaningful where psi_gamma(u) > 0."""
        s = self.gamma_shift
        u = np.asarray(u, dtype=float)
        if s == 0.0 or self._psi0_at_shift == 0.0:
            return self._log_psi0(u + s)
        lp = self._log_psi0(u + s)
        return lp + np.log1p(-self._psi0_at_shift * np.exp(-lp))

    def dpsi(self, u):
        return self._dpsi0(u + self.gamma_shift)

    def psi_mp(self, u):
        s = mpmath.mpf(self.gamma_shift)
        if self.gamma_shift == 0.0:
            return self._psi0_mp(mpmath.mpf(u))
        return self._psi0_mp(mpmath.mpf(u) + s) - self._psi0_mp(s)

    def nu_density(self, r):
        r = np.asarray(r, dtype=float)
        base = self._nu0(r)
        return base * np.exp(-self.gamma_shift * r) if self.gamma_shift else base

    @property
    def sigma(self):
        return self._sigma0

    @functools.cached_property
    def b(self):
        """Drift in the truncated (1{r <= 1}) Levy-Khintchine form."""
        s = self.gamma_shift
        b = self._b0 + self._sigma0 * s
        if s and self._has_jumps:
            b += _quad(lambda r: r * -math.expm1(-s * r) * float(self._nu0(r)), 0.0, 1.0, "shift drift")
        return b

    @property
    def triplet(self):
        return LevyTriplet(self.b, self.sigma, self.nu_density if self._has_jumps else None, self.family)

    # -- scalar analysis -----------------------------------------------
    @functools.cached_property
    def mean(self):
        """E[xi_1] = psi'(0+), possibly -inf."""
        return float(self.dpsi(0.0))

    @functools.cached_property
    def cramer_root(self):
        """Positive root of psi, present iff the mean is negative."""
        if self.mean >= 0:
            return None
        hi = 1.0
        for _ in range(200):
            if self.psi(hi) > 0:
                break
            hi *= 2.0
        else:
            raise RootNotBracketed("psi never became positive; inconsistent triplet?")
        res = optimize.minimize_scalar(lambda u: float(self.psi(u)), bounds=(0.0, hi), method="bounded",
                                       options={"xatol": 1e-10 * hi})
        lo = res.x
        if self.psi(lo) >= 0:
            lo = hi * 1e-9
            while self.psi(lo) >= 0 and lo > 1e-300:
                lo *= 0.5
        theta = optimize.brentq(lambda u: float(self.psi(u)), lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
        if abs(self.psi(theta)) > TOL_ROOT * max(1.0, abs(self.dpsi(theta)) * theta):
            raise RootNotBracketed(f"|psi(theta)| too large at theta={theta}")
        return theta

    def phi(self, lam):
        """Inverse of psi on [max(theta, 0), inf)."""
        if np.ndim(lam):
            return np.array([self.phi(float(v)) for v in np.ravel(lam)]).reshape(np.shape(lam))
        lam = float(lam)
        if lam < 0:
            raise RegimeError("phi is defined for lambda >= 0")
        lo = max(self.cramer_root or 0.0, 0.0)
        if lam == 0.0:
            return lo
        hi = max(2.0 * lo, 1.0)
        while self.psi(hi) < lam:
            hi *= 2.0
            if hi > 1e300:
                raise RootNotBracketed("phi: could not bracket")
        return optimize.brentq(lambda u: float(self.psi(u)) - lam, lo, hi, xtol=1e-15,
                               rtol=1e-15, maxiter=500)

    def esscher(self, gamma):
        """Exponent with psi(u + gamma) - psi(gamma) applied on top of the current shift."""
        if gamma < 0:
            raise RegimeError("Esscher parameter must be >= 0")
        if gamma == 0:
            return self
        return self._with_shift(self.gamma_shift + gamma)

    def _with_shift(self, total):
        raise NotImplementedError

    @functools.cached_property
    def regular_variation(self):
        """(beta, l_beta, estimated) with psi(u) ~ l_beta u^(1 + beta) at infinity."""
        rv = self._rv0()
        if rv is not None:
            return rv[0], rv[1], False
        u1, u2 = 1e3, 1e6
        slope = math.log(self.psi(u2) / self.psi(u1)) / math.log(u2 / u1)
        beta = min(max(slope - 1.0, 0.0), 1.0)
        return beta, float(self.psi(u2)) / u2 ** (1.0 + beta), True

    def check_admissible(self, alpha):
        """Raise unless mean >= 0, or mean < 0 with theta < alpha."""
        if self.mean < 0 and not self.cramer_root < alpha:
            raise RegimeError(f"theta={self.cramer_root:.6g} >= alpha={alpha}: series not admissible")

    def to_spec(self):
        raise NotImplementedError


class BrownianDrift(CharacteristicExponent):
    """psi(u) = (sigma/2) u^2 + gamma u."""

    family = "brownian_drift"
    has_mp = True

    def __init__(self, gamma=0.0, sigma=1.0, gamma_shift=0.0):
        if sigma <= 0:
            raise ConfigError("brownian_drift: sigma must be > 0")
        self.drift, self._sigma0, self._b0 = float(gamma), float(sigma), float(gamma)
        super().__init__(gamma_shift)

    def _params(self):
        return (self.drift, self._sigma0)

    def _psi0(self, u):
        return 0.5 * self._sigma0 * u * u + self.drift * u

    def _dpsi0(self, u):
        return self._sigma0 * u + self.drift

    def _psi0_mp(self, u):
        return self._sigma0 * u * u / 2 + self.drift * u

    def _rv0(self):
        return 1.0, 0.5 * self._sigma0

    def _with_shift(self, total):
        return BrownianDrift(self.drift, self._sigma0, total)

    def to_spec(self):
        d = {"family": "brownian_drift", "gamma": self.drift}
        if self._sigma0 != 1.0:
            d["sigma"] = self._sigma0
        return d


class Stable(CharacteristicExponent):
    """Tempered (Esscher-transformed) spectrally negative stable: c((u+g)^rho - g^rho)."""

    family = "stable"
    has_mp = True
    _has_jumps = True

    def __init__(self, rho, c=1.0, gamma=0.0, gamma_shift=0.0):
        if not 1 < rho < 2:
            raise ConfigError("stable: rho must lie in (1, 2)")
        if c <= 0 or gamma < 0:
            raise ConfigError("stable: need c > 0 and gamma >= 0")
        self.rho, self.c, self.tilt = float(rho), float(c), float(gamma)
        self.nu_const = self.c * self.rho * (self.rho - 1) / special.gamma(2 - self.rho)
        super().__init__(gamma_shift)

    def _params(self):
        return (self.rho, self.c, self.tilt)

    def _psi0(self, u):
        return self.c * ((u + self.tilt) ** self.rho - self.tilt ** self.rho)

    def _log_psi0(self, u):
        if self.tilt == 0:
            return math.log(self.c) + self.rho * np.log(u)
        return np.log(self._psi0(u))

    def _dpsi0(self, u):
        if u + self.tilt == 0:
            return 0.0
        return self.c * self.rho * (u + self.tilt) ** (self.rho - 1)

    def _psi0_mp(self, u):
        return self.c * ((u + self.tilt) ** self.rho - mpmath.mpf(self.tilt) ** self.rho)

    def _nu0(self, r):
        r = np.asarray(r, dtype=float)
        return self.nu_const * np.exp(-self.tilt * r) * r ** (-self.rho - 1)

    @functools.cached_property
    def _b0(self):
        tail = _quad(lambda r: r * float(self._nu0(r)), 1.0, math.inf, "stable tail mean")
        return float(self._dpsi0(0.0)) + tail

    def _rv0(self):
        return self.rho - 1.0, self.c

    def _with_shift(self, total):
        return Stable(self.rho, self.c, self.tilt, total)

    def to_spec(self):
        return {"family": "stable", "rho": self.rho, "c": self.c, "gamma": self.tilt}


class Pochhammer(CharacteristicExponent):
    """psi(u) = ((beta u + gamma - 1)_rho - (gamma - 1)_rho) / rho.

    The scale ``beta`` acts inside the argument; this is the exponent the
    eigenfunction coefficients are built from.
    """

    family = "pochhammer"
    has_mp = True
    _has_jumps = True
    _sigma0 = 0.0

    def __init__(self, rho, beta=1.0, gamma=0.0, gamma_shift=0.0):
        if not 1 < rho < 2:
            raise ConfigError("pochhammer: rho must lie in (1, 2)")
        if beta <= 0:
            raise ConfigError("pochhammer: beta must be > 0")
        if gamma <= 1 - rho:
            raise ConfigError(f"pochhammer: gamma must exceed 1 - rho = {1 - rho}")
        self.rho, self.scale, self.gam = float(rho), float(beta), float(gamma)
        self._p0 = poch(self.gam - 1.0, self.rho)
        self.nu_const = (self.rho - 1) / (self.scale * special.gamma(2 - self.rho))
        super().__init__(gamma_shift)

    def _params(self):
        return (self.rho, self.scale, self.gam)

    def _psi0(self, u):
        return (poch(self.scale * np.asarray(u, dtype=float) + self.gam - 1.0, self.rho) - self._p0) / self.rho \
            if np.ndim(u) else float((poch(self.scale * u + self.gam - 1.0, self.rho) - self._p0) / self.rho)

    def _log_psi0(self, u):
        x = self.scale * np.asarray(u, dtype=float) + self.gam - 1.0
        if np.all(x > 0):
            lp = log_poch(x, self.rho)
            if self._p0 == 0.0:
                return lp - math.log(self.rho)
            return lp + np.log1p(-self._p0 * np.exp(-lp)) - math.log(self.rho)
        return np.log(self._psi0(u))

    def _dpsi0(self, u):
        return self.scale / self.rho * _dpoch(self.scale * u + self.gam - 1.0, self.rho)

    def _psi0_mp(self, u):
        rho = mpmath.mpf(self.rho)
        x = self.scale * u + self.gam - 1
        x0 = mpmath.mpf(self.gam) - 1
        return (mpmath.gamma(x + rho) * mpmath.rgamma(x) - mpmath.gamma(x0 + rho) * mpmath.rgamma(x0)) / rho

    def _nu0(self, r):
        r = np.asarray(r, dtype=float)
        y = r / self.scale
        return self.nu_const * np.exp(-(self.rho + self.gam - 1) * y) / (-np.expm1(-y)) ** (self.rho + 1)

    @functools.cached_property
    def _b0(self):
        tail = _quad(lambda r: r * float(self._nu0(r)), 1.0, math.inf, "pochhammer tail mean")
        return float(self._dpsi0(0.0)) + tail

    def _rv0(self):
        return self.rho - 1.0, self.scale ** self.rho / self.rho

    def _with_shift(self, total):
        return Pochhammer(self.rho, self.scale, self.gam, total)

    def to_spec(self):
        return {"family": "pochhammer", "rho": self.rho, "beta": self.scale, "gamma": self.gam}


class Custom(CharacteristicExponent):
    """User triplet with a piecewise closed-form jump density."""

    family = "custom"

    def __init__(self, b, sigma=0.0, pieces=(), gamma_shift=0.0):
        self._b0, self._sigma0 = float(b), float(sigma)
        self.pieces = tuple(p if isinstance(p, JumpPiece) else JumpPiece.from_dict(p) for p in pieces)
        self._has_jumps = bool(self.pieces)
        if self._sigma0 < 0:
            raise ConfigError("custom: sigma must be >= 0")
        small = sum(self._piece_int(p, lambda r: min(1.0, r * r)) for p in self.pieces)
        if not math.isfinite(small):
            raise ConfigError("custom: int (1 ^ r^2) nu(dr) diverges")
        if self._sigma0 == 0:
            if not self.pieces:
                raise ConfigError("custom: degenerate exponent (no Gaussian part, no jumps)")
            fv = all(not (p.kind == "power" and p.lo == 0 and p.a >= 1) for p in self.pieces)
            if fv:
                drift = self._b0 + sum(self._piece_int(p, lambda r: r, 0.0, 1.0) for p in self.pieces)
                if drift <= 0:
                    raise RegimeError("custom: exponent of the negative of a subordinator is excluded")
        self._points = sorted({1.0} | {p.lo for p in self.pieces if p.lo > 0}
                              | {p.hi for p in self.pieces if math.isfinite(p.hi)})
        super().__init__(gamma_shift)

    def _params(self):
        return (self._b0, self._sigma0, self.pieces)

    @staticmethod
    def _piece_int(p, g, lo=0.0, hi=math.inf, cuts=()):
        lo, hi = max(lo, p.lo), min(hi, p.hi)
        if lo >= hi:
            return 0.0
        edges = [lo] + sorted(c for c in cuts if lo < c < hi) + [hi]
        return sum(_quad(lambda r: g(r) * float(p.density(r)), e0, e1, f"{p.kind} piece")
                   for e0, e1 in zip(edges[:-1], edges[1:]))

    def _jump_int(self, g, lo=0.0, hi=math.inf, scale=None):
        # scale: the 1/u length scale of the integrand, used to place breakpoints
        cuts = () if scale is None else tuple(scale * 10.0 ** k for k in range(-1, 4))
        return sum(self._piece_int(p, g, lo, hi, cuts) for p in self.pieces)

    def _psi0(self, u):
        if np.ndim(u):
            return np.array([self._psi0(float(v)) for v in np.ravel(u)]).reshape(np.shape(u))
        u = float(u)
        if u == 0.0:
            return 0.0
        val = self._b0 * u + 0.5 * self._sigma0 * u * u
        if self.pieces:
            val += self._jump_int(lambda r: _kernel(u, r), 0.0, 1.0, 1.0 / u)
            val += self._jump_int(lambda r: math.expm1(-u * r), 1.0, math.inf, 1.0 / u)
        return val

    def _dpsi0(self, u):
        if u == 0 and any(p.heavy_tail() for p in self.pieces):
            return -math.inf
        val = self._b0 + self._sigma0 * u
        if self.pieces:
            sc = 1.0 / u if u > 0 else None
            val += self._jump_int(lambda r: -r * math.expm1(-u * r), 0.0, 1.0, sc)
            val -= self._jump_int(lambda r: r * math.exp(-u * r), 1.0, math.inf, sc)
        return val

    def _nu0(self, r):
        r = np.asarray(r, dtype=float)
        return sum((p.density(r) for p in self.pieces), np.zeros_like(r))

    def _with_shift(self, total):
        return Custom(self._b0, self._sigma0, self.pieces, total)

    def to_spec(self):
        return {"family": "custom", "b": self._b0, "sigma": self._sigma0,
                "nu": [p.to_dict() for p in self.pieces]}


# -- functional interface --------------------------------------------------

def brownian_drift(gamma=0.0, sigma=1.0):
    return BrownianDrift(gamma, sigma)


def stable(rho, c=1.0, gamma=0.0):
    return Stable(rho, c, gamma)


def pochhammer(rho, beta=1.0, gamma=0.0):
    return Pochhammer(rho, beta, gamma)


def custom(b, sigma=0.0, nu=()):
    return Custom(b, sigma, nu)


_FAMILIES = {
    "brownian_drift": (BrownianDrift, {"gamma": 0.0, "sigma": 1.0}),
    "brownian": (BrownianDrift, {"gamma": 0.0, "sigma": 1.0}),
    "stable": (Stable, {"rho": None, "c": 1.0, "gamma": 0.0}),
    "pochhammer": (Pochhammer, {"rho": None, "beta": 1.0, "gamma": 0.0}),
}


def from_spec(spec):
    """Build an exponent from the JSON family document."""
    if not isinstance(spec, dict) or "family" not in spec:
        raise ConfigError("family spec: missing field 'family'")
    spec = dict(spec)
    fam = spec.pop("family")
    shift = float(spec.pop("gamma_shift", 0.0))
    if fam == "custom":
        unknown = set(spec) - {"b", "sigma", "nu"}
        if unknown:
            raise ConfigError(f"family spec: unknown field {sorted(unknown)[0]!r}")
        if "b" not in spec:
            raise ConfigError("family spec: missing field 'b'")
        exp = Custom(float(spec["b"]), float(spec.get("sigma", 0.0)), spec.get("nu", ()))
    else:
        if fam not in _FAMILIES:
            raise ConfigError(f"family spec: unknown family {fam!r}")
        cls, defaults = _FAMILIES[fam]
        unknown = set(spec) - set(defaults)
        if unknown:
            raise ConfigError(f"family spec: unknown field {sorted(unknown)[0]!r}")
        kw = {}
        for name, default in defaults.items():
            if name in spec and spec[name] is not None:
                try:
                    kw[name] = float(spec[name])
                except (TypeError, ValueError):
                    raise ConfigError(f"family spec: field {name!r} is not a number") from None
            elif default is None:
                raise ConfigError(f"family spec: missing field {name!r}")
            else:
                kw[name] = default
        exp = cls(**kw)
    return exp.esscher(shift) if shift else exp


def psi_eval(exp, u):
    if np.any(np.asarray(u) < 0):
        raise RegimeError("psi is evaluated on u >= 0")
    return exp.psi(u)


def mean(exp):
    return exp.mean


def cramer_root(exp):
    return exp.cramer_root


def phi_inverse(exp, lam):
    return exp.phi(lam)


def esscher_shift(exp, gamma):
    return exp.esscher(gamma)


def apply_generator(f, df, d2f, x, exp, alpha, r_taylor=1e-5, epsrel=1e-11):
    """Characteristic operator of the self-similar process applied to ``f`` at ``x > 0``.

    In logarithmic coordinates ``g(s) = f(x e^s)`` this is the Levy generator
    ``b g' + (sigma/2) g'' + int (g(-r) - g(0) + r g'(0) 1{r<=1}) nu(dr)``
    scaled by ``x^-alpha``. Below ``r_taylor`` the jump integrand is replaced
    by ``r^2 g''(0) / 2``.
    """
    if x <= 0:
        raise RegimeError("generator is applied at x > 0")
    fx, d1, d2 = f(x), df(x), d2f(x)
    g1 = x * d1
    g2 = x * x * d2 + g1
    val = exp.b * g1 + 0.5 * exp.sigma * g2
    if exp._has_jumps:
        nu = exp.nu_density
        s2 = _quad(lambda r: r * r * float(nu(r)), 0.0, r_taylor, "small-jump variance")
        val += 0.5 * g2 * s2
        val += _quad(lambda r: (f(x * math.exp(-r)) - fx + g1 * r) * float(nu(r)), r_taylor, 1.0,
                     "generator jumps (small)", epsrel=epsrel)
        val += _quad(lambda r: (f(x * math.exp(-r)) - fx) * float(nu(r)), 1.0, math.inf,
                     "generator jumps (large)", epsrel=epsrel)
    return x ** (-alpha) * val
