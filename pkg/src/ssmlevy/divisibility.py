"""Numerical certificates for complete monotonicity, self-decomposability and
unimodality.

A completely monotone f satisfies (-1)^n Delta_h^n f(u) >= 0 for every
spacing h > 0, since the difference equals
int exp(-u s) (1 - exp(-h s))^n mu(ds). The checks therefore use h = u on a
log grid, so that the stencil u, 2u, ..., (n+1)u scales with the point.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import mpmath
import numpy as np
from scipy import integrate

from .eigenfunction_series import _MpSeries, eigenfunction
from .errors import InversionUnstable

TOL_CM = 1e-9
TOL_INV = 1e-3
NOISE_FLOOR = 1e-13  # default relative accuracy assumed for f


@dataclass
class DivisibilityReport:
    target: str
    grid: list
    order_max: int
    margins: dict  # order -> minimum normalized signed margin
    verdict: str  # "pass" | "fail" | "inconclusive"
    warnings: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def log_grid(lo=1e-2, hi=1e2, count=25):
    return np.geomspace(lo, hi, count)


def _combine(reports, target):
    order = {"pass": 0, "inconclusive": 1, "fail": 2}
    verdict = max((r.verdict for r in reports), key=order.__getitem__)
    margins = {}
    for r in reports:
        for n, m in r.margins.items():
            margins[n] = min(margins.get(n, math.inf), m)
    warns = [w for r in reports for w in r.warnings]
    return DivisibilityReport(target, reports[0].grid, reports[0].order_max, margins, verdict, warns,
                              {r.target: r.verdict for r in reports})


def _difference_margins(f, grid, order_max, signs, noise):
    """min over the grid of sign(n) Delta^n f / (2^n max|f|), per order."""
    grid = [float(u) for u in grid]
    cache = {}

    def fv(x):
        if x not in cache:
            cache[x] = float(f(x))
        return cache[x]

    margins = {}
    noisy = 0
    for n in range(1, order_max + 1):
        worst = math.inf
        for u in grid:
            vals = [fv(u * (j + 1)) for j in range(n + 1)]
            d = math.fsum((-1) ** (n - j) * math.comb(n, j) * v for j, v in enumerate(vals))
            scale = max(abs(v) for v in vals)
            m = signs(n) * d / (2 ** n * scale) if scale > 0 else 0.0
            if abs(m) < noise:
                noisy += 1
            worst = min(worst, m)
        margins[n] = worst
    return margins, noisy


def _verdict(margins, noise, tol):
    bad = {n: m for n, m in margins.items() if m < -tol}
    if not bad:
        return "pass"
    if all(-m <= 10 * noise for m in bad.values()):
        return "inconclusive"
    return "fail"


def complete_monotonicity_check(f, grid=None, order_max=6, target="f", tol=TOL_CM, noise=NOISE_FLOOR):
    """(-1)^n Delta_u^n f(u) >= -tol (normalized) for n = 1..order_max on the grid."""
    grid = log_grid() if grid is None else np.asarray(grid, dtype=float)
    margins, noisy = _difference_margins(f, grid, order_max, lambda n: (-1) ** n, noise)
    warns = []
    if noisy:
        warns.append(f"{noisy} stencil(s) with |margin| below the noise floor {noise:g}")
    return DivisibilityReport(target, [float(g) for g in grid], order_max, margins,
                              _verdict(margins, noise, tol), warns)


def bernstein_check(phi, grid=None, order_max=5, target="phi", tol=TOL_CM, noise=NOISE_FLOOR):
    """phi >= 0 with completely monotone derivative, tested as (-1)^{n+1} Delta^n phi >= 0.

    ``order_max`` counts derivative orders of phi', so differences run to order_max + 1.
    """
    grid = log_grid() if grid is None else np.asarray(grid, dtype=float)
    margins, noisy = _difference_margins(phi, grid, order_max + 1, lambda n: (-1) ** (n + 1), noise)
    if min(float(phi(u)) for u in grid) < 0:
        margins[0] = -1.0
    warns = [f"{noisy} stencil(s) with |margin| below the noise floor {noise:g}"] if noisy else []
    return DivisibilityReport(target, [float(g) for g in grid], order_max, margins,
                              _verdict(margins, noise, tol), warns)


def selfdecomp_check(exponent, alpha, c_values=(0.25, 0.5, 0.75), grid=None, order_max=6):
    """q -> I(cq)/I(q) completely monotone for each c."""
    e = eigenfunction(exponent, alpha)
    reps = []
    for c in c_values:
        if c == 1:
            f = (lambda q: 1.0)
        else:
            f = (lambda q, c=c: math.exp(e.log_I(c * q) - e.log_I(q)))
        reps.append(complete_monotonicity_check(f, grid, order_max, target=f"I({c}q)/I(q)"))
    return _combine(reps, "selfdecomposability")


# -- Laplace inversion ------------------------------------------------------

@dataclass
class InversionGrid:
    t: list
    density: list
    error: list
    method: str
    mass: float

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)


def laplace_invert(f, t_grid, degree=32, tol_inv=TOL_INV):
    """Gaver-Stehfest inversion (mpmath) of a transform that accepts mpmath arguments.

    The error bar at each t is the difference between degree and 3/4 of it.
    """
    t_grid = [float(t) for t in t_grid]
    dens, errs = [], []
    for t in t_grid:
        d1 = float(mpmath.invertlaplace(f, t, method="stehfest", degree=degree))
        d0 = float(mpmath.invertlaplace(f, t, method="stehfest", degree=2 * ((3 * degree) // 8)))
        dens.append(d1)
        errs.append(abs(d1 - d0))
    dens_a = np.asarray(dens)
    peak = float(np.max(np.abs(dens_a))) if dens else 0.0
    mass = float(integrate.simpson(dens_a, x=t_grid)) if len(t_grid) > 2 else 0.0
    if np.any(dens_a < -tol_inv * max(peak, 1e-300) - np.asarray(errs)):
        raise InversionUnstable("inverted density is negative beyond tolerance")
    if mass > 1 + tol_inv:
        raise InversionUnstable(f"inverted mass {mass:.6g} exceeds 1")
    return InversionGrid(t_grid, dens, errs, f"gaver-stehfest-{degree}", mass)


def unimodality_check(grid: InversionGrid, max_suppressed=0.5):
    """(mode, verdict); at most one up-to-down change in the significant differences."""
    d = np.asarray(grid.density)
    e = np.asarray(grid.error)
    diffs = np.diff(d)
    noise = e[:-1] + e[1:]
    signs = [int(np.sign(x)) for x, s in zip(diffs, noise) if abs(x) > s and x != 0]
    mode = float(grid.t[int(np.argmax(d))])
    if len(diffs) == 0 or len(signs) < (1 - max_suppressed) * len(diffs):
        return mode, "inconclusive"
    changes = sum(1 for a, b in zip(signs[:-1], signs[1:]) if a > 0 > b)
    downs_then_up = sum(1 for a, b in zip(signs[:-1], signs[1:]) if a < 0 < b)
    return mode, "pass" if changes <= 1 and downs_then_up == 0 else "fail"


def mp_selfdecomp_transform(exponent, alpha, dps=60):
    """q -> 1/I(q) in mpmath arithmetic, for use with laplace_invert."""
    series = _MpSeries(exponent, alpha, 0, dps)
    return lambda q: 1 / series(q)

