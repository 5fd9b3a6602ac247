"""Gaussian densities, chi-squared quantiles and disturbance level sets.

The chi-squared layer is the regularized lower incomplete gamma function
P(n/2, x/2), computed by the classic series / continued-fraction split at
x = n + 1.  It feeds the confidence-ellipsoid construction: the set of
disturbances covering a prescribed probability mass p is the ellipsoid
whose squared radius is the chi-squared quantile at p.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .geometry import Ellipsoid

_GAMMA_EPS = 1e-16
_GAMMA_ITMAX = 600


@dataclass(frozen=True)
class GaussianDisturbance:
    """Multivariate normal disturbance with mean and SPD covariance."""

    mean: np.ndarray
    cov: np.ndarray
    _chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float).ravel()
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise ValueError("covariance shape does not match mean dimension")
        if np.abs(cov - cov.T).max() > 1e-10:
            raise ValueError("covariance must be symmetric")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as exc:
            raise ValueError("covariance must be positive definite") from exc
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "_chol", chol)

    @property
    def dim(self) -> int:
        return self.mean.size


def gaussian_pdf(d: GaussianDisturbance, s) -> float:
    """Multivariate normal density at s, via the Cholesky factor of the
    covariance."""
    s = np.asarray(s, dtype=float).ravel()
    if s.shape != d.mean.shape:
        raise ValueError("point dimension does not match disturbance")
    z = np.linalg.solve(d._chol, s - d.mean)
    logdet_half = np.log(np.diag(d._chol)).sum()
    return float(np.exp(-0.5 * z @ z - logdet_half
                        - 0.5 * d.dim * np.log(2.0 * np.pi)))


def _gammainc_series(a: float, x: float) -> float:
    # P(a, x) by power series, convergent fast for x < a + 1
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(_GAMMA_ITMAX):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gammainc_cf(a: float, x: float) -> float:
    # Q(a, x) by modified Lentz continued fraction, for x >= a + 1
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_ITMAX):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def chi2_cdf(n: int, x: float) -> float:
    """P{chi2(n) <= x}, the regularized lower incomplete gamma P(n/2, x/2)."""
    if n < 1 or int(n) != n:
        raise ValueError("degrees of freedom must be a positive integer")
    if x < 0.0:
        raise ValueError("chi-squared argument must be nonnegative")
    if x == 0.0:
        return 0.0
    a, y = 0.5 * n, 0.5 * x
    if y < a + 1.0:
        return min(1.0, _gammainc_series(a, y))
    return min(1.0, max(0.0, 1.0 - _gammainc_cf(a, y)))


def _chi2_pdf(n: int, x: float) -> float:
    if x <= 0.0:
        return 0.0
    a = 0.5 * n
    return math.exp((a - 1.0) * math.log(x) - 0.5 * x
                    - math.lgamma(a) - a * math.log(2.0))


def chi2_inv(n: int, p: float) -> float:
    """Quantile of chi2(n): the x with chi2_cdf(n, x) = p, to 1e-10.

    Bracketing bisection followed by Newton refinement; p = 0 maps to 0 and
    p >= 1 is rejected (the corresponding set would be unbounded).
    """
    if n < 1 or int(n) != n:
        raise ValueError("degrees of freedom must be a positive integer")
    if p < 0.0:
        raise ValueError("probability must be nonnegative")
    if p >= 1.0:
        raise ValueError("unreachable confidence level")
    if p == 0.0:
        return 0.0

    hi = float(max(n, 1))
    while chi2_cdf(n, hi) < p:
        hi *= 2.0
        if hi > 1e12:
            raise RuntimeError("chi2_inv bracketing failed")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if chi2_cdf(n, mid) < p:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-13 * max(1.0, hi):
            break
    x = 0.5 * (lo + hi)
    for _ in range(4):
        f = chi2_cdf(n, x) - p
        df = _chi2_pdf(n, x)
        if df <= 0.0:
            break
        step = f / df
        x_new = x - step
        if x_new <= lo or x_new >= hi:
            break
        x = x_new
        if abs(step) < 1e-14 * max(1.0, x):
            break
    return x


def disturbance_level_set(d: GaussianDisturbance, p: float) -> Ellipsoid:
    """Ellipsoid of Gaussian mass exactly p, centered at the mean.

    The standardized squared radius is the chi-squared quantile at p, so
    the covariance-shaped ellipsoid carries mass p.  A warning is emitted
    when the result does not contain the origin, since a disturbance set
    without the zero disturbance makes the robust recursion needlessly
    conservative.
    """
    r2 = chi2_inv(d.dim, p)
    ell = Ellipsoid(d.mean, d.cov, r2)
    if not ell.contains(np.zeros(d.dim)):
        warnings.warn(
            "disturbance level set does not contain the zero disturbance",
            RuntimeWarning,
            stacklevel=2,
        )
    return ell
