"""Distance distributions and order-statistic moments.

For every registered spec the distance ``R = |X - x0|`` has a closed-form CDF
``F``.  The ``(k+1)``-th smallest distance is ``F^{-1}(U)`` with
``U ~ Beta(k + 1, n - k)``, which is how the joint engines mix over it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, special, stats

from .dgp import DgpSpec

__all__ = [
    "RadiusLaw",
    "radius_law",
    "r_order_density",
    "r_order_beta",
    "uniform_order_moment",
    "unit_ball_volume",
]


def unit_ball_volume(d: int) -> float:
    """pi^(d/2) / Gamma(d/2 + 1), by the two-step recursion so V_1 = 2 exactly."""
    if d <= 0:
        return 1.0
    if d == 1:
        return 2.0
    return 2.0 * math.pi / d * unit_ball_volume(d - 2)


@dataclass(frozen=True)
class RadiusLaw:
    """CDF of the distance to ``x0`` together with its local power sandwich.

    ``c_low * r**d <= F(r) <= c_high * r**d`` holds on ``(0, r1)``.
    """

    cdf: Callable[[np.ndarray], np.ndarray]
    quantile: Callable[[np.ndarray], np.ndarray]
    pdf: Callable[[np.ndarray], np.ndarray]
    r_max: float
    d: int
    c_low: float
    c_high: float
    r1: float

    def __call__(self, r):
        return self.cdf(r)


def _power_law(scale: float, d: int, r_max: float, g0: float, c_x0: float,
               c_g: float, r1: float) -> RadiusLaw:
    """F(r) = min(1, (r / scale)^d): uniform X on a ball, orthant-ball or interval."""

    inv = 1.0 / scale

    def cdf(r):
        r = np.asarray(r, dtype=float)
        return np.clip(r * inv, 0.0, 1.0) ** d

    def quantile(u):
        u = np.asarray(u, dtype=float)
        return scale * np.clip(u, 0.0, 1.0) ** (1.0 / d)

    def pdf(r):
        r = np.asarray(r, dtype=float)
        inside = (r > 0) & (r < scale)
        return np.where(inside, d * np.clip(r, 0, scale) ** (d - 1) / scale**d, 0.0)

    vd = unit_ball_volume(d)
    return RadiusLaw(cdf, quantile, pdf, r_max, d,
                     c_low=0.5 * g0 * c_x0, c_high=(g0 + c_g * r1) * vd, r1=r1)


def _orthant_cube_volume(r: float, d: int) -> float:
    """Vol({x in [0,1]^d : |x| < r}) for any r >= 0."""
    if r <= 0:
        return 0.0
    if d == 1:
        return min(r, 1.0)
    if r <= 1.0:
        return unit_ball_volume(d) * r**d / 2**d
    if r >= math.sqrt(d):
        return 1.0
    top = min(r, 1.0)
    val, _ = integrate.quad(lambda t: _orthant_cube_volume(math.sqrt(max(r * r - t * t, 0.0)), d - 1),
                            0.0, top, epsabs=1e-13, epsrel=1e-12, limit=200)
    return val


def _gaussian_boundary_law(d: int) -> RadiusLaw:
    if d == 1:
        return _power_law(1.0, 1, 1.0, 1.0, 1.0, 0.0, 1.0)
    # inside the unit cube the orthant ball is exact; beyond it integrate slices
    vd = unit_ball_volume(d)
    scale = 2.0 / vd ** (1.0 / d)
    base = _power_law(scale, d, math.sqrt(d), 1.0, 2.0**-d * vd, 0.0, 1.0)

    def cdf(r):
        r = np.asarray(r, dtype=float)
        flat = r.reshape(-1)
        out = np.array([_orthant_cube_volume(float(v), d) if v > 1 else float(base.cdf(v))
                        for v in flat])
        return out.reshape(r.shape)

    def pdf(r):
        r = np.asarray(r, dtype=float)
        h = 1e-6
        return np.where(r <= 1, base.pdf(r), (cdf(r + h) - cdf(r - h)) / (2 * h))

    def quantile(u):
        u = np.asarray(u, dtype=float)
        from scipy.optimize import brentq

        flat = u.reshape(-1)
        f1 = float(base.cdf(1.0))
        out = [float(base.quantile(v)) if v <= f1 else
               brentq(lambda s: float(cdf(s)) - v, 1.0, math.sqrt(d), xtol=1e-14)
               for v in flat]
        return np.array(out).reshape(u.shape)

    # g = 1 on the cube, the orthant covers 2^-d of the ball; C_L uses the
    # proof's g(x0)/2 * C_x0 with C_x0 = 2^-d
    return RadiusLaw(cdf, quantile, pdf, math.sqrt(d), d,
                     c_low=0.5 * 2.0**-d * vd, c_high=vd, r1=1.0)


def radius_law(spec: DgpSpec) -> RadiusLaw:
    """Closed-form law of ``R = |X - x0|`` for a registered spec."""
    d = spec.d
    vd = unit_ball_volume(d)
    fam = spec.family
    rt = spec.r_tilde
    if fam == "gaussian_boundary":
        return _gaussian_boundary_law(d)
    if fam == "gaussian_interior":
        return _power_law(0.5, 1, 0.5, 1.0, 2.0, 0.0, 0.5)
    if fam == "log_correction":
        g0 = 1.0 / (vd * rt**d)
        return _power_law(rt, d, rt, g0, vd, 0.0, min(rt, 1.0))
    if fam == "cubic_support" or (fam == "holder_twopoint" and spec.params["interior"]):
        g0 = 1.0 / (2 * rt)
        return _power_law(rt, 1, rt, g0, 2.0, 0.0, min(rt, 1.0))
    if fam == "holder_twopoint":
        g0 = 1.0 / rt
        return _power_law(rt, 1, rt, g0, 1.0, 0.0, min(rt, 1.0))
    if fam == "null_twopoint":
        return _power_law(1.0, 1, 1.0, 1.0, 1.0, 0.0, 1.0)
    raise ValueError(f"no radius law for family {fam!r}")


def r_order_beta(n: int, k: int) -> stats.rv_continuous:
    """Law of ``F(R_(k+1))``, the (k+1)-th uniform order statistic of n."""
    if not 1 <= k < n:
        raise ValueError("need 1 <= k < n; k = n leaves R_(k+1) undefined")
    return stats.beta(k + 1, n - k)


def r_order_density(spec: DgpSpec, n: int, k: int) -> Callable[[np.ndarray], np.ndarray]:
    """Density of ``R_(k+1)``: beta_pdf(F(r); k+1, n-k) * F'(r)."""
    law = radius_law(spec)
    beta = r_order_beta(n, k)

    def density(r):
        r = np.asarray(r, dtype=float)
        return beta.pdf(law.cdf(r)) * law.pdf(r)

    return density


def uniform_order_moment(m: float, k: int, n: int) -> float:
    """E[U_(k:n)^m] = Gamma(m+k) Gamma(n+1) / (Gamma(k) Gamma(m+n+1))."""
    if not m > 0:
        raise ValueError("m must be positive")
    if not (1 <= k <= n):
        raise ValueError("need 1 <= k <= n")
    # Pochhammer ratios avoid the cancellation of four large log-gammas
    val = special.poch(k, m) / special.poch(n + 1, m)
    if np.isfinite(val) and val > 0:
        return float(val)
    return float(np.exp(special.gammaln(m + k) - special.gammaln(k)
                        - special.gammaln(m + n + 1) + special.gammaln(n + 1)))
