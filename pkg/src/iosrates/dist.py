"""Hellinger and total-variation distances, marginal and joint.

Conventions: ``H^2(P, Q) = 1/2 * int (sqrt p - sqrt q)^2`` so that H lies in
[0, 1] and ``H^2 <= TV <= sqrt(2) H``; ``TV = 1/2 * int |p - q|``.

The joint engines compare the law of the k induced order statistics with the
k-fold product of the target.  Conditionally on the (k+1)-th distance being
``r`` the k selected outcomes are i.i.d. from the ball law ``P_r``, so the joint
law is a mixture of products over ``U = F(R_(k+1)) ~ Beta(k + 1, n - k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, optimize, special, stats

from . import dgp as _dgp
from .dgp import ConditionalLaw, DgpSpec
from .ordstat import r_order_beta, radius_law

__all__ = [
    "DistanceEstimate",
    "hellinger",
    "total_variation",
    "tensorize_hellinger",
    "twopoint_distance",
    "marginal_distance",
    "joint_distance_exact",
    "joint_distance_bound",
    "local_expansion_check",
    "qmd_remainder",
]

METRICS = ("h", "tv")
_QUAD_TOL = 1e-10


def _metric(metric: str) -> str:
    m = metric.lower()
    if m in ("h", "hellinger"):
        return "h"
    if m in ("tv", "total_variation"):
        return "tv"
    raise ValueError(f"unknown metric {metric!r}")


@dataclass(frozen=True)
class DistanceEstimate:
    """A distance value with the method used and a numerical error bound."""

    value: float
    metric: str
    method: str
    err: float = 0.0
    detail: str = ""

    def __post_init__(self):
        if not (-1e-15 <= self.value <= 1 + 1e-15):
            raise ValueError(f"distance {self.value} outside [0, 1]")
        if self.err < 0:
            raise ValueError("err must be non-negative")
        object.__setattr__(self, "value", float(min(max(self.value, 0.0), 1.0)))

    def to_dict(self) -> dict:
        return {"value": self.value, "metric": self.metric, "method": self.method,
                "err": self.err, "detail": self.detail}

    def __float__(self):
        return self.value


# ---------------------------------------------------------------------------
# elementary pieces


def _sq_sqrt_diff(p, q):
    """(sqrt p - sqrt q)^2 written as (p - q)^2 / (sqrt p + sqrt q)^2."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    den = (np.sqrt(p) + np.sqrt(q)) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(den > 0, (p - q) ** 2 / np.where(den > 0, den, 1.0), 0.0)
    return out


def twopoint_distance(pi0, delta, metric: str):
    """Distance between Bernoulli(pi0) and Bernoulli(pi0 + delta), vectorized.

    Working with ``delta`` directly avoids cancellation when it is tiny.
    """
    metric = _metric(metric)
    pi0 = np.asarray(pi0, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if metric == "tv":
        return np.abs(delta)
    p1 = pi0 + delta
    d1 = (np.sqrt(p1) + np.sqrt(pi0)) ** 2
    d0 = (np.sqrt(1 - p1) + np.sqrt(1 - pi0)) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        t1 = np.where(d1 > 0, delta**2 / np.where(d1 > 0, d1, 1.0), 0.0)
        t0 = np.where(d0 > 0, delta**2 / np.where(d0 > 0, d0, 1.0), 0.0)
    return np.sqrt(0.5 * (t1 + t0))


def tensorize_hellinger(h2_marginal: float, k: int) -> float:
    """H^2(P^k, Q^k) = 1 - (1 - H^2(P, Q))^k."""
    if not 0 <= h2_marginal <= 1:
        raise ValueError("h2_marginal must lie in [0, 1]")
    if k < 1:
        raise ValueError("k must be >= 1")
    if h2_marginal == 1:
        return 1.0
    return float(-math.expm1(k * math.log1p(-h2_marginal)))


# ---------------------------------------------------------------------------
# law-level distances


def _discrete_pair(p: ConditionalLaw, q: ConditionalLaw):
    sp = np.asarray(p.support, dtype=float).reshape(len(p.pmf), -1)
    sq = np.asarray(q.support, dtype=float).reshape(len(q.pmf), -1)
    if sp.shape != sq.shape or not np.array_equal(sp, sq):
        raise ValueError("discrete laws must share the same support points")
    return np.asarray(p.pmf, dtype=float), np.asarray(q.pmf, dtype=float)


def _as_mixture(law: ConditionalLaw):
    """(locs, weights, tail_mean) for Gaussian and Gaussian-mixture laws."""
    if law.kind == "gaussian_location":
        mu = np.asarray(law.mean, dtype=float).reshape(-1)
        return np.array([mu[0]]), np.array([1.0]), mu[1:]
    if law.kind == "density_1d" and law.locs is not None:
        return (np.asarray(law.locs, dtype=float), np.asarray(law.weights, dtype=float),
                np.asarray(law.tail_mean, dtype=float))
    return None


def _mixture_vs_gaussian(locs, w, mu0: float, metric: str) -> DistanceEstimate:
    """Distance between sum_i w_i N(locs_i, 1) and N(mu0, 1).

    The likelihood ratio in s = z - mu0 is rho(s) = sum_i w_i exp(s t_i - t_i^2/2)
    with t_i = locs_i - mu0; rho - 1 is accumulated through expm1.
    """
    t = np.asarray(locs, dtype=float) - mu0
    w = np.asarray(w, dtype=float) / math.fsum(w)

    def rho_m1(s):
        return np.dot(np.expm1(np.multiply.outer(s, t) - 0.5 * t * t), w)

    lo, hi = float(t.min()) - 13.0, float(t.max()) + 13.0
    grid = np.linspace(lo, hi, 801)
    g = rho_m1(grid)
    roots = []
    for a, b, ga, gb in zip(grid[:-1], grid[1:], g[:-1], g[1:]):
        if ga == 0.0:
            roots.append(float(a))
        elif ga * gb < 0:
            roots.append(optimize.brentq(rho_m1, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    if metric == "tv":
        # integrate (mixture - phi) between consecutive roots via normal cdfs
        cuts = [-math.inf] + roots + [math.inf]
        total = []
        for a, b in zip(cuts[:-1], cuts[1:]):
            mix = math.fsum(w * (special.ndtr(b - t) - special.ndtr(a - t)))
            base = special.ndtr(b) - special.ndtr(a)
            total.append(abs(mix - base))
        val = 0.5 * math.fsum(total)
        return DistanceEstimate(val, "tv", "quadrature", 1e-15 * (1 + len(roots)),
                                f"mixture of {len(t)} Gaussians, {len(roots)} crossing(s)")

    def integrand(s):
        r1 = rho_m1(s)
        return math.exp(-0.5 * s * s) / math.sqrt(2 * math.pi) * r1 * r1 / (math.sqrt(1 + r1) + 1) ** 2

    val, err = integrate.quad(integrand, lo, hi, points=roots or None, epsabs=0.0,
                              epsrel=_QUAD_TOL, limit=500)
    h2 = 0.5 * val
    h = math.sqrt(max(h2, 0.0))
    herr = 0.5 * err / max(2 * h, 1e-300) if h > 0 else math.sqrt(0.5 * err)
    return DistanceEstimate(h, "h", "quadrature", float(herr),
                            f"mixture of {len(t)} Gaussians")


def _generic_density(p: ConditionalLaw, q: ConditionalLaw, metric: str) -> DistanceEstimate:
    lo = min(p.interval[0], q.interval[0])
    hi = max(p.interval[1], q.interval[1])
    if metric == "tv":
        f = lambda y: abs(float(p.pdf(y)) - float(q.pdf(y)))
    else:
        f = lambda y: float(_sq_sqrt_diff(p.pdf(y), q.pdf(y)))
    val, err = integrate.quad(f, lo, hi, epsabs=min(p.tol, q.tol), limit=500)
    val *= 0.5
    if metric == "h":
        h = math.sqrt(max(val, 0.0))
        return DistanceEstimate(min(h, 1.0), "h", "quadrature",
                                math.sqrt(0.5 * err) if h == 0 else 0.5 * err / (2 * h))
    return DistanceEstimate(min(val, 1.0), "tv", "quadrature", 0.5 * err)


def _law_distance(p: ConditionalLaw, q: ConditionalLaw, metric: str) -> DistanceEstimate:
    metric = _metric(metric)
    if p.kind == "discrete" or q.kind == "discrete":
        if p.kind != q.kind:
            raise ValueError("cannot compare a discrete law with a continuous one")
        pp, qq = _discrete_pair(p, q)
        if metric == "tv":
            return DistanceEstimate(0.5 * math.fsum(np.abs(pp - qq)), "tv", "closed_form")
        h2 = 0.5 * math.fsum(_sq_sqrt_diff(pp, qq))
        return DistanceEstimate(math.sqrt(h2), "h", "closed_form")
    if p.kind == "gaussian_location" and q.kind == "gaussian_location":
        mp, mq = np.asarray(p.mean, float), np.asarray(q.mean, float)
        if mp.shape != mq.shape:
            raise ValueError("Gaussian laws of different dimensions")
        delta = float(np.linalg.norm(mp - mq))
        if metric == "tv":
            return DistanceEstimate(float(special.erf(delta / (2 * math.sqrt(2)))), "tv", "closed_form")
        return DistanceEstimate(math.sqrt(-math.expm1(-delta * delta / 8)), "h", "closed_form")
    mp, mq = _as_mixture(p), _as_mixture(q)
    if mp is not None and mq is not None:
        if mp[2].shape != mq[2].shape:
            raise ValueError("laws of different outcome dimensions")
        if not np.allclose(mp[2], mq[2], rtol=0, atol=0):
            raise ValueError("laws differ beyond the first coordinate; not supported")
        if len(mq[0]) == 1:
            return _mixture_vs_gaussian(mp[0], mp[1], float(mq[0][0]), metric)
        if len(mp[0]) == 1:
            return _mixture_vs_gaussian(mq[0], mq[1], float(mp[0][0]), metric)
    return _generic_density(p, q, metric)


def hellinger(p: ConditionalLaw, q: ConditionalLaw) -> DistanceEstimate:
    """Hellinger distance, exact for discrete and Gaussian pairs."""
    return _law_distance(p, q, "h")


def total_variation(p: ConditionalLaw, q: ConditionalLaw) -> DistanceEstimate:
    """Total-variation distance, exact for discrete and Gaussian pairs."""
    return _law_distance(p, q, "tv")


# ---------------------------------------------------------------------------
# marginal distances between P_r and P


def marginal_distance(spec: DgpSpec, r: float, metric: str) -> DistanceEstimate:
    """Distance between the ball law ``P_r`` and the target ``P = P_{x0}``."""
    metric = _metric(metric)
    if spec.is_discrete:
        pi0 = _dgp.base_pi(spec)
        delta = float(_dgp.ball_delta(spec, r))
        val = float(twopoint_distance(pi0, delta, metric))
        method = "quadrature" if spec.family == "log_correction" else "closed_form"
        return DistanceEstimate(val, metric, method, 1e-15 * max(val, 1e-300))
    return _law_distance(_dgp.ball_law(spec, r), _dgp.conditional_law(spec), metric)


def _marginal_function(spec: DgpSpec, metric: str) -> Callable[[float], float]:
    if spec.is_discrete:
        pi0 = _dgp.base_pi(spec)

        def f(r):
            return float(twopoint_distance(pi0, _dgp.ball_delta(spec, r), metric))
        return f
    cache = lru_cache(maxsize=None)(lambda r: marginal_distance(spec, r, metric).value)
    return cache


# ---------------------------------------------------------------------------
# joint distances


def _beta_breaks(beta) -> list[float]:
    qs = [1e-14, 1e-10, 1e-6, 1e-3, 0.05, 0.5, 0.95, 1 - 1e-3, 1 - 1e-6, 1 - 1e-10]
    pts = sorted(set(float(v) for v in beta.ppf(qs) if 0 < v < 1))
    return pts


def _require_twopoint(spec: DgpSpec):
    if not spec.is_discrete:
        raise ValueError(f"{spec.id} has a continuous outcome; the exact joint engine needs a discrete one")


def joint_distance_exact(spec: DgpSpec, n: int, k: int, metric: str,
                         k_max: int = 10_000) -> DistanceEstimate:
    """Exact distance between the law of the k IOS and the k-fold target product.

    A configuration with j successes has probability
    ``E[pi_R^j (1 - pi_R)^(k-j)]`` under the IOS law and
    ``pi0^j (1 - pi0)^(k-j)`` under the product, so only the likelihood
    ratios ``rho_j`` for j = 0..k are needed.  Each is an integral over
    ``U ~ Beta(k+1, n-k)``; all k + 1 of them are computed in one vector
    quadrature.
    """
    metric = _metric(metric)
    _require_twopoint(spec)
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    if k > k_max:
        raise ValueError(f"k = {k} exceeds the enumeration limit {k_max}")
    pi0 = _dgp.base_pi(spec)
    law = radius_law(spec)

    if k == n:
        delta = float(_dgp.ball_delta(spec, law.r_max))
        h = float(twopoint_distance(pi0, delta, "h"))
        if metric == "h":
            return DistanceEstimate(math.sqrt(tensorize_hellinger(h * h, k)), "h",
                                    "exchangeable_enumeration", 1e-15, "k = n, product law")
        return _product_tv(pi0, pi0 + delta, k)

    beta = r_order_beta(n, k)
    breaks = _beta_breaks(beta)

    def delta_of_u(u):
        r = law.quantile(u)
        return float(_dgp.ball_delta(spec, max(float(r), 1e-300)))

    if pi0 in (0.0, 1.0):
        # the target is a point mass at the all-zero (or all-one) configuration
        def miss(u):
            d = abs(delta_of_u(u))
            return -math.expm1(k * math.log1p(-min(d, 1.0))) * beta.pdf(u)

        m1, err = integrate.quad(miss, 0.0, 1.0, points=breaks, epsabs=0.0,
                                 epsrel=_QUAD_TOL, limit=500)
        if metric == "tv":
            return DistanceEstimate(m1, "tv", "exchangeable_enumeration", err)
        # H^2 = 1 - sqrt(q0) = (1 - q0) / (1 + sqrt(q0))
        h2 = m1 / (1 + math.sqrt(max(1 - m1, 0.0)))
        return DistanceEstimate(math.sqrt(h2), "h", "exchangeable_enumeration",
                                err / max(2 * math.sqrt(h2), 1e-300) if h2 > 0 else math.sqrt(err))

    j = np.arange(k + 1, dtype=float)
    logw = stats.binom.logpmf(j, k, pi0)
    keep = logw > -745.0
    j, logw = j[keep], logw[keep]
    w = np.exp(logw)

    def excess(u):
        # w_j (rho_j(u) - 1): count-j probability under P_u^k minus under P^k
        d = delta_of_u(u)
        a = math.log1p(d / pi0)
        b = math.log1p(-d / (1 - pi0))
        x = j * a + (k - j) * b
        safe = x < 700.0
        out = np.where(safe, w * np.expm1(np.minimum(x, 700.0)),
                       np.exp(np.minimum(logw + x, 700.0)) - w)
        return out * beta.pdf(u)

    res = integrate.quad_vec(excess, 0.0, 1.0, points=breaks, epsabs=1e-300,
                             epsrel=_QUAD_TOL, norm="max", limit=2000)
    diff = np.maximum(res[0], -w)
    err = float(res[1])
    detail = f"counts 0..{k}, {int(keep.sum())} retained"
    if metric == "tv":
        val = 0.5 * math.fsum(np.abs(diff))
        return DistanceEstimate(min(val, 1.0), "tv", "exchangeable_enumeration",
                                0.5 * err * diff.size, detail)
    # (sqrt m - sqrt w)^2 = diff^2 / (sqrt(w + diff) + sqrt w)^2
    terms = diff**2 / (np.sqrt(w + diff) + np.sqrt(w)) ** 2
    h2 = 0.5 * math.fsum(terms)
    h = math.sqrt(max(h2, 0.0))
    h2err = err * math.fsum(np.abs(diff) / (np.sqrt(w + diff) + np.sqrt(w)) ** 2)
    herr = h2err / max(2 * h, 1e-300) if h > 0 else math.sqrt(h2err)
    return DistanceEstimate(min(h, 1.0), "h", "exchangeable_enumeration", float(herr), detail)


def _product_tv(p0: float, p1: float, k: int) -> DistanceEstimate:
    """TV between Bernoulli(p0)^k and Bernoulli(p1)^k, summed over counts."""
    j = np.arange(k + 1)
    a = stats.binom.pmf(j, k, p0)
    b = stats.binom.pmf(j, k, p1)
    return DistanceEstimate(0.5 * math.fsum(np.abs(a - b)), "tv", "exchangeable_enumeration",
                            1e-14, "product law")


def joint_distance_bound(spec: DgpSpec, n: int, k: int, metric: str) -> DistanceEstimate:
    """Mixture upper bound on the joint distance.

    H^2 <= E[1 - (1 - H^2(P_R, P))^k] and TV <= E[min(1, k TV(P_R, P))]
    with R the (k+1)-th nearest distance.
    """
    metric = _metric(metric)
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    law = radius_law(spec)
    marg = _marginal_function(spec, metric)

    def piece(r):
        v = marg(max(float(r), 1e-300))
        if metric == "h":
            return tensorize_hellinger(min(v * v, 1.0), k)
        return min(1.0, k * v)

    if k == n:
        val = piece(law.r_max)
        val = math.sqrt(val) if metric == "h" else val
        return DistanceEstimate(val, metric, "upper_bound", 1e-14, "k = n")

    beta = r_order_beta(n, k)
    breaks = _beta_breaks(beta)
    integrand = lambda u: piece(law.quantile(u)) * beta.pdf(u)
    val, err = integrate.quad(integrand, 0.0, 1.0, points=breaks, epsabs=0.0,
                              epsrel=_QUAD_TOL, limit=500)
    if metric == "h":
        h = math.sqrt(max(val, 0.0))
        return DistanceEstimate(min(h, 1.0), "h", "upper_bound",
                                err / max(2 * h, 1e-300) if h > 0 else math.sqrt(err))
    return DistanceEstimate(min(val, 1.0), "tv", "upper_bound", err)


# ---------------------------------------------------------------------------
# local quadratic expansion


def _fisher_information(spec: DgpSpec) -> np.ndarray:
    score = spec.score
    if score is None:
        raise ValueError(f"{spec.id} is not QMD at x0; no local expansion")
    I = np.zeros((spec.d, spec.d))
    if score["kind"] == "gaussian_first":
        I[0, 0] = 1.0
    elif score["kind"] == "twopoint":
        pi0 = _dgp.base_pi(spec)
        I[0, 0] = score["slope"] ** 2 / (pi0 * (1 - pi0))
    return I


def _as_offsets(spec: DgpSpec, t_grid) -> list[np.ndarray]:
    out = []
    for t in t_grid:
        v = np.zeros(spec.d)
        arr = np.asarray(t, dtype=float).reshape(-1)
        if arr.size == 1:
            v[0] = arr[0]
        else:
            v[:] = arr
        out.append(v)
    return out


def _pointwise_h2(spec: DgpSpec, t: np.ndarray) -> float:
    """H^2(P_{x0 + t}, P_{x0}) in closed form."""
    if not np.any(t):
        return 0.0
    if spec.outcome_kind == "gaussian_location":
        return -math.expm1(-t[0] ** 2 / 8.0)
    x = np.asarray(spec.x0) + t
    pi0 = _dgp.base_pi(spec)
    delta = float(_dgp.success_prob(spec, x[None, :])[0]) - pi0
    return float(twopoint_distance(pi0, delta, "h")) ** 2


def local_expansion_check(spec: DgpSpec, t_grid: Sequence) -> dict:
    """Compare D(x0 + t) = 2 H^2(P_{x0+t}, P) with 1/4 t' I t along ``t_grid``."""
    info = _fisher_information(spec)
    rows = []
    for t in _as_offsets(spec, t_grid):
        D = 2.0 * _pointwise_h2(spec, t)
        quad = 0.25 * float(t @ info @ t)
        ratio = D / quad if quad > 0 else (1.0 if D == 0 else math.nan)
        rows.append({"t": t.tolist(), "D": D, "quadratic": quad, "ratio": ratio})
    return {"spec": spec.id, "fisher_information": info.tolist(), "rows": rows,
            "ratios": [r["ratio"] for r in rows]}


def qmd_remainder(spec: DgpSpec, t: float) -> float:
    """int (sqrt p_{x0+t} - sqrt p_{x0} - t/2 score sqrt p_{x0})^2 / t^2.

    Computed by quadrature for the Gaussian families and by a finite sum for
    the two-point ones.
    """
    score = spec.score
    if score is None:
        raise ValueError(f"{spec.id} has no registered score")
    if t == 0:
        return 0.0
    if spec.outcome_kind == "gaussian_location":
        mu0 = spec.x0[0]

        def f(y):
            s0 = math.exp(-0.25 * (y - mu0) ** 2) / (2 * math.pi) ** 0.25
            st = math.exp(-0.25 * (y - mu0 - t) ** 2) / (2 * math.pi) ** 0.25
            return (st - s0 - 0.5 * t * (y - mu0) * s0) ** 2

        val, _ = integrate.quad(f, mu0 - 40, mu0 + 40, epsabs=1e-16, epsrel=1e-12, limit=500)
        return val / t**2
    pi0 = _dgp.base_pi(spec)
    x = np.asarray(spec.x0, dtype=float).copy()
    x[0] += t
    pit = float(_dgp.success_prob(spec, x[None, :])[0])
    if score["kind"] == "twopoint":
        s1, s0 = score["slope"] / pi0, -score["slope"] / (1 - pi0)
    else:
        s1 = s0 = 0.0
    r1 = math.sqrt(pit) - math.sqrt(pi0) - 0.5 * t * s1 * math.sqrt(pi0)
    r0 = math.sqrt(1 - pit) - math.sqrt(1 - pi0) - 0.5 * t * s0 * math.sqrt(1 - pi0)
    return (r1 * r1 + r0 * r0) / t**2
