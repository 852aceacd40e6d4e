"""Nearest-neighbour estimators built on the induced order statistics.

An estimator is any function ``psi`` of the IOS vector; the ones here are the
sample mean, the empirical CDF and its generalized inverse.
``normality_diagnostic`` simulates the standardized mean or CDF estimator
and measures its Kolmogorov distance to the standard normal.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special, stats

from . import dgp as _dgp
from .dgp import DgpSpec
from .dist import joint_distance_bound
from .ios import extract

__all__ = [
    "EstimatorReport",
    "mean_estimator",
    "cdf_estimator",
    "quantile_estimator",
    "target_value",
    "normality_diagnostic",
    "parse_statistic",
]

BERRY_ESSEEN_C = 0.4


@dataclass
class EstimatorReport:
    estimate: np.ndarray
    target: np.ndarray
    k: int
    standardized_draws: np.ndarray | None = None
    ks_distance: float | None = None
    degenerate: bool = False
    dropped: int = 0
    budget: dict = field(default_factory=dict)

    def to_dict(self, include_draws: bool = False) -> dict:
        out = {
            "estimate": np.asarray(self.estimate).tolist(),
            "target": np.asarray(self.target).tolist(),
            "k": self.k,
            "ks_distance": self.ks_distance,
            "degenerate": self.degenerate,
            "dropped": self.dropped,
            "budget": self.budget,
        }
        if include_draws and self.standardized_draws is not None:
            out["standardized_draws"] = self.standardized_draws.tolist()
        return out


def _vector(s_n) -> np.ndarray:
    s = np.asarray(s_n, dtype=float)
    if s.size == 0:
        raise ValueError("empty IOS vector")
    return s


def _scalar(s_n) -> np.ndarray:
    s = _vector(s_n)
    if s.ndim == 2:
        if s.shape[1] != 1:
            raise ValueError("scalar outcomes required")
        s = s[:, 0]
    return s


def mean_estimator(s_n) -> np.ndarray:
    """Componentwise average of the k outcomes."""
    s = _vector(s_n)
    if s.ndim == 1:
        return np.array([math.fsum(s) / s.size])
    return np.array([math.fsum(col) / s.shape[0] for col in s.T])


def cdf_estimator(s_n, t: float) -> float:
    """Fraction of outcomes ``<= t``."""
    s = _scalar(s_n)
    return np.count_nonzero(s <= t) / s.size


def quantile_estimator(s_n, tau: float) -> float:
    """inf{s : ECDF(s) >= tau}, the left-continuous inverse of the ECDF."""
    if not 0 < tau < 1:
        raise ValueError("tau must lie in (0, 1)")
    s = np.sort(_scalar(s_n))
    k = s.size
    idx = math.ceil(tau * k - 1e-12) - 1
    return float(s[min(max(idx, 0), k - 1)])


def parse_statistic(text: str) -> tuple[str, float | None]:
    """Parse ``mean``, ``cdf:<t>`` or ``quantile:<tau>``."""
    name, _, arg = text.partition(":")
    name = name.strip().lower()
    if name == "mean":
        if arg:
            raise ValueError("mean takes no argument")
        return "mean", None
    if name in ("cdf", "quantile"):
        if not arg:
            raise ValueError(f"{name} needs an argument, e.g. {name}:0.5")
        return name, float(arg)
    raise ValueError(f"unknown statistic {text!r}")


def target_value(spec: DgpSpec, estimator: str, t: float | None = None) -> tuple[float, float]:
    """(theta, sigma) of the first outcome coordinate under the target law.

    theta is the mean or the CDF at ``t``; sigma is the standard deviation
    of one draw of the corresponding summand.
    """
    if spec.outcome_kind == "gaussian_location":
        mu0 = float(spec.x0[0])
        if estimator == "mean":
            return mu0, 1.0
        theta = float(special.ndtr(t - mu0))
        return theta, math.sqrt(theta * (1 - theta))
    pi0 = _dgp.base_pi(spec)
    if estimator == "mean":
        return pi0, math.sqrt(pi0 * (1 - pi0))
    theta = 0.0 if t < 0 else (1 - pi0 if t < 1 else 1.0)
    return theta, math.sqrt(theta * (1 - theta))


def normality_diagnostic(spec: DgpSpec, estimator: str = "mean", n: int = 10_000,
                         k: int = 100, reps: int = 1000, seed: int = 0, t: float | None = None,
                         threads: int | None = None, budget: bool = True) -> EstimatorReport:
    """KS distance between sqrt(k)(psi(S_n) - theta)/sigma and the standard normal.

    Each replication draws a fresh sample of size ``n`` from ``spec`` on its
    own stream and extracts the k IOS at x0.  The report also carries the
    error budget: the joint TV bound plus ``0.4 / sqrt(k)``.
    """
    if estimator not in ("mean", "cdf"):
        raise ValueError("estimator must be 'mean' or 'cdf'")
    if estimator == "cdf" and t is None:
        raise ValueError("the cdf estimator needs t")
    if not 1 <= k <= n or reps < 1:
        raise ValueError("need 1 <= k <= n and reps >= 1")
    theta, sigma = target_value(spec, estimator, t)
    if sigma == 0:
        return EstimatorReport(estimate=np.array([math.nan]), target=np.array([theta]), k=k,
                               degenerate=True)

    def one(rep):
        data = _dgp.sample(spec, n, seed, rep)
        s = extract(data, spec.x0, k).s_n[:, 0]
        return float(mean_estimator(s)[0]) if estimator == "mean" else cdf_estimator(s, t)

    if threads is None or threads <= 1:
        est = np.array([one(r) for r in range(reps)])
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            est = np.array(list(pool.map(one, range(reps))))
    z = math.sqrt(k) * (est - theta) / sigma
    ks = float(stats.kstest(z, "norm").statistic)
    info = {}
    if budget:
        try:
            tv = joint_distance_bound(spec, n, k, "tv").value
            info = {"tv_bound": tv, "berry_esseen": BERRY_ESSEEN_C / math.sqrt(k),
                    "total": tv + BERRY_ESSEEN_C / math.sqrt(k)}
        except ValueError:
            info = {}
    return EstimatorReport(estimate=np.array([float(np.mean(est))]), target=np.array([theta]),
                           k=k, standardized_draws=z, ks_distance=ks, budget=info)
