"""Rate experiments: log-log fits of marginal and joint distances.

Marginal fits regress ``log d(P_r, P)`` on ``log r``.  Joint fits regress
the joint distance on the log of the predicted rate
``k^(1/2) (k/n)^(a_h/d)`` (Hellinger) or
``min{k (k/n)^(a_tv/d), k^(1/2) (k/n)^(a_h/d)}`` (TV), so a slope of one
means the prediction is tracked.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .dgp import DgpSpec, get_spec
from .dist import (DistanceEstimate, _metric, joint_distance_bound, joint_distance_exact,
                   marginal_distance)

__all__ = [
    "RateFit",
    "fit_loglog",
    "geometric_grid",
    "marginal_rate_fit",
    "log_correction_profile",
    "joint_rate",
    "joint_rate_fit",
    "growth_threshold_study",
    "fhr_comparison",
    "rows_to_csv",
]

CSV_HEADER = ("scale", "n", "k", "distance", "err", "method")


@dataclass
class RateFit:
    """OLS fit of log distance on log scale plus a verdict against theory."""

    points: list[tuple[float, float]]
    slope: float
    intercept: float
    r_squared: float
    slope_stderr: float
    theoretical: float
    verdict: str
    tolerance: float = 0.05
    two_sided: bool = True
    dropped: int = 0
    rows: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items() if k != "rows"}


def geometric_grid(r_max: float, points: int = 8, lo: float | None = None) -> np.ndarray:
    """r_max * 2^-j for j = 1..points, or a geometric grid from ``lo`` to ``r_max``."""
    if lo is not None:
        return np.geomspace(lo, r_max, points)
    return r_max * 2.0 ** -np.arange(1, points + 1)


def fit_loglog(scales: Sequence[float], values: Sequence[float]) -> tuple[float, float, float, float]:
    """(slope, intercept, r_squared, slope_stderr) of log values on log scales."""
    x = np.log(np.asarray(scales, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    if x.size < 2:
        raise ValueError("need at least two points")
    res = stats.linregress(x, y)
    r2 = float(res.rvalue**2) if np.isfinite(res.rvalue) else 1.0
    return float(res.slope), float(res.intercept), min(max(r2, 0.0), 1.0), float(res.stderr)


def _pmap(fn: Callable, items: Iterable, threads: int | None):
    items = list(items)
    if threads is None or threads <= 1:
        return [fn(v) for v in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _fit(scales, values, theoretical, tolerance, two_sided, rows, min_points=4) -> RateFit:
    scales = np.asarray(scales, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = values > 0
    dropped = int((~keep).sum())
    pts = [(float(s), float(v)) for s, v in zip(scales[keep], values[keep])]
    if keep.sum() < min_points:
        return RateFit(pts, math.nan, math.nan, 0.0, math.nan, theoretical, "degenerate",
                       tolerance, two_sided, dropped, rows)
    slope, icpt, r2, se = fit_loglog(scales[keep], values[keep])
    if two_sided:
        ok = abs(slope - theoretical) <= tolerance
    else:
        ok = slope >= theoretical - tolerance
    return RateFit(pts, slope, icpt, r2, se, theoretical, "consistent" if ok else "inconsistent",
                   tolerance, two_sided, dropped, rows)


def _row(scale, n, k, est: DistanceEstimate) -> dict:
    return {"scale": float(scale), "n": n, "k": k, "distance": est.value, "err": est.err,
            "method": est.method}


def marginal_rate_fit(spec: DgpSpec, metric: str, r_grid: Sequence[float] | None = None,
                      tolerance: float = 0.05, threads: int | None = None) -> RateFit:
    """Slope of log d(P_r, P) against log r.

    Sharp specs are checked two-sided against the theoretical exponent;
    otherwise only ``slope >= exponent - tolerance`` is required.
    """
    metric = _metric(metric)
    grid = geometric_grid(spec.r_tilde) if r_grid is None else np.asarray(r_grid, dtype=float)
    if grid.size < 6:
        raise ValueError("need at least 6 grid points")
    if np.any(grid <= 0) or np.any(grid > spec.r_tilde):
        raise ValueError(f"grid must lie in (0, {spec.r_tilde}]")
    ests = _pmap(lambda r: marginal_distance(spec, float(r), metric), grid, threads)
    rows = [_row(r, None, None, e) for r, e in zip(grid, ests)]
    return _fit(grid, [e.value for e in ests], spec.exponent(metric), tolerance,
                spec.sharp(metric), rows)


def log_correction_profile(spec: DgpSpec, r_grid: Sequence[float] | None = None,
                           epsilons: Sequence[float] = (0.15, 0.25, 0.5)) -> dict:
    """TV(P_r, P) (1 - ln r) / r along ``r_grid`` plus a pure-power fit.

    A bounded profile together with a fitted power slope below ``1 + eps``
    for each tested ``eps`` shows that no bound of order ``r^(1+eps)`` holds.
    """
    if spec.family != "log_correction":
        raise ValueError("the profile applies to the log_correction family only")
    grid = (np.exp(-np.linspace(12, 4, 17)) if r_grid is None
            else np.asarray(r_grid, dtype=float))
    d = spec.d
    tv = np.array([marginal_distance(spec, float(r), "tv").value for r in grid])
    profile = tv * (1 - np.log(grid)) / grid
    coef = d * (1 - 2.0 ** (-d - 1)) / (d + 1)
    lower = coef * grid / (1 - np.log(grid / 2))
    slope, icpt, r2, se = fit_loglog(grid, tv)
    lo, hi = float(profile.min()), float(profile.max())
    return {
        "r": grid.tolist(),
        "tv": tv.tolist(),
        "profile": profile.tolist(),
        "lower_bound": lower.tolist(),
        "lower_bound_coefficient": coef,
        "lower_bound_holds": bool(np.all(tv >= lower)),
        "profile_min": lo,
        "profile_max": hi,
        "bounded": bool(0 < lo <= hi < math.inf),
        "successive_ratios": (profile[1:] / profile[:-1]).tolist(),
        "power_slope": slope,
        "power_r_squared": r2,
        "excludes_power": {str(e): bool(1.0 < slope < 1.0 + e) for e in epsilons},
    }


def joint_rate(spec: DgpSpec, n: int, k: int, metric: str) -> float:
    """The predicted joint rate expression at (n, k)."""
    metric = _metric(metric)
    d = spec.d
    h_rate = math.sqrt(k) * (k / n) ** (spec.theoretical_a_h / d)
    if metric == "h":
        return h_rate
    return min(k * (k / n) ** (spec.theoretical_a_tv / d), h_rate)


def _joint(spec, n, k, metric, engine) -> DistanceEstimate:
    if engine == "exact":
        return joint_distance_exact(spec, n, k, metric)
    if engine == "bound":
        return joint_distance_bound(spec, n, k, metric)
    raise ValueError(f"unknown engine {engine!r}")


def joint_rate_fit(spec: DgpSpec, metric: str, schedule: Sequence[tuple[int, int]],
                   engine: str = "exact", tolerance: float = 0.1,
                   threads: int | None = None) -> RateFit:
    """Regress log joint distance on log of the predicted rate along ``schedule``."""
    metric = _metric(metric)
    if engine == "exact" and not spec.is_discrete:
        raise ValueError("the exact engine needs a discrete outcome")
    schedule = [(int(n), int(k)) for n, k in schedule]
    ests = _pmap(lambda nk: _joint(spec, nk[0], nk[1], metric, engine), schedule, threads)
    pred = np.array([joint_rate(spec, n, k, metric) for n, k in schedule])
    rows = [_row(p, n, k, e) for p, (n, k), e in zip(pred, schedule, ests)]
    return _fit(pred, [e.value for e in ests], 1.0, tolerance, spec.sharp(metric), rows)


def _classify(values: Sequence[float], tail: int = 3) -> dict:
    v = np.asarray(values, dtype=float)
    decreasing_tail = bool(np.all(np.diff(v[-tail:]) < 0))
    vanishing = bool(v[-1] < v[0] / 10 and decreasing_tail)
    nondecreasing_tail = bool(np.all(np.diff(v[-tail:]) >= 0))
    return {"vanishing": vanishing, "decreasing_tail": decreasing_tail,
            "nondecreasing_tail": nondecreasing_tail, "first": float(v[0]), "last": float(v[-1])}


def growth_threshold_study(spec: DgpSpec, gammas: Sequence[float], n_grid: Sequence[int],
                           metric: str = "h", k_max: int = 10_000,
                           threads: int | None = None) -> dict:
    """Joint distances along k = floor(n^gamma) for several growth exponents.

    Values use the exact engine where it applies and the mixture bound
    otherwise.  Sequences for gamma below the threshold 2/(2+d) minus 0.05
    are expected to vanish; the others are only reported.
    """
    metric = _metric(metric)
    threshold = 2.0 / (2.0 + spec.d)
    out = {"spec": spec.id, "metric": metric, "threshold": threshold, "gammas": {}}
    for gamma in gammas:
        sched = []
        for n in n_grid:
            k = int(math.floor(float(n) ** gamma * (1 + 1e-12)))
            sched.append((int(n), min(max(k, 1), int(n) - 1)))

        def ev(nk):
            n, k = nk
            exact_ok = spec.is_discrete and k <= k_max
            return _joint(spec, n, k, metric, "exact" if exact_ok else "bound")

        ests = _pmap(ev, sched, threads)
        vals = [e.value for e in ests]
        cls = _classify(vals)
        cls.update({
            "rows": [_row(gamma, n, k, e) for (n, k), e in zip(sched, ests)],
            "asserted": bool(gamma < threshold - 0.05),
            "above_threshold": bool(gamma > threshold),
        })
        out["gammas"][float(gamma)] = cls
    return out


def fhr_comparison(smooth: DgpSpec | None = None, boundary: DgpSpec | None = None,
                   interior_gaussian: DgpSpec | None = None,
                   r_grid: Sequence[float] | None = None) -> dict:
    """Marginal slopes of a smooth interior family against a boundary QMD family.

    The smooth interior family attains the faster quadratic rate while the
    boundary family stays linear.
    """
    smooth = smooth or get_spec("holder_interior_quadratic")
    boundary = boundary or get_spec("gaussian_boundary")
    interior_gaussian = interior_gaussian or get_spec("gaussian_interior")
    grid = np.geomspace(1e-3, 1e-1, 9) if r_grid is None else np.asarray(r_grid, dtype=float)
    report = {}
    for name, spec in (("smooth", smooth), ("boundary", boundary),
                       ("interior_gaussian", interior_gaussian)):
        report[name] = {
            "spec": spec.id,
            "tv_slope": marginal_rate_fit(spec, "tv", grid).slope,
            "h_slope": marginal_rate_fit(spec, "h", grid).slope,
        }
    return report


def rows_to_csv(rows: Sequence[dict]) -> str:
    """CSV text with the columns scale,n,k,distance,err,method."""
    lines = [",".join(CSV_HEADER)]
    for r in rows:
        cells = []
        for key in CSV_HEADER:
            v = r.get(key)
            if v is None:
                cells.append("")
            elif isinstance(v, float):
                cells.append(repr(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
