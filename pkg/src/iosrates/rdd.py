"""Covariate-balance permutation test at a regression-discontinuity cutoff.

The statistic is the Cramer-von Mises contrast between the empirical CDFs of
the first and second halves of the IOS vector, evaluated at every pooled
point.  Its permutation distribution runs over the C(k, k/2) ways of
assigning the pooled outcomes to the two halves.
"""

from __future__ import annotations

import itertools
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._random import stream
from .dgp import Dataset, DgpSpec, sample
from .ios import extract_two_sided

__all__ = [
    "GrowthRateWarning",
    "PermTestResult",
    "cvm_statistic",
    "permutation_test",
    "q_rule",
    "simulate_two_sided",
    "size_power_simulation",
]

GROWTH_LIMIT = 2.0 / 3.0


class GrowthRateWarning(UserWarning):
    """Raised when q grows at least as fast as n^(2/3)."""


@dataclass(frozen=True)
class PermTestResult:
    statistic: float
    p_value: float
    n_perms: int
    exact: bool
    q: int
    alpha: float
    reject: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _as_vector(s_n) -> np.ndarray:
    s = np.asarray(s_n, dtype=float)
    if s.ndim == 2:
        if s.shape[1] != 1:
            raise ValueError("the CvM statistic needs scalar outcomes")
        s = s[:, 0]
    if s.ndim != 1:
        raise ValueError("expected a vector of outcomes")
    k = s.size
    if k < 2 or k % 2:
        raise ValueError(f"need an even number k >= 2 of outcomes, got {k}")
    return s


def _pooled_layout(s: np.ndarray):
    """Sort order and, per sorted position, the last index of its tie group."""
    order = np.argsort(s, kind="stable")
    ss = s[order]
    k = ss.size
    last = np.empty(k, dtype=np.int64)
    end = k - 1
    for i in range(k - 1, -1, -1):
        if i < k - 1 and ss[i] != ss[i + 1]:
            end = i
        last[i] = end
    return order, last


def _numerators(left_sorted: np.ndarray, last: np.ndarray) -> np.ndarray:
    """Sum over pooled points of (#left <= s - #right <= s)^2, one per split row.

    ``left_sorted`` is a boolean (splits x k) array in pooled sort order.
    """
    cum_left = np.cumsum(left_sorted, axis=1, dtype=np.int64)[:, last]
    diff = 2 * cum_left - (last + 1)
    return np.einsum("ij,ij->i", diff, diff)


def cvm_statistic(s_n) -> float:
    """(1/k) sum_j (F_left(S_j) - F_right(S_j))^2 with weak-inequality ECDFs.

    The first k/2 entries form the left sample, the last k/2 the right one.
    """
    s = _as_vector(s_n)
    k = s.size
    q = k // 2
    order, last = _pooled_layout(s)
    left = (np.arange(k) < q)[order][None, :]
    num = int(_numerators(left, last)[0])
    return num / (k * q * q)


def _exact_splits(k: int, q: int) -> np.ndarray:
    combos = np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(k), q)),
                         dtype=np.int64)
    combos = combos.reshape(-1, q)
    mask = np.zeros((combos.shape[0], k), dtype=bool)
    np.put_along_axis(mask, combos, True, axis=1)
    return mask


def permutation_test(s_n, alpha: float = 0.05, max_exact: int = 200_000,
                     n_random: int = 9_999, seed: int = 0, stream_index=0,
                     chunk: int = 4096) -> PermTestResult:
    """Permutation p-value of the CvM statistic.

    Exact enumeration over all C(k, k/2) splits when that count is at most
    ``max_exact`` (identity split included, p = #{T >= T_obs} / C);
    otherwise ``n_random`` uniform splits with p = (1 + #{T >= T_obs}) / (1 + N).
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    s = _as_vector(s_n)
    k = s.size
    q = k // 2
    order, last = _pooled_layout(s)
    observed = int(_numerators((np.arange(k) < q)[order][None, :], last)[0])
    stat = observed / (k * q * q)
    total = math.comb(k, q)
    if total <= max_exact:
        mask = _exact_splits(k, q)[:, order]
        hits = 0
        for start in range(0, mask.shape[0], chunk * 8):
            hits += int(np.count_nonzero(_numerators(mask[start:start + chunk * 8], last) >= observed))
        p = hits / total
        return PermTestResult(stat, p, total, True, q, alpha, p <= alpha)
    if n_random < 1:
        raise ValueError("n_random must be >= 1")
    rng = stream(seed, stream_index)
    hits = 0
    base = np.arange(k)
    for start in range(0, n_random, chunk):
        b = min(chunk, n_random - start)
        perms = rng.permuted(np.tile(base, (b, 1)), axis=1)
        mask = (perms < q)[:, order]
        hits += int(np.count_nonzero(_numerators(mask, last) >= observed))
    p = (1 + hits) / (1 + n_random)
    return PermTestResult(stat, p, n_random, False, q, alpha, p <= alpha)


def q_rule(n: int, gamma: float, c: float = 1.0) -> int:
    """q = max(2, floor(c * n^gamma)); warns when gamma >= 2/3."""
    if n < 1 or not c > 0 or not gamma > 0:
        raise ValueError("need n >= 1, c > 0 and gamma > 0")
    if gamma >= GROWTH_LIMIT:
        warnings.warn(
            f"gamma = {gamma} violates q = o(n^(2/3)); the permutation test may be invalid",
            GrowthRateWarning, stacklevel=2)
    v = c * float(n) ** gamma
    return max(2, int(math.floor(v * (1 + 1e-12))))


def simulate_two_sided(spec_left: DgpSpec, spec_right: DgpSpec, n: int, seed: int,
                       rep: int) -> Dataset:
    """One RDD dataset with cutoff 0.

    Each observation falls on the right with probability 1/2.  Right-side
    points come from ``spec_right`` as is; left-side points come from
    ``spec_left`` with the running variable reflected to negative values.
    """
    for spec in (spec_left, spec_right):
        if spec.d != 1 or not spec.boundary or spec.x0 != (0.0,):
            raise ValueError("two-sided simulation needs d = 1 specs with boundary x0 = 0")
    rng = stream(seed, (rep, 0))
    n_right = int(rng.binomial(n, 0.5))
    left = sample(spec_left, max(n - n_right, 1), seed, (rep, 1))
    right = sample(spec_right, max(n_right, 1), seed, (rep, 2))
    x = np.concatenate([-left.x[: n - n_right, 0], right.x[:n_right, 0]])
    y = np.vstack([left.y[: n - n_right, :1], right.y[:n_right, :1]])
    perm = rng.permutation(n)
    return Dataset(x[perm][:, None], y[perm])


def size_power_simulation(spec_left: DgpSpec, spec_right: DgpSpec, n: int, gamma: float,
                          c: float = 1.0, reps: int = 1000, alpha: float = 0.05, seed: int = 0,
                          n_random: int = 999, max_exact: int = 200_000,
                          threads: int | None = None) -> dict:
    """Rejection frequency of the permutation test over simulated datasets.

    With identical specs this estimates the size, otherwise the power.
    Replications lacking q points on a side are dropped and counted.
    """
    if reps < 1:
        raise ValueError("reps must be >= 1")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", GrowthRateWarning)
        q = q_rule(n, gamma, c)
    if caught:
        warnings.warn(str(caught[0].message), GrowthRateWarning, stacklevel=2)

    def one(rep):
        data = simulate_two_sided(spec_left, spec_right, n, seed, rep)
        try:
            ext = extract_two_sided(data, 0.0, q)
        except ValueError:
            return None
        res = permutation_test(ext.s_n, alpha=alpha, max_exact=max_exact,
                               n_random=n_random, seed=seed, stream_index=(rep, 3))
        return res.statistic, res.p_value

    if threads is None or threads <= 1:
        out = [one(r) for r in range(reps)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(one, range(reps)))
    kept = [(r, o) for r, o in enumerate(out) if o is not None]
    dropped = reps - len(kept)
    stats = np.array([o[0] for _, o in kept])
    pvals = np.array([o[1] for _, o in kept])
    rate = float(np.mean(pvals <= alpha)) if kept else math.nan
    se = math.sqrt(rate * (1 - rate) / len(kept)) if kept else math.nan
    return {
        "n": n, "gamma": gamma, "c": c, "q": q, "alpha": alpha,
        "reps": reps, "reps_used": len(kept), "dropped": dropped,
        "rejection_rate": rate, "se": se,
        "rep": [r for r, _ in kept], "statistic": stats, "p_value": pvals,
    }
