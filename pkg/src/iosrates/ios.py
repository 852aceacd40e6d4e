"""Induced order statistics.

Given covariates ``X`` and outcomes ``Y``, the IOS at ``x0`` are the outcomes
of the k observations whose covariates lie closest to ``x0``, listed in the
original sample order.  Indices are 0-based throughout.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dgp import Dataset

__all__ = ["IosResult", "TwoSidedIosResult", "distances", "extract", "extract_two_sided"]


@dataclass
class IosResult:
    """The k induced order statistics and their bookkeeping.

    ``s_n`` is ``k x m`` in original sample order, ``iota`` the increasing
    selected indices, ``r_k_plus_1`` the (k+1)-th smallest distance (``None``
    when k = n).  ``ranks`` (1-based, ties to the smaller index) is computed
    on first access.
    """

    s_n: np.ndarray
    iota: np.ndarray
    k: int
    r_k_plus_1: float | None
    _dist: np.ndarray = field(repr=False)
    _ranks: np.ndarray | None = field(default=None, repr=False)

    @property
    def ranks(self) -> np.ndarray:
        if self._ranks is None:
            order = np.argsort(self._dist, kind="stable")
            ranks = np.empty(order.size, dtype=np.int64)
            ranks[order] = np.arange(1, order.size + 1)
            self._ranks = ranks
        return self._ranks

    @property
    def selected(self) -> np.ndarray:
        """K_n: the selected indices in distance order."""
        return self.iota[np.argsort(self._dist[self.iota], kind="stable")]

    @property
    def distances(self) -> np.ndarray:
        return self._dist

    def to_dict(self) -> dict:
        return {
            "s_n": self.s_n.tolist(),
            "iota": self.iota.tolist(),
            "r_k_plus_1": self.r_k_plus_1,
            "k": self.k,
        }


def distances(x, x0) -> np.ndarray:
    """Euclidean distances from each row of ``x`` to ``x0``."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.size == 1 and x.shape[1] > 1:
        x0 = np.full(x.shape[1], x0[0])
    if x0.size != x.shape[1]:
        raise ValueError("x0 must have one entry per covariate")
    diff = x - x0
    if x.shape[1] == 1:
        return np.abs(diff[:, 0])
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def _select(dist: np.ndarray, k: int) -> tuple[np.ndarray, float | None]:
    """Indices of the k smallest distances, ties to smaller index, plus R_(k+1)."""
    n = dist.size
    if k == n:
        return np.arange(n), None
    part = np.partition(dist, (k - 1, k))
    kth, nxt = part[k - 1], part[k]
    below = np.flatnonzero(dist < kth)
    ties = np.flatnonzero(dist == kth)
    chosen = np.concatenate([below, ties[: k - below.size]])
    chosen.sort()
    return chosen, float(nxt)


def extract(data: Dataset, x0, k: int) -> IosResult:
    """The k induced order statistics of ``data`` at ``x0``."""
    n = data.n
    if n == 0:
        raise ValueError("empty dataset")
    if not (1 <= k <= n):
        raise ValueError(f"k must lie in [1, n] = [1, {n}], got {k}")
    dist = distances(data.x, x0)
    iota, r_next = _select(dist, int(k))
    return IosResult(s_n=data.y[iota], iota=iota, k=int(k), r_k_plus_1=r_next, _dist=dist)


@dataclass
class TwoSidedIosResult:
    """Left and right IOS blocks at a cutoff; ``s_n`` stacks left then right."""

    s_n: np.ndarray
    iota: np.ndarray
    q: int
    left: IosResult
    right: IosResult
    n_at_cutoff: int

    @property
    def k(self) -> int:
        return 2 * self.q

    def to_dict(self) -> dict:
        return {"s_n": self.s_n.tolist(), "iota": self.iota.tolist(), "q": self.q,
                "n_at_cutoff": self.n_at_cutoff}


def extract_two_sided(data: Dataset, cutoff: float, q: int) -> TwoSidedIosResult:
    """q nearest outcomes strictly left of ``cutoff`` followed by q strictly right.

    Observations sitting exactly on the cutoff belong to neither side; they
    are dropped and counted in ``n_at_cutoff``.
    """
    if data.d != 1:
        raise ValueError("two-sided extraction needs a scalar running variable")
    if q < 1:
        raise ValueError("q must be >= 1")
    xs = data.x[:, 0]
    left_idx = np.flatnonzero(xs < cutoff)
    right_idx = np.flatnonzero(xs > cutoff)
    at = int(xs.size - left_idx.size - right_idx.size)
    if left_idx.size < q or right_idx.size < q:
        raise ValueError(
            f"need {q} points on each side of the cutoff; have {left_idx.size} left, {right_idx.size} right"
        )
    blocks = []
    for idx in (left_idx, right_idx):
        sub = Dataset(data.x[idx], data.y[idx])
        res = extract(sub, [cutoff], q)
        # map back to indices of the full dataset
        res.iota = idx[res.iota]
        blocks.append(res)
    s_n = np.vstack([blocks[0].s_n, blocks[1].s_n])
    iota = np.concatenate([blocks[0].iota, blocks[1].iota])
    return TwoSidedIosResult(s_n=s_n, iota=iota, q=int(q), left=blocks[0], right=blocks[1],
                             n_at_cutoff=at)
