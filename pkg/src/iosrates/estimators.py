"""scikit-learn style wrappers around the IOS machinery."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .dgp import Dataset
from .ios import extract, extract_two_sided
from .knn import cdf_estimator, mean_estimator, quantile_estimator
from .rdd import permutation_test, q_rule

__all__ = ["InducedOrderStatistics", "IOSRegressor", "RDDBalanceTest"]


def _dataset(X, y) -> Dataset:
    X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
    return Dataset(X, y)


class InducedOrderStatistics(BaseEstimator):
    """Extract the k induced order statistics at ``x0``.

    After ``fit``: ``s_n_`` (k x m), ``iota_`` (selected rows in sample
    order), ``ranks_`` (1-based distance ranks) and ``r_k_plus_1_``.
    """

    def __init__(self, x0=0.0, k: int = 1):
        self.x0 = x0
        self.k = k

    def fit(self, X, y):
        data = _dataset(X, y)
        res = extract(data, self.x0, self.k)
        self.result_ = res
        self.s_n_ = res.s_n
        self.iota_ = res.iota
        self.ranks_ = res.ranks
        self.r_k_plus_1_ = res.r_k_plus_1
        self.n_features_in_ = data.d
        return self

    def fit_transform(self, X, y):
        return self.fit(X, y).s_n_


class IOSRegressor(RegressorMixin, BaseEstimator):
    """k-nearest-neighbour regression through a functional of the IOS.

    ``statistic`` is ``"mean"``, ``"cdf"`` (needs ``t``) or ``"quantile"``
    (needs ``tau``); predictions use the first outcome column for the latter
    two.
    """

    def __init__(self, k: int = 5, statistic: str = "mean", t: float | None = None,
                 tau: float | None = None):
        self.k = k
        self.statistic = statistic
        self.t = t
        self.tau = tau

    def fit(self, X, y):
        if self.statistic not in ("mean", "cdf", "quantile"):
            raise ValueError(f"unknown statistic {self.statistic!r}")
        if self.statistic == "cdf" and self.t is None:
            raise ValueError("statistic='cdf' needs t")
        if self.statistic == "quantile" and self.tau is None:
            raise ValueError("statistic='quantile' needs tau")
        X, y = check_X_y(X, y, multi_output=True, y_numeric=True)
        if not 1 <= self.k <= X.shape[0]:
            raise ValueError("k must lie in [1, n_samples]")
        self.X_fit_ = X
        self.y_fit_ = y
        self.n_features_in_ = X.shape[1]
        return self

    def _psi(self, s):
        if self.statistic == "mean":
            return mean_estimator(s)
        if self.statistic == "cdf":
            return np.array([cdf_estimator(s[:, 0] if s.ndim == 2 else s, self.t)])
        return np.array([quantile_estimator(s[:, 0] if s.ndim == 2 else s, self.tau)])

    def predict(self, X):
        check_is_fitted(self, "X_fit_")
        X = check_array(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError("X has a different number of features than during fit")
        data = Dataset(self.X_fit_, self.y_fit_)
        out = np.array([self._psi(extract(data, x, self.k).s_n) for x in X])
        return out[:, 0] if out.shape[1] == 1 else out


class RDDBalanceTest(BaseEstimator):
    """Permutation CvM test of covariate balance at a cutoff.

    Uses ``q`` neighbours per side, or ``q = max(2, floor(c n^gamma))`` when
    ``q`` is None.  After ``fit``: ``statistic_``, ``p_value_``, ``reject_``,
    ``q_`` and the full ``result_``.
    """

    def __init__(self, cutoff: float = 0.0, q: int | None = None, gamma: float = 0.5,
                 c: float = 1.0, alpha: float = 0.05, max_exact: int = 200_000,
                 n_random: int = 9_999, random_state: int = 0):
        self.cutoff = cutoff
        self.q = q
        self.gamma = gamma
        self.c = c
        self.alpha = alpha
        self.max_exact = max_exact
        self.n_random = n_random
        self.random_state = random_state

    def fit(self, X, y):
        data = _dataset(X, y)
        q = self.q if self.q is not None else q_rule(data.n, self.gamma, self.c)
        ext = extract_two_sided(data, self.cutoff, q)
        res = permutation_test(ext.s_n, alpha=self.alpha, max_exact=self.max_exact,
                               n_random=self.n_random, seed=int(self.random_state))
        self.q_ = q
        self.s_n_ = ext.s_n
        self.n_at_cutoff_ = ext.n_at_cutoff
        self.result_ = res
        self.statistic_ = res.statistic
        self.p_value_ = res.p_value
        self.reject_ = res.reject
        return self
