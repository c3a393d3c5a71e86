"""scikit-learn compatible wrappers around the solvers.

The measurement matrix plays the role of ``X`` (rows are measurements,
columns are dictionary atoms) and the data vector is ``y``; the
recovered sparse signal ends up in ``coef_``::

    est = AdaptiveNSTRegressor(schedule="quad").fit(A, y)
    est.coef_, est.n_iter_, est.status_

Complex operators are accepted, unlike most scikit-learn linear models.
"""
import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_matrix, check_system
from .schedules import Schedule, parse_schedule
from .solvers import SolverConfig, adpt_nst_ht_fb, ghtp, gomp, htp, iht, nst_ht_fb, omp, resolve_step

__all__ = [
    "AdaptiveNSTRegressor",
    "NSTRegressor",
    "OMPRegressor",
    "GOMPRegressor",
    "IHTRegressor",
    "HTPRegressor",
    "GHTPRegressor",
]


def _schedule(value):
    return value if isinstance(value, Schedule) else parse_schedule(value)


class _SparseRecoveryBase(RegressorMixin, BaseEstimator):
    """Shared fit/predict plumbing; subclasses implement ``_solve``."""

    def _config(self):
        return SolverConfig(
            epsilon=self.epsilon,
            max_iters=self.max_iter,
            record_history=getattr(self, "record_history", False),
        )

    def fit(self, X, y):
        A, y = check_system(X, y)
        result = self._solve(A, y)
        self.coef_ = result.estimate
        self.n_iter_ = result.iterations
        self.status_ = result.status
        self.result_ = result
        self.support_ = np.flatnonzero(result.estimate)
        self.n_features_in_ = A.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = check_matrix(X, "X")
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, estimator was fitted with {self.n_features_in_}"
            )
        return X @ self.coef_


class AdaptiveNSTRegressor(_SparseRecoveryBase):
    """Null-space tuning + hard thresholding + f-feedback with a support-size schedule.

    Parameters
    ----------
    schedule : str or Schedule, default="quad"
        Support size per iteration, e.g. ``"quad"``, ``"lin:2"``, ``"const:10"``.
    epsilon : float, default=1e-10
        Absolute residual tolerance.
    max_iter : int, default=100
    feedback_mode : {"ls", "tail"}, default="ls"
    record_history : bool, default=False

    Attributes
    ----------
    coef_ : ndarray of shape (n_features,)
    support_ : ndarray of int
    n_iter_ : int
    status_ : Status
    result_ : SolveResult
    """

    def __init__(self, schedule="quad", epsilon=1e-10, max_iter=100, feedback_mode="ls",
                 record_history=False):
        self.schedule = schedule
        self.epsilon = epsilon
        self.max_iter = max_iter
        self.feedback_mode = feedback_mode
        self.record_history = record_history

    def _solve(self, A, y):
        return adpt_nst_ht_fb(A, y, _schedule(self.schedule), self._config(),
                              feedback_mode=self.feedback_mode)


class NSTRegressor(_SparseRecoveryBase):
    """Fixed-sparsity variant (constant schedule ``f(k) = n_nonzero_coefs``)."""

    def __init__(self, n_nonzero_coefs=10, epsilon=1e-10, max_iter=100):
        self.n_nonzero_coefs = n_nonzero_coefs
        self.epsilon = epsilon
        self.max_iter = max_iter

    def _solve(self, A, y):
        return nst_ht_fb(A, y, self.n_nonzero_coefs, self._config())


class GOMPRegressor(_SparseRecoveryBase):
    """Generalized OMP adding ``n_per_iter`` atoms per iteration."""

    def __init__(self, n_per_iter=1, max_support=None, epsilon=1e-10, max_iter=100):
        self.n_per_iter = n_per_iter
        self.max_support = max_support
        self.epsilon = epsilon
        self.max_iter = max_iter

    def _solve(self, A, y):
        return gomp(A, y, self.n_per_iter, self.max_support, self._config())


class OMPRegressor(_SparseRecoveryBase):
    """Orthogonal matching pursuit."""

    def __init__(self, max_support=None, epsilon=1e-10, max_iter=100):
        self.max_support = max_support
        self.epsilon = epsilon
        self.max_iter = max_iter

    def _solve(self, A, y):
        return omp(A, y, self.max_support, self._config())


class IHTRegressor(_SparseRecoveryBase):
    """Iterative hard thresholding; ``step="auto"`` uses ``1 / ||A||_2^2``."""

    def __init__(self, n_nonzero_coefs=10, step=1.0, epsilon=1e-10, max_iter=500):
        self.n_nonzero_coefs = n_nonzero_coefs
        self.step = step
        self.epsilon = epsilon
        self.max_iter = max_iter

    def _solve(self, A, y):
        return iht(A, y, self.n_nonzero_coefs, resolve_step(self.step, A), self._config())


class HTPRegressor(_SparseRecoveryBase):
    """Hard thresholding pursuit."""

    def __init__(self, n_nonzero_coefs=10, step=1.0, epsilon=1e-10, max_iter=100):
        self.n_nonzero_coefs = n_nonzero_coefs
        self.step = step
        self.epsilon = epsilon
        self.max_iter = max_iter

    def _solve(self, A, y):
        return htp(A, y, self.n_nonzero_coefs, resolve_step(self.step, A), self._config())


class GHTPRegressor(_SparseRecoveryBase):
    """Graded hard thresholding pursuit with a support-size schedule."""

    def __init__(self, schedule="lin:1", step=1.0, epsilon=1e-10, max_iter=100):
        self.schedule = schedule
        self.step = step
        self.epsilon = epsilon
        self.max_iter = max_iter

    def _solve(self, A, y):
        return ghtp(A, y, _schedule(self.schedule), resolve_step(self.step, A), self._config())
