"""scikit-learn estimators wrapping the synthesis solvers.

``X`` plays the role of the sensing matrix ``A`` and ``y`` of the
measurements, matching :class:`sklearn.linear_model.OrthogonalMatchingPursuit`;
``coef_`` is the recovered sparse vector.
"""

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, validate_data

from .convex import l1_bpdn
from .greedy import cosamp, iht, omp


class _SynthesisRegressor(RegressorMixin, BaseEstimator):
    def _solve(self, y, A):
        raise NotImplementedError

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=np.float64, y_numeric=True)
        self.n_features_in_ = X.shape[1]
        report = self._solve(y, X)
        self.coef_ = report.estimate
        self.support_ = report.support
        self.n_iter_ = report.iterations
        self.converged_ = report.converged
        self.report_ = report
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, reset=False, dtype=np.float64)
        return X @ self.coef_


class OMP(_SynthesisRegressor):
    def __init__(self, n_nonzero_coefs=1, tol=1e-10):
        self.n_nonzero_coefs = n_nonzero_coefs
        self.tol = tol

    def _solve(self, y, A):
        return omp(y, A, self.n_nonzero_coefs, tol=self.tol)


class CoSaMP(_SynthesisRegressor):
    def __init__(self, n_nonzero_coefs=1, max_iter=100, tol=1e-10):
        self.n_nonzero_coefs = n_nonzero_coefs
        self.max_iter = max_iter
        self.tol = tol

    def _solve(self, y, A):
        return cosamp(y, A, self.n_nonzero_coefs, max_iters=self.max_iter, tol=self.tol)


class IHT(_SynthesisRegressor):
    def __init__(self, n_nonzero_coefs=1, step="auto", max_iter=3000, tol=1e-10):
        self.n_nonzero_coefs = n_nonzero_coefs
        self.step = step
        self.max_iter = max_iter
        self.tol = tol

    def _solve(self, y, A):
        return iht(y, A, self.n_nonzero_coefs, step=self.step, max_iters=self.max_iter, tol=self.tol)


class BPDN(_SynthesisRegressor):
    """Basis pursuit denoising with an explicit residual budget ``epsilon``."""

    def __init__(self, epsilon=0.0, method="auto"):
        self.epsilon = epsilon
        self.method = method

    def _solve(self, y, A):
        return l1_bpdn(y, A, epsilon=self.epsilon, method=self.method)
