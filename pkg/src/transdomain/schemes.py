"""Transform-domain recovery pipelines and the standard analysis baseline.

All pipelines first recover a transform-domain proxy ``w_hat ~ Omega x``
with an unmodified synthesis program, then map it back to the signal
domain: by the frame pseudo-inverse, or by a constrained fit against extra
direct measurements ``y2 = B x + e2``.

``program`` may be a :class:`~transdomain.solvers.SynthesisProgramSpec` or
any scikit-learn style regressor exposing ``coef_`` after ``fit(A, y)``.
"""

import time
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from sklearn.base import BaseEstimator, clone

from ._validation import check_matrix, check_vector
from .operators import AnalysisOperator, dif_2d, frame_bounds
from .solvers import RecoveryReport, SynthesisProgramSpec, analysis_l1, constrained_transform_fit, run_program
from .solvers.report import support_of


@dataclass(eq=False)
class SchemeResult:
    x_hat: np.ndarray
    w_hat: Optional[np.ndarray]
    scheme: str
    program: Any = None
    diagnostics: dict = field(default_factory=dict)
    converged: bool = True


def solve_proxy(program, y, A, noise_budget=None, k=None):
    """Run a synthesis program as a black box and return its report."""
    if isinstance(program, SynthesisProgramSpec):
        spec = program.with_k(k) if k is not None else program
        return run_program(spec, y, A, noise_budget)
    if not hasattr(program, "fit"):
        raise TypeError(f"program must be a SynthesisProgramSpec or an estimator, got {type(program).__name__}")
    t0 = time.perf_counter()
    est = clone(program).fit(A, y)
    coef = np.asarray(est.coef_, dtype=np.float64).ravel()
    return RecoveryReport(
        coef, support_of(coef), float(np.linalg.norm(y - A @ coef)),
        int(np.max(getattr(est, "n_iter_", 0) or 0)), bool(getattr(est, "converged_", True)),
        time.perf_counter() - t0, type(program).__name__,
    )


def _as_operator(omega):
    if isinstance(omega, AnalysisOperator):
        return omega
    return AnalysisOperator(omega, "frame")


def recover_frame_scheme(y, A, omega, program, noise_budget=None, k=None):
    """Frame pipeline: ``w_hat = program(y | A, k)``, ``x_hat = Omega^+ w_hat``."""
    omega = _as_operator(omega)
    A = check_matrix(A, "A")
    y = check_vector(y, "y", length=A.shape[0])
    if A.shape[1] != omega.n:
        raise ValueError(f"A has {A.shape[1]} columns but the operator has {omega.n} rows")
    bounds = frame_bounds(omega)
    if not bounds.is_frame:
        raise ValueError("frame scheme requires lower frame bound > 0")
    report = solve_proxy(program, y, A, noise_budget, k)
    w_hat = report.estimate
    x_hat = omega.pinv @ w_hat
    diagnostics = {
        "proxy_residual": float(np.linalg.norm(y - A @ w_hat)),
        "lower_frame_bound": bounds.lower,
        "proxy_iterations": float(report.iterations),
        "proxy_time": report.wall_time,
    }
    return SchemeResult(x_hat, w_hat, "frame_scheme", program, diagnostics, report.converged)


def recover_general_scheme(y1, y2, A, B, omega, program, epsilon2=0.0, p=1, noise_budget=None, k=None,
                           method="auto"):
    """Two-stage pipeline: proxy from ``y1 = A Omega x + e1``, then
    ``x_hat = argmin ||Omega x - w_hat||_p  s.t.  ||B x - y2||_2 <= epsilon2``."""
    omega = _as_operator(omega)
    A = check_matrix(A, "A")
    B = check_matrix(B, "B", allow_empty_rows=True)
    if B.shape[0] < 1:
        raise ValueError("general scheme requires B rows >= 1")
    y1 = check_vector(y1, "y1", length=A.shape[0])
    y2 = check_vector(y2, "y2", length=B.shape[0])
    if A.shape[1] != omega.n:
        raise ValueError(f"A has {A.shape[1]} columns but the operator has {omega.n} rows")
    if B.shape[1] != omega.d:
        raise ValueError(f"B has {B.shape[1]} columns but signals have dimension {omega.d}")
    report = solve_proxy(program, y1, A, noise_budget, k)
    w_hat = report.estimate
    fit = constrained_transform_fit(omega, w_hat, B, y2, epsilon2, p=p, method=method)
    diagnostics = {
        "proxy_residual": float(np.linalg.norm(y1 - A @ w_hat)),
        "fit_objective": fit.objective,
        "fit_constraint_residual": fit.constraint_residual,
        "proxy_iterations": float(report.iterations),
        "fit_iterations": float(fit.iterations),
        "proxy_time": report.wall_time,
        "fit_time": fit.wall_time,
    }
    return SchemeResult(fit.x, w_hat, "general_scheme", program, diagnostics, report.converged and fit.converged)


def recover_dif_scheme(y1, y2, A, B, N, program, epsilon2=0.0, noise_budget=None, k=None, method="auto"):
    """Two-stage pipeline specialized to 2-D finite differences on ``N x N`` images (``p = 1``)."""
    res = recover_general_scheme(y1, y2, A, B, dif_2d(N), program, epsilon2, 1, noise_budget, k, method)
    res.scheme = "dif_scheme"
    return res


def recover_analysis_baseline(y, M, omega, epsilon=0.0, method="auto"):
    """Standard sampling with analysis l1: ``min ||Omega x||_1  s.t.  ||y - M x||_2 <= epsilon``."""
    sol = analysis_l1(y, M, omega, epsilon, method=method)
    diagnostics = {
        "objective": sol.objective,
        "constraint_residual": sol.constraint_residual,
        "iterations": float(sol.iterations),
        "time": sol.wall_time,
    }
    return SchemeResult(sol.x, None, "analysis_baseline", None, diagnostics, sol.converged)


class FrameSchemeRecovery(BaseEstimator):
    """Estimator form of the frame pipeline; ``fit(A, y)`` sets ``signal_``."""

    def __init__(self, analysis_operator=None, program=None, noise_budget=None):
        self.analysis_operator = analysis_operator
        self.program = program
        self.noise_budget = noise_budget

    def fit(self, X, y):
        res = recover_frame_scheme(y, X, self.analysis_operator, self.program, self.noise_budget)
        self.signal_ = res.x_hat
        self.proxy_ = res.w_hat
        self.result_ = res
        return self


class TwoStageRecovery(BaseEstimator):
    """Estimator form of the two-stage pipeline; ``fit(A, y1, B=B, y2=y2)``."""

    def __init__(self, analysis_operator=None, program=None, p=1, epsilon2=0.0, noise_budget=None):
        self.analysis_operator = analysis_operator
        self.program = program
        self.p = p
        self.epsilon2 = epsilon2
        self.noise_budget = noise_budget

    def fit(self, X, y, B=None, y2=None):
        if B is None or y2 is None:
            raise ValueError("TwoStageRecovery.fit needs the direct measurements B and y2")
        res = recover_general_scheme(y, y2, X, B, self.analysis_operator, self.program, self.epsilon2,
                                     self.p, self.noise_budget)
        self.signal_ = res.x_hat
        self.proxy_ = res.w_hat
        self.result_ = res
        return self


class AnalysisL1Recovery(BaseEstimator):
    def __init__(self, analysis_operator=None, epsilon=0.0):
        self.analysis_operator = analysis_operator
        self.epsilon = epsilon

    def fit(self, X, y):
        res = recover_analysis_baseline(y, X, self.analysis_operator, self.epsilon)
        self.signal_ = res.x_hat
        self.result_ = res
        return self
