"""Greedy sparse recovery: OMP, CoSaMP and iterative hard thresholding."""

import time

import numpy as np

from .._validation import check_count, check_matrix, check_vector
from ..numerics import least_squares, singular_value_extremes
from .report import RecoveryReport, hard_threshold


def _prepare(y, A, k):
    A = check_matrix(A, "A")
    y = check_vector(y, "y", length=A.shape[0])
    k = check_count(k, "k", 1)
    return y, A, k


def omp(y, A, k, tol=1e-10):
    """Orthogonal matching pursuit.

    Adds the column with the largest normalized correlation to the residual,
    re-fits by least squares on the selected columns, and stops after ``k``
    atoms or once ``||r||_2 <= tol``.
    """
    t0 = time.perf_counter()
    y, A, k = _prepare(y, A, k)
    m, n = A.shape
    if k > min(m, n):
        raise ValueError(f"k={k} exceeds min(rows, cols) = {min(m, n)}")
    col_norms = np.linalg.norm(A, axis=0)
    col_norms[col_norms == 0] = np.inf
    support = []
    coef = np.zeros(0)
    r = y.copy()
    converged = True
    message = ""
    it = 0
    while len(support) < k and np.linalg.norm(r) > tol:
        it += 1
        corr = np.abs(A.T @ r) / col_norms
        corr[support] = -1.0
        j = int(np.argmax(corr))
        fit = least_squares(A[:, support + [j]], y)
        if fit.rank_deficient:
            converged = False
            message = f"column {j} is dependent on the current support; stopped early"
            break
        support.append(j)
        coef = fit.solution
        r = y - A[:, support] @ coef
    est = np.zeros(n)
    est[support] = coef
    order = np.argsort(support)
    return RecoveryReport(
        est, np.asarray(support, dtype=int)[order], float(np.linalg.norm(y - A @ est)), it,
        converged, time.perf_counter() - t0, "omp", message,
    )


def cosamp(y, A, k, max_iters=100, tol=1e-10):
    """Compressive sampling matching pursuit.

    Each iteration merges the ``2k`` largest proxy entries ``A^T r`` with the
    current support, solves least squares on the merged set and prunes back to
    ``k`` entries. Halts when the residual falls below ``tol`` or its relative
    change per iteration does.
    """
    t0 = time.perf_counter()
    y, A, k = _prepare(y, A, k)
    m, n = A.shape
    if k > n:
        raise ValueError(f"k={k} exceeds the {n} columns")
    est = np.zeros(n)
    r = y.copy()
    r_norm = float(np.linalg.norm(r))
    flags = {"rank_deficient": False}
    if r_norm <= tol:
        return RecoveryReport(est, np.zeros(0, dtype=int), r_norm, 1, True, time.perf_counter() - t0, "cosamp")
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        proxy = A.T @ r
        omega = np.argsort(-np.abs(proxy), kind="stable")[: 2 * k]
        merged = np.union1d(omega, np.flatnonzero(est))
        fit = least_squares(A[:, merged], y)
        flags["rank_deficient"] |= fit.rank_deficient
        b = np.zeros(n)
        b[merged] = fit.solution
        new_est = hard_threshold(b, k)
        new_r = y - A @ new_est
        new_norm = float(np.linalg.norm(new_r))
        if new_norm <= tol:
            est, converged = new_est, True
            break
        if abs(r_norm - new_norm) <= tol * r_norm:
            if new_norm < r_norm:
                est = new_est
            converged = True
            break
        est, r, r_norm = new_est, new_r, new_norm
    message = "minimum-norm projection on a rank-deficient merged set" if flags["rank_deficient"] else ""
    return RecoveryReport(
        est, np.flatnonzero(est), float(np.linalg.norm(y - A @ est)), it, converged,
        time.perf_counter() - t0, "cosamp", message, flags,
    )


def iht(y, A, k, step="auto", max_iters=3000, tol=1e-10):
    """Iterative hard thresholding ``alpha <- H_k(alpha + step A^T (y - A alpha))``.

    ``step="auto"`` uses ``1 / sigma_max(A)^2``. Aborts (``converged=False``)
    when the residual grows in ten consecutive iterations to at least twice
    its size ten iterations earlier.
    """
    t0 = time.perf_counter()
    y, A, k = _prepare(y, A, k)
    n = A.shape[1]
    if k > n:
        raise ValueError(f"k={k} exceeds the {n} columns")
    if step == "auto":
        smax = singular_value_extremes(A)[1]
        step = 1.0 / smax**2 if smax > 0 else 1.0
    alpha = np.zeros(n)
    history = [float(np.linalg.norm(y))]
    converged = False
    message = ""
    it = 0
    for it in range(1, max_iters + 1):
        new = hard_threshold(alpha + step * (A.T @ (y - A @ alpha)), k)
        change = np.linalg.norm(new - alpha)
        alpha = new
        history.append(float(np.linalg.norm(y - A @ alpha)))
        if change <= tol * max(np.linalg.norm(alpha), 1e-300) or history[-1] <= tol:
            converged = True
            break
        recent = history[-11:]
        if len(recent) == 11 and all(b > a for a, b in zip(recent, recent[1:])) and recent[-1] >= 2 * recent[0]:
            message = "diverging: residual doubled over ten increasing iterations"
            break
    return RecoveryReport(
        alpha, np.flatnonzero(alpha), history[-1], it, converged,
        time.perf_counter() - t0, "iht", message, {"step": float(step)},
    )
