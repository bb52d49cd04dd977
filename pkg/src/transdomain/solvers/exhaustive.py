"""Exhaustive l0 programs for small instances (ground truth for the solvers)."""

import itertools
import math
import time
import warnings

import numpy as np

from .._validation import check_count, check_matrix, check_vector
from ..numerics import least_squares, null_space
from .report import RecoveryReport

COMBINATORIAL_CAP = 100_000


def _batched_fit(A, y, supports):
    """Least-squares coefficients and residual norms for a stack of supports."""
    sub = A[:, supports].transpose(1, 0, 2)  # (S, m, k)
    coef = np.linalg.pinv(sub) @ y
    resid = np.linalg.norm(y[None, :] - np.einsum("smk,sk->sm", sub, coef), axis=1)
    return coef, resid


def brute_force_l0_synthesis(y, A, k, epsilon=1e-10, batch=8192):
    """Sparsest ``alpha`` with ``||y - A alpha||_2 <= epsilon`` and at most ``k`` nonzeros.

    Supports are scanned by increasing size; the first size with a feasible
    least-squares fit wins, ties going to the smaller residual and then to
    the lexicographically first support. If no support of size ``<= k`` is
    feasible, the best size-``k`` fit is returned with ``converged=False``.
    """
    t0 = time.perf_counter()
    A = check_matrix(A, "A")
    y = check_vector(y, "y", length=A.shape[0])
    k = check_count(k, "k", 0)
    n = A.shape[1]
    if math.comb(n, k) > COMBINATORIAL_CAP:
        raise ValueError(f"C({n}, {k}) supports exceed the enumeration cap of {COMBINATORIAL_CAP}")
    y_norm = float(np.linalg.norm(y))
    if y_norm <= epsilon or k == 0:
        feasible = y_norm <= epsilon
        return RecoveryReport(
            np.zeros(n), np.zeros(0, dtype=int), y_norm, 1, feasible, time.perf_counter() - t0, "brute_l0",
            "" if feasible else "infeasible at k=0",
        )
    checked = 1
    best = None
    for size in range(1, k + 1):
        combos = itertools.combinations(range(n), size)
        best_res, best_support, best_coef = np.inf, None, None
        while True:
            chunk = np.array(list(itertools.islice(combos, batch)), dtype=int)
            if chunk.size == 0:
                break
            coef, resid = _batched_fit(A, y, chunk)
            i = int(np.argmin(resid))  # first minimum keeps lexicographic order
            if resid[i] < best_res:
                best_res, best_support, best_coef = float(resid[i]), chunk[i], coef[i]
            checked += len(chunk)
        best = (best_res, best_support, best_coef)
        if best_res <= epsilon:
            break
    res, support, coef = best
    est = np.zeros(n)
    est[support] = coef
    feasible = res <= epsilon
    return RecoveryReport(
        est, np.asarray(support), float(np.linalg.norm(y - A @ est)), checked, feasible,
        time.perf_counter() - t0, "brute_l0", "" if feasible else f"no support of size <= {k} is feasible",
    )


def brute_force_l0_analysis(y, M, omega, cosparsity, epsilon=1e-10):
    """Most cosparse ``x`` with ``||y - M x||_2 <= epsilon`` and at least
    ``cosparsity`` zeros in ``Omega x``.

    Cosupports are scanned from size ``n`` down to ``cosparsity``; for each,
    ``x`` is fitted by least squares inside the null space of the selected
    rows. The largest feasible cosupport wins, ties by residual.
    """
    M = check_matrix(M, "M")
    y = check_vector(y, "y", length=M.shape[0])
    Om = np.asarray(getattr(omega, "matrix", omega), dtype=np.float64)
    n, d = Om.shape
    if M.shape[1] != d:
        raise ValueError(f"M has {M.shape[1]} columns, operator acts on R^{d}")
    cosparsity = check_count(cosparsity, "cosparsity", 0)
    if cosparsity > n:
        raise ValueError(f"cosparsity {cosparsity} exceeds the {n} operator rows")
    if math.comb(n, cosparsity) > COMBINATORIAL_CAP:
        raise ValueError(f"C({n}, {cosparsity}) cosupports exceed the enumeration cap")
    fallback_x, fallback_res = None, np.inf
    for size in range(n, cosparsity - 1, -1):
        best_x, best_res = None, np.inf
        for cos in itertools.combinations(range(n), size):
            N = null_space(Om[list(cos)])
            if N.shape[1] == 0:
                x, res = np.zeros(d), float(np.linalg.norm(y))
            else:
                fit = least_squares(M @ N, y)
                x, res = N @ fit.solution, fit.residual_norm
            if res < best_res:
                best_x, best_res = x, res
        if best_res <= epsilon:
            return best_x
        if best_res < fallback_res:
            fallback_x, fallback_res = best_x, best_res
    warnings.warn(f"no cosupport of size >= {cosparsity} is feasible; returning the best fit", RuntimeWarning)
    return fallback_x
