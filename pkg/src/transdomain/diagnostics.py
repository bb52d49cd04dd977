"""Bound-level diagnostics: cosparse tails, frame error identity, Sobolev check."""

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_count, check_matrix, check_vector
from .operators import bivariate_haar, dif_2d, frame_bounds, is_power_of_two

# constant of the strong Sobolev inequality for the bivariate Haar system
C_HAAR = 36.0 * (480.0 * math.sqrt(5.0) + 168.0 * math.sqrt(3.0))


@dataclass(frozen=True)
class TailReport:
    T: np.ndarray
    l2_tail: float
    l1_tail: float
    k: int


def top_k_indices(v, k):
    """Indices of the ``k`` largest |v|, ties to the lowest index, sorted."""
    return np.sort(np.argsort(-np.abs(v), kind="stable")[:k])


def cosparse_tail(omega, x, k):
    """Energy of ``Omega x`` outside its ``k`` largest entries."""
    k = check_count(k, "k", 0)
    if k > omega.n:
        raise ValueError(f"k={k} exceeds the {omega.n} operator rows")
    v = omega.matrix @ check_vector(x, "x", length=omega.d)
    T = top_k_indices(v, k)
    tail = np.delete(v, T)
    return TailReport(T, float(np.linalg.norm(tail)), float(np.sum(np.abs(tail))), k)


def frame_error_bound(omega, x, x_hat, w_hat):
    """``(||x_hat - x||_2, ||w_hat - Omega x||_2 / A)`` for the frame pipeline.

    The first never exceeds the second when ``x_hat = Omega^+ w_hat``.
    """
    A = frame_bounds(omega).lower
    err = float(np.linalg.norm(x_hat - x))
    proxy_err = float(np.linalg.norm(w_hat - omega.matrix @ x))
    return err, (proxy_err / A if A > 0 else np.inf)


def haar_sparsity_check(x, N, threshold=1e-9):
    """Compare ``||H x||_0`` with ``||Omega_2D x||_0 * log2(N^2)``.

    The gradient count is floored at 1 so a constant image (one DC
    coefficient, no gradient) is measured against ``log2(N^2)``.
    """
    H = bivariate_haar(N).matrix
    haar_nnz = int(np.sum(np.abs(H @ x) > threshold))
    grad_nnz = int(np.sum(np.abs(dif_2d(N).matrix @ x) > threshold))
    bound = max(grad_nnz, 1) * math.log2(N * N)
    return {"haar_nnz": haar_nnz, "gradient_nnz": grad_nnz, "bound": bound, "holds": haar_nnz <= bound}


def sobolev_check(B, N, z, k, delta_hat):
    """Evaluate both sides of the strong Sobolev inequality for ``z``.

    ``rhs = 2 C_H / (1 - delta) / sqrt(k) * log2(d / k) * ||Omega_2D z||_1
    + ||B z||_2 / (1 - delta)``.
    """
    N = check_count(N, "N", 2)
    if not is_power_of_two(N):
        raise ValueError("N must be a power of 2")
    if delta_hat >= 1:
        raise ValueError("the inequality needs a restricted isometry constant below 1")
    d = N * N
    k = check_count(k, "k", 1)
    z = check_vector(z, "z", length=d)
    B = check_matrix(B, "B")
    if B.shape[1] != d:
        raise ValueError(f"B has {B.shape[1]} columns, expected {d}")
    grad_l1 = float(np.sum(np.abs(dif_2d(N).matrix @ z)))
    meas = float(np.linalg.norm(B @ z))
    scale = 1.0 / (1.0 - delta_hat)
    grad_term = 2.0 * C_HAAR * scale / math.sqrt(k) * max(math.log2(d / k), 0.0) * grad_l1
    lhs = float(np.linalg.norm(z))
    rhs = grad_term + scale * meas
    return {
        "lhs": lhs,
        "rhs": rhs,
        "gradient_term": grad_term,
        "measurement_term": scale * meas,
        "C_H": C_HAAR,
        "holds": bool(lhs <= rhs * (1 + 1e-12)),
    }
