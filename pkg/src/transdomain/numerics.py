"""Dense linear algebra kernel: SVD, pseudo-inverse, least squares, projections.

The SVD itself is LAPACK's (through :func:`numpy.linalg.svd`); everything
else in the package goes through the functions here so rank decisions use
one convention: singular values at or below ``rank_tol * sigma_max`` are
treated as zero, with ``rank_tol`` defaulting to ``1e-10 * max(rows, cols)``.
"""

import csv
from typing import NamedTuple

import numpy as np

from ._validation import check_matrix, check_vector


class SVDConvergenceError(np.linalg.LinAlgError):
    """Raised when the SVD iteration fails to converge."""


class SvdFactors(NamedTuple):
    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray

    def reconstruct(self):
        return (self.left_vectors * self.singular_values) @ self.right_vectors.T


class LeastSquaresResult(NamedTuple):
    solution: np.ndarray
    residual_norm: float
    rank: int
    rank_deficient: bool


def default_rank_tol(shape):
    return 1e-10 * max(shape)


def svd(M, full_matrices=False):
    """Thin singular value decomposition ``M = U diag(s) V^T``.

    ``right_vectors`` holds V (not V^T), column-orthonormal like ``U``.
    """
    M = check_matrix(M, "M", allow_empty_rows=True)
    if M.size == 0:
        k = 0
        return SvdFactors(np.zeros((M.shape[0], k)), np.zeros(k), np.zeros((M.shape[1], k)))
    try:
        U, s, Vt = np.linalg.svd(M, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        # LAPACK gesdd reports non-convergence of its internal bidiagonal QR
        raise SVDConvergenceError(f"SVD did not converge for {M.shape} matrix: {exc}") from exc
    return SvdFactors(U, s, Vt.T)


def _cutoff(s, shape, rank_tol):
    if rank_tol is None:
        rank_tol = default_rank_tol(shape)
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    return rank_tol * (s[0] if s.size else 0.0)


def numerical_rank(M, rank_tol=None):
    M = check_matrix(M, "M", allow_empty_rows=True)
    if M.size == 0:
        return 0
    s = svd(M).singular_values
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > _cutoff(s, M.shape, rank_tol)))


def singular_value_extremes(M):
    """Return ``(sigma_min, sigma_max)`` over the min(rows, cols) singular values."""
    M = check_matrix(M, "M", allow_empty_rows=True)
    s = svd(M).singular_values
    if s.size == 0:
        return 0.0, 0.0
    return float(s[-1]), float(s[0])


def pseudo_inverse(M, rank_tol=None):
    """Moore-Penrose pseudo-inverse with relative singular-value truncation.

    An all-zero matrix maps to the zero matrix of transposed shape.
    """
    M = check_matrix(M, "M", allow_empty_rows=True)
    f = svd(M)
    s = f.singular_values
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((M.shape[1], M.shape[0]))
    keep = s > _cutoff(s, M.shape, rank_tol)
    U, V = f.left_vectors[:, keep], f.right_vectors[:, keep]
    return (V / s[keep]) @ U.T


def least_squares(A, b, rank_tol=None):
    """Minimum-norm solution of ``argmin ||Ax - b||_2``.

    ``rank_deficient`` is set when A does not have full column rank.
    """
    A = check_matrix(A, "A", allow_empty_rows=True)
    b = check_vector(b, "b", length=A.shape[0])
    f = svd(A)
    s = f.singular_values
    if s.size == 0 or s[0] == 0.0:
        x = np.zeros(A.shape[1])
        return LeastSquaresResult(x, float(np.linalg.norm(b)), 0, True)
    keep = s > _cutoff(s, A.shape, rank_tol)
    rank = int(keep.sum())
    x = f.right_vectors[:, keep] @ ((f.left_vectors[:, keep].T @ b) / s[keep])
    res = float(np.linalg.norm(b - A @ x))
    return LeastSquaresResult(x, res, rank, rank < A.shape[1])


def null_space(M, rank_tol=None):
    """Orthonormal basis (columns) of the null space of ``M``."""
    M = check_matrix(M, "M", allow_empty_rows=True)
    d = M.shape[1]
    if M.shape[0] == 0:
        return np.eye(d)
    s = np.linalg.svd(M, compute_uv=False)
    rank = 0 if s[0] == 0.0 else int(np.sum(s > _cutoff(s, M.shape, rank_tol)))
    _, _, Vt = np.linalg.svd(M, full_matrices=True)
    return Vt[rank:].T.copy()


def project_out_rows(R, v, rank_tol=None):
    """Project ``v`` onto the orthogonal complement of the row space of ``R``."""
    R = check_matrix(R, "R", allow_empty_rows=True)
    v = check_vector(v, "v", length=R.shape[1])
    if R.shape[0] == 0:
        return v.copy()
    return v - pseudo_inverse(R, rank_tol) @ (R @ v)


# --- matrix CSV format: header "rows,cols" then one row per line -----------

def _fmt(value):
    return format(float(value), ".17g")


def write_matrix_csv(path, M):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([M.shape[0], M.shape[1]])
        for row in M:
            writer.writerow([_fmt(v) for v in row])


def read_matrix_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty matrix file") from None
        if len(header) != 2:
            raise ValueError(f"{path}: first line must be 'rows,cols'")
        rows, cols = int(header[0]), int(header[1])
        data = [[float(v) for v in line] for line in reader if line]
    if len(data) != rows or any(len(r) != cols for r in data):
        raise ValueError(f"{path}: header says {rows}x{cols} but payload disagrees")
    return np.array(data, dtype=np.float64).reshape(rows, cols)


def write_vector_csv(path, v):
    write_matrix_csv(path, np.asarray(v, dtype=np.float64).reshape(-1, 1))


def read_vector_csv(path):
    M = read_matrix_csv(path)
    if M.shape[1] != 1 and M.shape[0] != 1:
        raise ValueError(f"{path}: expected a vector, got {M.shape[0]}x{M.shape[1]}")
    return M.ravel()
