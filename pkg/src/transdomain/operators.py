"""Analysis operators: random tight frames, finite differences, 2-D Haar.

Images are column-stacked throughout: pixel ``(i, j)`` of an ``N x N`` image
sits at index ``i + N * j`` (``image.flatten(order="F")``).
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import NamedTuple, Optional

import numpy as np

from ._validation import check_count, check_matrix
from .numerics import pseudo_inverse, read_matrix_csv, svd, write_matrix_csv


class OperatorKind(str, Enum):
    FRAME = "frame"
    DIF2D = "dif2d"
    DIFLD = "difLd"
    PARTIAL_FRAME = "partial_frame"
    HAAR = "haar"


class FrameBounds(NamedTuple):
    lower: float
    upper: float
    is_frame: bool


@dataclass(eq=False)
class AnalysisOperator:
    """An ``n x d`` analysis operator with metadata.

    The matrix is made read-only on construction. Frame bounds are filled in
    lazily by :func:`frame_bounds` and cached on the instance.
    """

    matrix: np.ndarray
    kind: OperatorKind
    lower_frame_bound: Optional[float] = None
    upper_frame_bound: Optional[float] = None
    geometry: Optional[tuple] = None
    seed: Optional[int] = None
    _is_frame: Optional[bool] = field(default=None, repr=False)

    def __post_init__(self):
        self.kind = OperatorKind(self.kind)
        matrix = check_matrix(self.matrix, "analysis operator").copy()
        matrix.setflags(write=False)
        self.matrix = matrix
        if self.geometry is not None:
            self.geometry = tuple(int(g) for g in self.geometry)

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def n(self):
        return self.matrix.shape[0]

    @property
    def d(self):
        return self.matrix.shape[1]

    @cached_property
    def pinv(self):
        return pseudo_inverse(self.matrix)

    def __matmul__(self, other):
        return self.matrix @ other

    def rows(self, index):
        return self.matrix[np.asarray(index, dtype=int)]


def frame_bounds(op):
    """Lower/upper frame bounds (extreme singular values) of ``op``.

    A rank-deficient operator reports ``lower = 0`` and ``is_frame = False``.
    """
    if op.lower_frame_bound is not None and op._is_frame is not None:
        return FrameBounds(op.lower_frame_bound, op.upper_frame_bound, op._is_frame)
    s = svd(op.matrix).singular_values
    upper = float(s[0])
    lower = float(s[-1]) if op.n >= op.d else 0.0
    # same relative cutoff as numerics.numerical_rank
    is_frame = op.n >= op.d and lower > 1e-10 * max(op.shape) * upper
    if not is_frame:
        lower = 0.0
    op.lower_frame_bound, op.upper_frame_bound, op._is_frame = lower, upper, is_frame
    return FrameBounds(lower, upper, is_frame)


def random_tight_frame(n, d, seed=None):
    """Random Parseval frame (``Omega^T Omega = I_d``) with ``n`` rows.

    Built from the polar factor ``U V^T`` of an ``n x d`` Gaussian matrix.
    """
    n = check_count(n, "n", 1)
    d = check_count(d, "d", 1)
    if n < d:
        raise ValueError(f"a frame for R^{d} needs at least {d} rows, got n={n}")
    rng = np.random.default_rng(seed)
    f = svd(rng.standard_normal((n, d)))
    op = AnalysisOperator(f.left_vectors @ f.right_vectors.T, OperatorKind.FRAME, seed=seed)
    frame_bounds(op)
    return op


def _diff_1d(n):
    D = np.zeros((n - 1, n))
    idx = np.arange(n - 1)
    D[idx, idx] = -1.0
    D[idx, idx + 1] = 1.0
    return D


def _axis_differences(dims):
    blocks = []
    for axis, size in enumerate(dims):
        # column-stacking puts the first axis innermost, so Kronecker factors
        # run from the last axis down to the first
        factors = [_diff_1d(s) if a == axis else np.eye(s) for a, s in enumerate(dims)]
        block = factors[-1]
        for f in reversed(factors[:-1]):
            block = np.kron(block, f)
        blocks.append(block)
    return blocks


def dif_2d(N):
    """Anisotropic 2-D finite differences on column-stacked ``N x N`` images.

    Rows ``0 .. N(N-1)-1`` are vertical differences ``x[i+1, j] - x[i, j]``,
    the remaining ``N(N-1)`` rows horizontal ``x[i, j+1] - x[i, j]``; both
    scanned column-major.
    """
    N = check_count(N, "N", 0)
    if N < 2:
        raise ValueError(f"dif_2d needs N >= 2, got {N}")
    vertical, horizontal = _axis_differences((N, N))
    return AnalysisOperator(np.vstack([vertical, horizontal]), OperatorKind.DIF2D, geometry=(N, N))


def dif_Ld(dims):
    """Directional first differences along every axis of an L-D array."""
    dims = tuple(int(s) for s in dims)
    if not dims:
        raise ValueError("dif_Ld needs at least one dimension")
    if any(s < 2 for s in dims):
        raise ValueError(f"every dimension must be >= 2, got {dims}")
    return AnalysisOperator(np.vstack(_axis_differences(dims)), OperatorKind.DIFLD, geometry=dims)


def is_power_of_two(N):
    return N >= 1 and (N & (N - 1)) == 0


def haar2d(image):
    """Full multi-level orthonormal 2-D Haar transform (square/Mallat layout).

    At each level the low-pass block is split into averages and differences
    along columns, then along rows. Returns an array of the same shape.
    """
    c = np.array(image, dtype=np.float64)
    N = c.shape[0]
    if c.ndim != 2 or c.shape[1] != N or not is_power_of_two(N):
        raise ValueError("N must be a power of 2")
    r = 1.0 / np.sqrt(2.0)
    size = N
    while size > 1:
        block = c[:size, :size]
        block = np.vstack([(block[0::2] + block[1::2]) * r, (block[0::2] - block[1::2]) * r])
        block = np.hstack([(block[:, 0::2] + block[:, 1::2]) * r, (block[:, 0::2] - block[:, 1::2]) * r])
        c[:size, :size] = block
        size //= 2
    return c


def bivariate_haar(N):
    """Orthonormal ``N^2 x N^2`` matrix of :func:`haar2d` on column-stacked images."""
    N = check_count(N, "N", 1)
    if not is_power_of_two(N):
        raise ValueError("N must be a power of 2")
    d = N * N
    H = np.empty((d, d))
    basis = np.zeros(d)
    for i in range(d):
        basis[i] = 1.0
        H[:, i] = haar2d(basis.reshape(N, N, order="F")).ravel(order="F")
        basis[i] = 0.0
    return AnalysisOperator(H, OperatorKind.HAAR, geometry=(N, N))


def split_frame(frame, n_keep, seed=None):
    """Split a frame's rows into ``(Omega, Omega_tilde)``.

    ``Omega`` (``n_keep`` rows, a partial frame) is returned as an
    :class:`AnalysisOperator`; the complementary rows as a plain array. With a
    seed the rows are permuted first, otherwise the leading rows are kept.
    """
    n_keep = check_count(n_keep, "n_keep", 1)
    if n_keep > frame.n:
        raise ValueError(f"cannot keep {n_keep} of {frame.n} rows")
    order = np.arange(frame.n) if seed is None else np.random.default_rng(seed).permutation(frame.n)
    keep, rest = np.sort(order[:n_keep]), np.sort(order[n_keep:])
    partial = AnalysisOperator(frame.matrix[keep], OperatorKind.PARTIAL_FRAME, seed=seed)
    return partial, frame.matrix[rest].copy()


@dataclass(frozen=True)
class PartialFrameCheck:
    c11: float
    c12: float
    lower_bound_A: float
    admissible: bool

    @property
    def ratio(self):
        return _ratio(self.c12, self.c11, self.lower_bound_A)


def _ratio(c12, c11, A):
    denom = c11 * A
    if np.isinf(denom):
        return 0.0
    if denom == 0.0:
        return np.inf
    return c12 / denom


def partial_frame_check(omega, omega_tilde, B):
    """Constants for recovering from a partial frame plus extra measurements.

    ``c11`` is the smallest of the ``r`` singular values of ``B Omega_tilde^+``
    (``r`` = rows of ``Omega_tilde``; zero if B has fewer rows, infinite if
    ``Omega_tilde`` is empty), ``c12 = ||B (I - Omega_tilde^+ Omega_tilde)||_2``
    and ``A`` is the lower frame bound of the stacked frame.
    """
    om = omega.matrix if isinstance(omega, AnalysisOperator) else check_matrix(omega, "omega")
    d = om.shape[1]
    tilde = np.asarray(omega_tilde, dtype=np.float64).reshape(-1, d)
    B = check_matrix(B, "B")
    if B.shape[1] != d:
        raise ValueError(f"B has {B.shape[1]} columns, operator has {d}")
    stacked = AnalysisOperator(np.vstack([om, tilde]), OperatorKind.FRAME)
    A = frame_bounds(stacked).lower
    r = tilde.shape[0]
    if r == 0:
        c11 = np.inf
        c12 = float(svd(B).singular_values[0])
    else:
        tilde_pinv = pseudo_inverse(tilde)
        s = svd(B @ tilde_pinv).singular_values
        c11 = float(s[r - 1]) if s.size >= r else 0.0
        if c11 <= 1e-10 * max(B.shape) * (s[0] if s.size else 0.0):
            c11 = 0.0
        residual = B @ (np.eye(d) - tilde_pinv @ tilde)
        c12 = float(svd(residual).singular_values[0])
        if c12 <= 1e-12 * max(1.0, float(np.linalg.norm(B, 2))):
            c12 = 0.0
    return PartialFrameCheck(c11, c12, A, bool(_ratio(c12, c11, A) < 1.0))


# --- persistence: <stem>.csv matrix plus <stem>.json sidecar -------------

def save_operator(op, stem):
    write_matrix_csv(f"{stem}.csv", op.matrix)
    bounds = frame_bounds(op)
    sidecar = {
        "kind": op.kind.value,
        "geometry": list(op.geometry) if op.geometry else None,
        "seed": op.seed,
        "frame_bounds": {"lower": bounds.lower, "upper": bounds.upper, "is_frame": bounds.is_frame},
    }
    with open(f"{stem}.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_operator(stem):
    stem = str(stem)
    if stem.endswith(".csv") or stem.endswith(".json"):
        stem = stem.rsplit(".", 1)[0]
    matrix = read_matrix_csv(f"{stem}.csv")
    with open(f"{stem}.json") as fh:
        meta = json.load(fh)
    op = AnalysisOperator(matrix, meta["kind"], geometry=meta.get("geometry"), seed=meta.get("seed"))
    frame_bounds(op)
    return op
