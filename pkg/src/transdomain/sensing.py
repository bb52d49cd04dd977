"""Measurement ensembles, measurement, and RIP / coherence diagnostics."""

import itertools
import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ._validation import check_count, check_matrix, check_vector
from .numerics import read_matrix_csv, write_matrix_csv
from .operators import AnalysisOperator
from .signals import NoiseModel, apply_noise

EXHAUSTIVE_CAP = 100_000


@dataclass(eq=False)
class MeasurementEnsemble:
    """Effective sensing map ``M`` together with its blocks.

    ``split`` is the row where ``y1`` (transform-domain rows) ends and ``y2``
    begins; it equals ``M.shape[0]`` for non-stacked ensembles.
    """

    kind: str
    A: np.ndarray
    M: np.ndarray
    B: Optional[np.ndarray] = None
    omega: Optional[AnalysisOperator] = None
    seed: Optional[int] = None

    @property
    def m(self):
        return self.M.shape[0]

    @property
    def d(self):
        return self.M.shape[1]

    @property
    def split(self):
        return self.A.shape[0] if self.kind == "stacked" else self.M.shape[0]


class Measurement(NamedTuple):
    y: np.ndarray
    e: np.ndarray
    split: int

    @property
    def y1(self):
        return self.y[: self.split]

    @property
    def y2(self):
        return self.y[self.split:]

    @property
    def e1(self):
        return self.e[: self.split]

    @property
    def e2(self):
        return self.e[self.split:]


@dataclass(frozen=True)
class RipEstimate:
    k: int
    delta_hat: float
    supports_sampled: int
    seed: Optional[int]
    exhaustive: bool = False


def gaussian_matrix(m, n, unit_columns=True, seed=None, scale_by_sqrt_m=False):
    """i.i.d. N(0, 1) matrix, optionally with unit-norm columns.

    ``scale_by_sqrt_m`` divides by ``sqrt(m)`` instead (the usual RIP scaling);
    it is ignored when ``unit_columns`` is set.
    """
    m = check_count(m, "m", 1)
    n = check_count(n, "n", 1)
    G = np.random.default_rng(seed).standard_normal((m, n))
    if unit_columns:
        G /= np.linalg.norm(G, axis=0)
    elif scale_by_sqrt_m:
        G /= np.sqrt(m)
    return G


def plain_ensemble(M, seed=None):
    M = check_matrix(M, "M")
    return MeasurementEnsemble("plain", M, M, seed=seed)


def compose_frame_ensemble(A, omega, seed=None):
    """``M = A Omega``: sample in the transform domain of ``omega``."""
    A = check_matrix(A, "A")
    if A.shape[1] != omega.n:
        raise ValueError(f"A has {A.shape[1]} columns but the operator has {omega.n} rows")
    return MeasurementEnsemble("composed_frame", A, A @ omega.matrix, omega=omega, seed=seed)


def compose_stacked_ensemble(A, omega, B, seed=None):
    """``M = [A Omega; B]``: transform-domain rows followed by direct rows."""
    A = check_matrix(A, "A", allow_empty_rows=True)
    B = check_matrix(B, "B", allow_empty_rows=True)
    if A.shape[1] != omega.n:
        raise ValueError(f"A has {A.shape[1]} columns but the operator has {omega.n} rows")
    if B.shape[1] != omega.d:
        raise ValueError(f"B has {B.shape[1]} columns but signals have dimension {omega.d}")
    M = np.vstack([A @ omega.matrix, B])
    return MeasurementEnsemble("stacked", A, M, B=B, omega=omega, seed=seed)


def measure(ens, x, noise=None):
    """``y = M x + e`` with ``e`` from ``noise`` (no noise by default)."""
    x = check_vector(x, "x", length=ens.d)
    if ens.kind == "composed_frame":
        clean = ens.A @ (ens.omega.matrix @ x)
    elif ens.kind == "stacked":
        clean = np.concatenate([ens.A @ (ens.omega.matrix @ x), ens.B @ x])
    else:
        clean = ens.M @ x
    y, e = apply_noise(clean, noise or NoiseModel())
    return Measurement(y, e, ens.split)


def mutual_coherence(M):
    """Largest normalized inner product between two distinct columns."""
    M = check_matrix(M, "M")
    norms = np.linalg.norm(M, axis=0)
    if np.any(norms == 0):
        raise ValueError("mutual coherence is undefined for a zero column")
    if M.shape[1] < 2:
        return 0.0
    G = np.abs((M / norms).T @ (M / norms))
    np.fill_diagonal(G, 0.0)
    return float(min(G.max(), 1.0))


def _support_deltas(M, supports):
    sub = M[:, supports].transpose(1, 0, 2)  # (S, m, k)
    s = np.linalg.svd(sub, compute_uv=False)
    smax2 = s[:, 0] ** 2
    # supports wider than m have sigma_min = 0 on the missing directions
    smin2 = s[:, -1] ** 2 if supports.shape[1] <= M.shape[0] else np.zeros(len(supports))
    return np.maximum(smax2 - 1.0, 1.0 - smin2)


def rip_estimate(M, k, num_supports=1000, seed=None, batch=4096):
    """Monte-Carlo lower bound on the restricted isometry constant of order ``k``.

    When ``num_supports`` covers all ``C(n, k)`` supports and that count is at
    most 100 000, every support is enumerated and the result is exact.
    """
    M = check_matrix(M, "M")
    n = M.shape[1]
    k = check_count(k, "k", 1)
    if k > n:
        raise ValueError(f"k={k} exceeds the {n} columns")
    total = math.comb(n, k)
    exhaustive = num_supports >= total and total <= EXHAUSTIVE_CAP
    delta = 0.0
    if exhaustive:
        combos = itertools.combinations(range(n), k)
        while True:
            chunk = np.array(list(itertools.islice(combos, batch)), dtype=int)
            if chunk.size == 0:
                break
            delta = max(delta, float(_support_deltas(M, chunk).max()))
        count = total
    else:
        rng = np.random.default_rng(seed)
        count = int(num_supports)
        done = 0
        while done < count:
            size = min(batch, count - done)
            chunk = np.argsort(rng.random((size, n)), axis=1)[:, :k]
            delta = max(delta, float(_support_deltas(M, chunk).max()))
            done += size
    return RipEstimate(k, max(delta, 0.0), count, seed, exhaustive)


def save_ensemble(ens, directory):
    """Write each block as matrix CSV plus ``ensemble.json``."""
    write_matrix_csv(f"{directory}/A.csv", ens.A)
    write_matrix_csv(f"{directory}/M.csv", ens.M)
    if ens.B is not None:
        write_matrix_csv(f"{directory}/B.csv", ens.B)
    meta = {"kind": ens.kind, "seed": ens.seed, "split": ens.split, "m": ens.m, "d": ens.d}
    with open(f"{directory}/ensemble.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_ensemble(directory, omega=None):
    with open(f"{directory}/ensemble.json") as fh:
        meta = json.load(fh)
    A = read_matrix_csv(f"{directory}/A.csv")
    M = read_matrix_csv(f"{directory}/M.csv")
    B = read_matrix_csv(f"{directory}/B.csv") if meta["kind"] == "stacked" else None
    return MeasurementEnsemble(meta["kind"], A, M, B=B, omega=omega, seed=meta.get("seed"))
