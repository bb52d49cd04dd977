"""Ground-truth signal generators and additive noise models."""

import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from ._validation import check_count, check_vector
from .numerics import numerical_rank, pseudo_inverse, read_vector_csv, write_vector_csv
from .operators import dif_2d

ZERO_TOL = 1e-9


@dataclass(eq=False)
class SignalInstance:
    x: np.ndarray
    cosupport: np.ndarray
    k: int
    generator: str
    seed: Optional[int] = None
    labels: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def d(self):
        return self.x.shape[0]

    def to_sidecar(self):
        return {
            "generator": self.generator,
            "seed": self.seed,
            "k": int(self.k),
            "cosupport": [int(i) for i in self.cosupport],
        }


@dataclass(frozen=True)
class NoiseModel:
    kind: str = "none"
    sigma: float = 0.0
    epsilon: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("none", "gaussian", "bounded_adversarial"):
            raise ValueError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0 or self.epsilon < 0:
            raise ValueError("sigma and epsilon must be non-negative")

    def with_seed(self, seed):
        return NoiseModel(self.kind, self.sigma, self.epsilon, seed)


def gen_cosparse(omega, cosparsity, seed=None):
    """Unit-norm signal orthogonal to ``cosparsity`` random rows of ``omega``.

    A Gaussian vector is projected onto the orthogonal complement of the
    selected rows and normalized; a fresh draw is taken if the projection
    is numerically zero.
    """
    n, d = omega.shape
    cosparsity = check_count(cosparsity, "cosparsity", 0)
    if cosparsity > n:
        raise ValueError(f"cosparsity {cosparsity} exceeds the {n} operator rows")
    rng = np.random.default_rng(seed)
    cosupport = np.sort(rng.choice(n, size=cosparsity, replace=False))
    R = omega.matrix[cosupport]
    if cosparsity and numerical_rank(R) >= d:
        raise ValueError("cosparsity too large for operator")
    R_pinv = pseudo_inverse(R) if cosparsity else None
    for _ in range(100):
        g = rng.standard_normal(d)
        x = g - R_pinv @ (R @ g) if cosparsity else g
        norm = np.linalg.norm(x)
        if norm >= 1e-8:
            break
    else:
        raise RuntimeError("projection kept vanishing; operator rows span R^d")
    return SignalInstance(x / norm, cosupport, n - cosparsity, "cosparse_frame", seed)


def _count_components(labels):
    total = 0
    for value in np.unique(labels):
        _, count = ndimage.label(labels == value)
        total += count
    return total


def _random_walk(rng, start, length, N):
    steps = np.array([(1, 0), (-1, 0), (0, 1), (0, -1)])
    i, j = start
    visited = {(i, j)}
    for _ in range(length):
        while True:
            di, dj = steps[rng.integers(4)]
            if 0 <= i + di < N and 0 <= j + dj < N:
                break
        i, j = i + di, j + dj
        visited.add((i, j))
    return visited


def gen_piecewise_image(N, num_components, seed=None, max_attempts=1000):
    """Random piecewise-constant ``N x N`` image with exactly ``num_components``
    maximal 4-connected constant regions.

    Starts from a constant image; each further region is carved by a random
    walk of length uniform in ``[N, 3N]`` from a pixel not yet claimed by a
    walk. Walks that would split or erase an existing region are redrawn.
    Region values are uniform on ``[-1, 1]`` and at least 0.1 apart.
    """
    N = check_count(N, "N", 2)
    num_components = check_count(num_components, "num_components", 1)
    if num_components > N * N:
        raise ValueError(f"cannot fit {num_components} components in a {N}x{N} image")
    rng = np.random.default_rng(seed)
    labels = np.zeros((N, N), dtype=int)
    values = [rng.uniform(-1.0, 1.0)]
    for c in range(1, num_components):
        for _ in range(max_attempts):
            free = np.flatnonzero(labels.ravel(order="F") == 0)
            if free.size == 0:
                raise RuntimeError(f"no unclaimed pixel left for component {c + 1}; the image is too small")
            start = int(free[rng.integers(free.size)])
            walk = _random_walk(rng, (start % N, start // N), int(rng.integers(N, 3 * N + 1)), N)
            trial = labels.copy()
            for p in walk:
                trial[p] = c
            if _count_components(trial) == c + 1:
                labels = trial
                break
        else:
            raise RuntimeError(f"could not place component {c + 1} after {max_attempts} walks")
        while True:
            v = rng.uniform(-1.0, 1.0)
            if min(abs(v - u) for u in values) >= 0.1:
                values.append(v)
                break
    image = np.asarray(values)[labels]
    x = image.ravel(order="F")
    grad = dif_2d(N).matrix @ x
    cosupport = np.flatnonzero(np.abs(grad) <= ZERO_TOL)
    k = int(grad.size - cosupport.size)
    return SignalInstance(x, cosupport, k, "piecewise_image", seed, labels=labels)


def apply_noise(y_clean, model):
    """Return ``(y, e)`` with ``y = y_clean + e`` drawn from ``model``."""
    y_clean = check_vector(y_clean, "y_clean")
    m = y_clean.shape[0]
    if model.kind == "none":
        e = np.zeros(m)
    elif model.kind == "gaussian":
        e = np.random.default_rng(model.seed).normal(0.0, model.sigma, m)
    else:
        u = np.random.default_rng(model.seed).standard_normal(m)
        e = model.epsilon * u / np.linalg.norm(u)
    return y_clean + e, e


def save_signal(signal, stem):
    write_vector_csv(f"{stem}.csv", signal.x)
    with open(f"{stem}.json", "w") as fh:
        json.dump(signal.to_sidecar(), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_signal(stem):
    stem = str(stem)
    if stem.endswith(".csv") or stem.endswith(".json"):
        stem = stem.rsplit(".", 1)[0]
    x = read_vector_csv(f"{stem}.csv")
    with open(f"{stem}.json") as fh:
        meta = json.load(fh)
    return SignalInstance(x, np.asarray(meta["cosupport"], dtype=int), meta["k"], meta["generator"], meta.get("seed"))
