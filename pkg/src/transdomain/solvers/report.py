from dataclasses import dataclass, field

import numpy as np


@dataclass(eq=False)
class RecoveryReport:
    """Outcome of one synthesis recovery ``y ~ A @ estimate``."""

    estimate: np.ndarray
    support: np.ndarray
    residual_norm: float
    iterations: int
    converged: bool
    wall_time: float = 0.0
    algorithm: str = ""
    message: str = ""
    flags: dict = field(default_factory=dict)

    def recomputed_residual(self, y, A):
        return float(np.linalg.norm(y - A @ self.estimate))


def support_of(v, rel_tol=1e-9):
    """Indices of entries larger than ``rel_tol * max|v|`` (empty for v = 0)."""
    v = np.asarray(v)
    peak = np.max(np.abs(v)) if v.size else 0.0
    if peak == 0.0:
        return np.zeros(0, dtype=int)
    return np.flatnonzero(np.abs(v) > rel_tol * peak)


def hard_threshold(v, k):
    """Keep the ``k`` largest-magnitude entries; equal magnitudes favour lower indices."""
    out = np.zeros_like(v)
    if k <= 0:
        return out
    keep = np.argsort(-np.abs(v), kind="stable")[:k]
    out[keep] = v[keep]
    return out
