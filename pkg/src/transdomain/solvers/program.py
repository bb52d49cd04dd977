"""Uniform black-box interface over the synthesis solvers.

Every algorithm is reached through ``run_program(spec, y, A, noise_budget)``
and returns a :class:`RecoveryReport`; recovery schemes never look at which
algorithm a ``SynthesisProgramSpec`` names.
"""

import json
from dataclasses import asdict, dataclass
from typing import Optional

from .convex import l1_bpdn
from .exhaustive import brute_force_l0_synthesis
from .greedy import cosamp, iht, omp

ALGORITHMS = ("omp", "cosamp", "iht", "l1_bpdn", "brute_l0")


@dataclass(frozen=True)
class SynthesisProgramSpec:
    algorithm: str
    k: int = 1
    max_iters: int = 1000
    tol: float = 1e-10
    noise_budget: Optional[float] = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.noise_budget is not None and self.noise_budget < 0:
            raise ValueError("noise_budget must be non-negative")

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        allowed = {"algorithm", "k", "max_iters", "tol", "noise_budget"}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown program fields: {', '.join(sorted(unknown))}")
        return cls(**data)

    def with_k(self, k):
        return SynthesisProgramSpec(self.algorithm, int(k), self.max_iters, self.tol, self.noise_budget)


def _omp(y, A, spec, budget):
    return omp(y, A, min(spec.k, *A.shape), tol=max(spec.tol, budget))


def _cosamp(y, A, spec, budget):
    return cosamp(y, A, spec.k, max_iters=spec.max_iters, tol=max(spec.tol, budget))


def _iht(y, A, spec, budget):
    return iht(y, A, spec.k, max_iters=spec.max_iters, tol=spec.tol)


def _l1(y, A, spec, budget):
    return l1_bpdn(y, A, epsilon=budget)


def _brute(y, A, spec, budget):
    return brute_force_l0_synthesis(y, A, spec.k, epsilon=max(spec.tol, budget))


_DISPATCH = {"omp": _omp, "cosamp": _cosamp, "iht": _iht, "l1_bpdn": _l1, "brute_l0": _brute}


def run_program(spec, y, A, noise_budget=None):
    """Run the synthesis program ``spec`` on ``y ~ A alpha``.

    ``noise_budget`` overrides ``spec.noise_budget``; either defaults to 0.
    It is the l1 constraint radius and the greedy residual stopping level.
    """
    budget = noise_budget if noise_budget is not None else spec.noise_budget
    return _DISPATCH[spec.algorithm](y, A, spec, float(budget or 0.0))
