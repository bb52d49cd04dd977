"""Fast oracle-agreement and invariant checks run by ``transdomain selftest``.

Every check is small enough that the whole suite finishes in a few seconds.
``inject`` names checks whose inputs are deliberately corrupted, so tests
can confirm a broken construction is reported by name.
"""

import time
from typing import NamedTuple

import numpy as np

from .operators import bivariate_haar, dif_2d, random_tight_frame
from .schemes import recover_frame_scheme
from .sensing import compose_frame_ensemble, gaussian_matrix, measure, rip_estimate
from .signals import gen_cosparse
from .solvers import SynthesisProgramSpec, brute_force_l0_synthesis, cosamp, l1_bpdn, omp


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str
    seconds: float


def _haar_orthonormality(corrupt):
    worst = 0.0
    for N in (2, 4, 8, 16):
        H = bivariate_haar(N).matrix.copy()
        if corrupt:
            H[0, 0] += 1e-3
        worst = max(worst, float(np.linalg.norm(H.T @ H - np.eye(N * N))))
    return worst <= 1e-10, f"max ||H^T H - I||_F = {worst:.2e}"


def _tight_frame_parseval(corrupt):
    op = random_tight_frame(36, 30, seed=1)
    Om = op.matrix.copy()
    if corrupt:
        Om[0] *= 1.01
    gram = float(np.linalg.norm(Om.T @ Om - np.eye(30)))
    pinv = float(np.linalg.norm(np.linalg.pinv(Om) - Om.T))
    return max(gram, pinv) <= 1e-10, f"Parseval defect {gram:.2e}, pinv defect {pinv:.2e}"


def _dif_constants(corrupt):
    D = dif_2d(6).matrix.copy()
    if corrupt:
        D[0, 0] += 0.5
    r = float(np.max(np.abs(D @ np.ones(36))))
    return r == 0.0, f"max |D 1| = {r:.2e}"


def _brute_force_agreement(corrupt):
    fails = []
    for seed in range(5):
        rng = np.random.default_rng(100 + seed)
        A = gaussian_matrix(15, 30, seed=rng.integers(2**32))
        alpha = np.zeros(30)
        alpha[rng.choice(30, 3, replace=False)] = rng.standard_normal(3)
        y = A @ alpha
        if corrupt:
            y = y + 0.1
        ref = brute_force_l0_synthesis(y, A, 3).estimate
        for name, est in (("omp", omp(y, A, 3).estimate), ("cosamp", cosamp(y, A, 3).estimate),
                          ("l1_bpdn", l1_bpdn(y, A).estimate)):
            if np.linalg.norm(est - ref) > 1e-6:
                fails.append(f"{name}@{seed}")
    return not fails, "all agree" if not fails else "disagreements: " + ", ".join(fails)


def _frame_pipeline(corrupt):
    omega = random_tight_frame(48, 40, seed=3)
    sig = gen_cosparse(omega, 36, seed=4)
    A = gaussian_matrix(36, 48, seed=5)
    if corrupt:
        A = A[:, ::-1]
    meas = measure(compose_frame_ensemble(A, omega), sig.x)
    res = recover_frame_scheme(meas.y, gaussian_matrix(36, 48, seed=5), omega, SynthesisProgramSpec("l1_bpdn"))
    rel = float(np.linalg.norm(res.x_hat - sig.x) / np.linalg.norm(sig.x))
    return rel <= 1e-6, f"planted relative error {rel:.2e}"


def _rip_orthonormal(corrupt):
    Q, _ = np.linalg.qr(np.random.default_rng(6).standard_normal((20, 12)))
    if corrupt:
        Q = 1.1 * Q
    est = rip_estimate(Q, 3, num_supports=200, seed=7)
    return est.delta_hat <= 1e-10, f"delta_3 = {est.delta_hat:.2e}"


CHECKS = {
    "haar_orthonormality": _haar_orthonormality,
    "tight_frame_parseval": _tight_frame_parseval,
    "dif2d_constant_null_space": _dif_constants,
    "brute_force_agreement": _brute_force_agreement,
    "frame_pipeline_planted": _frame_pipeline,
    "rip_orthonormal_columns": _rip_orthonormal,
}


def run_selftest(inject=()):
    unknown = set(inject) - set(CHECKS)
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(sorted(unknown))}")
    results = []
    for name, check in CHECKS.items():
        t0 = time.perf_counter()
        try:
            passed, detail = check(name in inject)
        except Exception as exc:  # a crashing check is a failed check
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        results.append(CheckResult(name, bool(passed), detail, time.perf_counter() - t0))
    return results
