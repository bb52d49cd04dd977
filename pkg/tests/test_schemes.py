import numpy as np
import pytest
from sklearn.base import clone

from transdomain.diagnostics import frame_error_bound
from transdomain.operators import AnalysisOperator, dif_2d, random_tight_frame, split_frame
from transdomain.schemes import (
    AnalysisL1Recovery,
    FrameSchemeRecovery,
    TwoStageRecovery,
    recover_analysis_baseline,
    recover_dif_scheme,
    recover_frame_scheme,
    recover_general_scheme,
    solve_proxy,
)
from transdomain.sensing import compose_frame_ensemble, compose_stacked_ensemble, gaussian_matrix, measure
from transdomain.signals import NoiseModel, gen_cosparse, gen_piecewise_image
from transdomain.solvers import OMP, SynthesisProgramSpec

L1 = SynthesisProgramSpec("l1_bpdn")


def frame_instance(seed, n=48, d=40, cosparsity=36, m=36):
    omega = random_tight_frame(n, d, seed=seed)
    sig = gen_cosparse(omega, cosparsity, seed=seed + 1)
    A = gaussian_matrix(m, n, seed=seed + 2)
    return omega, sig, A


@pytest.mark.parametrize("seed", range(3))
def test_frame_scheme_recovers_planted_signal(seed):
    omega, sig, A = frame_instance(seed)
    meas = measure(compose_frame_ensemble(A, omega), sig.x)
    res = recover_frame_scheme(meas.y, A, omega, L1)
    assert res.converged and res.scheme == "frame_scheme"
    np.testing.assert_allclose(res.x_hat, sig.x, atol=1e-9)
    np.testing.assert_allclose(res.w_hat, omega.matrix @ sig.x, atol=1e-9)


def test_frame_scheme_error_identity_under_noise():
    omega, sig, A = frame_instance(5)
    for s in range(5):
        meas = measure(compose_frame_ensemble(A, omega), sig.x, NoiseModel("gaussian", sigma=0.05, seed=s))
        res = recover_frame_scheme(meas.y, A, omega, L1, noise_budget=np.linalg.norm(meas.e))
        err, bound = frame_error_bound(omega, sig.x, res.x_hat, res.w_hat)
        assert err <= bound * (1 + 1e-12)


def test_frame_scheme_with_greedy_programs():
    omega, sig, A = frame_instance(2)
    meas = measure(compose_frame_ensemble(A, omega), sig.x)
    for prog in (SynthesisProgramSpec("omp", k=sig.k), SynthesisProgramSpec("cosamp", k=sig.k), OMP(n_nonzero_coefs=12)):
        res = recover_frame_scheme(meas.y, A, omega, prog)
        np.testing.assert_allclose(res.x_hat, sig.x, atol=1e-8)


def test_frame_scheme_accepts_sklearn_regressor():
    from sklearn.linear_model import OrthogonalMatchingPursuit

    omega, sig, A = frame_instance(4)
    meas = measure(compose_frame_ensemble(A, omega), sig.x)
    prog = OrthogonalMatchingPursuit(n_nonzero_coefs=sig.k, fit_intercept=False)
    res = recover_frame_scheme(meas.y, A, omega, prog)
    np.testing.assert_allclose(res.x_hat, sig.x, atol=1e-8)
    assert not hasattr(prog, "coef_")


def test_frame_scheme_needs_a_frame():
    op = AnalysisOperator(np.vstack([np.eye(3)[:2], np.zeros((2, 3))]), "frame")
    with pytest.raises(ValueError, match="frame scheme requires lower frame bound > 0"):
        recover_frame_scheme(np.zeros(3), gaussian_matrix(3, 4, seed=0), op, L1)
    omega = random_tight_frame(6, 4, seed=0)
    with pytest.raises(ValueError):
        recover_frame_scheme(np.zeros(3), gaussian_matrix(3, 5, seed=0), omega, L1)
    with pytest.raises(TypeError):
        solve_proxy("omp", np.zeros(3), np.ones((3, 3)))


def test_dif_scheme_recovers_piecewise_image():
    N = 8
    sig = gen_piecewise_image(N, 2, seed=1)
    omega = dif_2d(N)
    A = gaussian_matrix(60, omega.n, seed=2)
    B = gaussian_matrix(2, N * N, seed=3)
    meas = measure(compose_stacked_ensemble(A, omega, B), sig.x)
    res = recover_dif_scheme(meas.y1, meas.y2, A, B, N, SynthesisProgramSpec("l1_bpdn"))
    assert res.scheme == "dif_scheme"
    np.testing.assert_allclose(res.x_hat, sig.x, atol=1e-8)


def test_general_scheme_exact_proxy_l2_fit(rng):
    # a partial frame plus two direct rows pins down x once the proxy is exact
    frame = random_tight_frame(24, 12, seed=4)
    part, _ = split_frame(frame, 11, seed=1)
    sig = gen_cosparse(part, 8, seed=2)
    A = gaussian_matrix(10, 11, seed=3)
    B = gaussian_matrix(2, 12, seed=5)
    meas = measure(compose_stacked_ensemble(A, part, B), sig.x)
    res = recover_general_scheme(meas.y1, meas.y2, A, B, part, SynthesisProgramSpec("l1_bpdn"), p=2)
    np.testing.assert_allclose(res.x_hat, sig.x, atol=1e-6)
    assert res.diagnostics["fit_constraint_residual"] <= 1e-6


def test_general_scheme_needs_b_rows():
    omega = dif_2d(3)
    with pytest.raises(ValueError, match="general scheme requires B rows >= 1"):
        recover_general_scheme(np.zeros(4), np.zeros(0), gaussian_matrix(4, omega.n, seed=0), np.zeros((0, 9)), omega, L1)


def test_analysis_baseline_on_frame_signal():
    omega, sig, _ = frame_instance(7)
    M = gaussian_matrix(36, 40, seed=8)
    res = recover_analysis_baseline(M @ sig.x, M, omega)
    assert res.w_hat is None and res.scheme == "analysis_baseline"
    np.testing.assert_allclose(res.x_hat, sig.x, atol=1e-9)


def test_estimator_wrappers():
    omega, sig, A = frame_instance(3)
    y = A @ (omega.matrix @ sig.x)
    est = FrameSchemeRecovery(analysis_operator=omega, program=L1)
    assert clone(est).get_params()["program"] == L1
    np.testing.assert_allclose(est.fit(A, y).signal_, sig.x, atol=1e-9)

    N = 6
    img = gen_piecewise_image(N, 2, seed=9)
    D = dif_2d(N)
    A2 = gaussian_matrix(40, D.n, seed=10)
    B = gaussian_matrix(2, N * N, seed=11)
    two = TwoStageRecovery(analysis_operator=D, program=L1).fit(A2, A2 @ (D.matrix @ img.x), B=B, y2=B @ img.x)
    np.testing.assert_allclose(two.signal_, img.x, atol=1e-8)
    with pytest.raises(ValueError):
        TwoStageRecovery(analysis_operator=D, program=L1).fit(A2, np.zeros(40))

    M = gaussian_matrix(30, N * N, seed=12)
    base = AnalysisL1Recovery(analysis_operator=D).fit(M, M @ img.x)
    np.testing.assert_allclose(base.signal_, img.x, atol=1e-8)
