import math

import cvxpy as cp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from sklearn.base import clone

from conftest import sparse_vector
from transdomain.operators import dif_2d, random_tight_frame
from transdomain.sensing import gaussian_matrix
from transdomain.signals import gen_cosparse
from transdomain.solvers import (
    BPDN,
    IHT,
    OMP,
    CoSaMP,
    SynthesisProgramSpec,
    admm_solve,
    analysis_l1,
    brute_force_l0_analysis,
    brute_force_l0_synthesis,
    constrained_transform_fit,
    cosamp,
    hard_threshold,
    iht,
    l1_bpdn,
    omp,
    run_program,
    support_of,
)
from transdomain.solvers.exhaustive import COMBINATORIAL_CAP


def planted(seed, m=15, n=30, k=3):
    rng = np.random.default_rng(seed)
    A = gaussian_matrix(m, n, seed=int(rng.integers(2**32)))
    alpha = sparse_vector(rng, n, k)
    return A, alpha, A @ alpha


def bp_by_vertex_enumeration(A, y, chunk=20000):
    """Basis pursuit optimum as the best basic solution over all m-column subsets."""
    import itertools

    m, n = A.shape
    combos = itertools.combinations(range(n), m)
    best, best_x = np.inf, None
    while True:
        S = np.array(list(itertools.islice(combos, chunk)))
        if S.size == 0:
            return best_x
        sub = A[:, S].transpose(1, 0, 2)
        ok = np.abs(np.linalg.det(sub)) > 1e-12
        coef = np.linalg.solve(sub[ok], np.broadcast_to(y, (ok.sum(), m))[..., None])[..., 0]
        obj = np.abs(coef).sum(axis=1)
        i = int(np.argmin(obj))
        if obj[i] < best:
            best = obj[i]
            best_x = np.zeros(n)
            best_x[S[ok][i]] = coef[i]


# --- basis pursuit and ADMM ------------------------------------------------

def test_basis_pursuit_matches_vertex_enumeration():
    rng = np.random.default_rng(1)
    A = gaussian_matrix(10, 20, seed=2)
    # 6-sparse in 10 x 20 is beyond exact recovery, so the optimum is not the planted vector
    y = A @ sparse_vector(rng, 20, 6)
    ref = bp_by_vertex_enumeration(A, y)
    rep = l1_bpdn(y, A)
    assert rep.flags["method"] == "lp"
    assert np.abs(rep.estimate).sum() == pytest.approx(np.abs(ref).sum(), rel=1e-9)
    np.testing.assert_allclose(rep.estimate, ref, atol=1e-8)


def test_admm_matches_lp_on_basis_pursuit():
    A, alpha, y = planted(3)
    lp = l1_bpdn(y, A, method="lp")
    admm = l1_bpdn(y, A, method="admm")
    assert admm.converged
    np.testing.assert_allclose(admm.estimate, lp.estimate, atol=1e-5)
    np.testing.assert_allclose(lp.estimate, alpha, atol=1e-9)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_bpdn_matches_cvxpy(seed):
    rng = np.random.default_rng(seed)
    A = gaussian_matrix(20, 40, seed=seed)
    y = A @ sparse_vector(rng, 40, 4) + 0.02 * rng.standard_normal(20)
    eps = 0.1
    rep = l1_bpdn(y, A, epsilon=eps)
    x = cp.Variable(40)
    prob = cp.Problem(cp.Minimize(cp.norm1(x)), [cp.norm2(y - A @ x) <= eps])
    prob.solve(solver=cp.CLARABEL)
    assert rep.converged and rep.flags["method"] == "admm"
    assert rep.flags["objective"] == pytest.approx(prob.value, rel=1e-5)
    assert rep.residual_norm <= eps * (1 + 1e-5)
    np.testing.assert_allclose(rep.estimate, x.value, atol=1e-4)


def test_bpdn_trivial_when_budget_covers_signal():
    A, _, y = planted(4)
    rep = l1_bpdn(y, A, epsilon=2 * np.linalg.norm(y))
    assert not rep.estimate.any() and rep.flags["method"] == "trivial"


def test_analysis_l1_matches_cvxpy(rng):
    omega = dif_2d(5)
    x0 = np.repeat([0.3, -0.7], [10, 15])
    M = gaussian_matrix(15, 25, seed=1)
    y = M @ x0 + 0.01 * rng.standard_normal(15)
    eps = 0.05
    sol = analysis_l1(y, M, omega, eps)
    x = cp.Variable(25)
    prob = cp.Problem(cp.Minimize(cp.norm1(omega.matrix @ x)), [cp.norm2(y - M @ x) <= eps])
    prob.solve(solver=cp.CLARABEL)
    assert sol.converged
    assert sol.objective == pytest.approx(prob.value, rel=1e-5)
    assert sol.constraint_residual <= eps * (1 + 1e-5)


def test_analysis_l1_noiseless_tv_recovers_piecewise_signal():
    omega = dif_2d(6)
    x0 = np.zeros(36)
    x0[:18] = 1.0
    M = gaussian_matrix(30, 36, seed=5)
    sol = analysis_l1(M @ x0, M, omega)
    assert sol.method == "lp"
    np.testing.assert_allclose(sol.x, x0, atol=1e-8)


def test_constrained_fit_l2_matches_kkt(rng):
    omega = random_tight_frame(14, 10, seed=2)
    B = rng.standard_normal((3, 10))
    w = rng.standard_normal(14)
    y2 = rng.standard_normal(3)
    sol = constrained_transform_fit(omega, w, B, y2, 0.0, p=2)
    Om = omega.matrix
    K = np.block([[Om.T @ Om, B.T], [B, np.zeros((3, 3))]])
    x_ref = np.linalg.solve(K, np.concatenate([Om.T @ w, y2]))[:10]
    assert sol.method == "admm" and sol.converged
    np.testing.assert_allclose(sol.x, x_ref, atol=1e-6)


@pytest.mark.parametrize("p,eps", [(1, 0.0), (1, 0.2), (2, 0.2)])
def test_constrained_fit_matches_cvxpy(p, eps, rng):
    omega = dif_2d(4)
    B = gaussian_matrix(3, 16, seed=4)
    w = rng.standard_normal(omega.n)
    y2 = rng.standard_normal(3)
    sol = constrained_transform_fit(omega, w, B, y2, eps, p=p)
    x = cp.Variable(16)
    obj = cp.norm1(omega.matrix @ x - w) if p == 1 else cp.norm2(omega.matrix @ x - w)
    cons = [B @ x == y2] if eps == 0 else [cp.norm2(B @ x - y2) <= eps]
    prob = cp.Problem(cp.Minimize(obj), cons)
    prob.solve(solver=cp.CLARABEL)
    assert sol.objective == pytest.approx(prob.value, rel=1e-5)
    assert sol.constraint_residual <= max(eps, 1e-9) * (1 + 1e-5)


def test_admm_reports_iteration_cap():
    A, _, y = planted(6)
    sol = admm_solve(np.eye(30), np.zeros(30), A, y, 0.01, max_iter=3)
    assert sol.iterations == 3 and not sol.converged


def test_convex_argument_validation():
    A, _, y = planted(7)
    with pytest.raises(ValueError):
        l1_bpdn(y, A, epsilon=-1.0)
    with pytest.raises(ValueError):
        l1_bpdn(y, A, epsilon=0.1, method="lp")
    with pytest.raises(ValueError):
        constrained_transform_fit(dif_2d(3), np.zeros(12), np.ones((1, 9)), np.zeros(1), p=3)


# --- greedy ----------------------------------------------------------------

@pytest.mark.parametrize("solver", [omp, cosamp])
def test_greedy_exact_recovery(solver):
    for seed in range(5):
        A, alpha, y = planted(seed, m=40, n=80, k=5)
        rep = solver(y, A, 5)
        assert rep.converged
        np.testing.assert_allclose(rep.estimate, alpha, atol=1e-9)
        np.testing.assert_array_equal(rep.support, np.flatnonzero(alpha))


def test_iht_exact_recovery():
    A, alpha, y = planted(2, m=60, n=80, k=3)
    rep = iht(y, A, 3, max_iters=5000)
    assert rep.converged
    np.testing.assert_allclose(rep.estimate, alpha, atol=1e-6)


def test_omp_on_orthonormal_columns_picks_largest_correlations(rng):
    Q, _ = np.linalg.qr(rng.standard_normal((20, 10)))
    y = rng.standard_normal(20)
    rep = omp(y, Q, 4)
    corr = Q.T @ y
    np.testing.assert_array_equal(rep.support, np.sort(np.argsort(-np.abs(corr))[:4]))
    np.testing.assert_allclose(rep.estimate[rep.support], corr[rep.support], atol=1e-12)


def test_omp_stops_on_dependent_column():
    # the third row is unreachable, so after two atoms only a dependent column remains
    A = np.array([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [0.0, 0.0, 0.0]])
    rep = omp(np.array([1.0, 2.0, 1.0]), A, 3)
    assert not rep.converged
    assert len(rep.support) == 2 and "dependent" in rep.message
    assert rep.residual_norm == pytest.approx(1.0)


def test_greedy_zero_measurements():
    A = gaussian_matrix(5, 8, seed=0)
    for solver in (omp, cosamp, iht):
        rep = solver(np.zeros(5), A, 2)
        assert not rep.estimate.any() and rep.converged


def test_greedy_validation():
    A = gaussian_matrix(5, 8, seed=0)
    with pytest.raises(ValueError):
        omp(np.zeros(5), A, 6)
    with pytest.raises(ValueError):
        cosamp(np.zeros(5), A, 0)
    with pytest.raises(ValueError):
        iht(np.zeros(4), A, 1)


@given(arrays(np.float64, st.integers(1, 20), elements=st.sampled_from([-2.0, -1.0, 0.0, 1.0, 2.0, 3.5])),
       st.integers(0, 25))
def test_hard_threshold_properties(v, k):
    out = hard_threshold(v, k)
    kept = np.flatnonzero(out != 0)
    assert len(kept) <= k
    np.testing.assert_array_equal(out[kept], v[kept])
    if 0 < k < v.size:
        order = np.argsort(-np.abs(v), kind="stable")
        expected = np.zeros_like(v)
        expected[order[:k]] = v[order[:k]]
        np.testing.assert_array_equal(out, expected)


def test_hard_threshold_tie_goes_to_lower_index():
    np.testing.assert_array_equal(hard_threshold(np.array([1.0, -1.0, 1.0]), 2), [1.0, -1.0, 0.0])


def test_support_of():
    np.testing.assert_array_equal(support_of(np.array([0.0, 1e-12, 2.0])), [2])
    assert support_of(np.zeros(3)).size == 0


# --- exhaustive l0 ---------------------------------------------------------

def test_brute_force_l0_finds_planted_support():
    A, alpha, y = planted(11)
    rep = brute_force_l0_synthesis(y, A, 3)
    assert rep.converged
    np.testing.assert_allclose(rep.estimate, alpha, atol=1e-10)
    assert rep.iterations == 1 + 30 + math.comb(30, 2) + math.comb(30, 3)


def test_brute_force_l0_prefers_smallest_support():
    A, _, _ = planted(12)
    y = 2.0 * A[:, 4]
    rep = brute_force_l0_synthesis(y, A, 3)
    np.testing.assert_array_equal(rep.support, [4])


def test_brute_force_l0_infeasible_and_trivial(rng):
    A = gaussian_matrix(6, 8, seed=0)
    y = rng.standard_normal(6)
    rep = brute_force_l0_synthesis(y, A, 2)
    assert not rep.converged and len(rep.support) == 2
    zero = brute_force_l0_synthesis(y, A, 0)
    assert not zero.converged and zero.message == "infeasible at k=0"
    assert brute_force_l0_synthesis(np.zeros(6), A, 2).converged
    with pytest.raises(ValueError):
        brute_force_l0_synthesis(y, gaussian_matrix(6, 200, seed=1), 4)
    assert COMBINATORIAL_CAP == 100_000


def test_brute_force_l0_analysis_recovers_cosparse_signal():
    omega = random_tight_frame(10, 6, seed=3)
    sig = gen_cosparse(omega, 4, seed=4)
    M = gaussian_matrix(4, 6, seed=5)
    x = brute_force_l0_analysis(M @ sig.x, M, omega, 4)
    np.testing.assert_allclose(x, sig.x, atol=1e-9)


def test_brute_force_l0_analysis_warns_when_infeasible(rng):
    # any 6 rows of a generic 8 x 6 frame span R^6, so x = 0 is the only candidate
    omega = random_tight_frame(8, 6, seed=1)
    M = gaussian_matrix(6, 6, seed=2)
    with pytest.warns(RuntimeWarning, match="no cosupport"):
        x = brute_force_l0_analysis(rng.standard_normal(6), M, omega, 6)
    np.testing.assert_allclose(x, 0.0, atol=1e-12)


# --- program spec and estimators -------------------------------------------

def test_program_spec_roundtrip_and_validation():
    spec = SynthesisProgramSpec("cosamp", k=4, max_iters=50)
    assert SynthesisProgramSpec.from_dict(spec.to_dict()) == spec
    assert '"algorithm": "cosamp"' in spec.to_json()
    assert spec.with_k(7).k == 7
    for bad in ({"algorithm": "lasso"}, {"algorithm": "omp", "k": 0}, {"algorithm": "omp", "tol": 0.0}):
        with pytest.raises(ValueError):
            SynthesisProgramSpec.from_dict(bad)
    with pytest.raises(ValueError, match="unknown program fields"):
        SynthesisProgramSpec.from_dict({"algorithm": "omp", "depth": 3})


@pytest.mark.parametrize("algorithm", ["omp", "cosamp", "iht", "l1_bpdn", "brute_l0"])
def test_run_program_dispatch(algorithm):
    A, alpha, y = planted(21, m=15, n=30, k=2)
    rep = run_program(SynthesisProgramSpec(algorithm, k=2, max_iters=3000), y, A)
    assert rep.algorithm == algorithm
    np.testing.assert_allclose(rep.estimate, alpha, atol=1e-6)


def test_estimators_follow_sklearn_protocol():
    A, alpha, y = planted(5, m=40, n=60, k=4)
    for est in (OMP(n_nonzero_coefs=4), CoSaMP(n_nonzero_coefs=4), IHT(n_nonzero_coefs=4), BPDN()):
        twin = clone(est)
        assert twin.get_params() == est.get_params()
        twin.fit(A, y)
        np.testing.assert_allclose(twin.coef_, alpha, atol=1e-6)
        np.testing.assert_allclose(twin.predict(A), y, atol=1e-5)
        assert twin.score(A, y) > 0.999999
        assert twin.n_features_in_ == 60
    with pytest.raises(ValueError):
        OMP(n_nonzero_coefs=2).fit(A, y).predict(A[:, :10])
