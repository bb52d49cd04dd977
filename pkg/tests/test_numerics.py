import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from transdomain.numerics import (
    default_rank_tol,
    least_squares,
    null_space,
    numerical_rank,
    project_out_rows,
    pseudo_inverse,
    read_matrix_csv,
    read_vector_csv,
    singular_value_extremes,
    svd,
    write_matrix_csv,
    write_vector_csv,
)


def jacobi_eigenvalues(S, sweeps=100):
    """Cyclic Jacobi rotations on a symmetric matrix; independent of LAPACK's SVD."""
    S = S.copy()
    n = S.shape[0]
    for _ in range(sweeps):
        off = np.sqrt(np.sum(S**2) - np.sum(np.diag(S) ** 2))
        if off < 1e-14 * max(np.linalg.norm(S), 1e-300):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(S[p, q]) < 1e-300:
                    continue
                theta = (S[q, q] - S[p, p]) / (2 * S[p, q])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta**2 + 1)) if theta != 0 else 1.0
                c = 1 / np.sqrt(t**2 + 1)
                s = t * c
                J = np.eye(n)
                J[p, p] = J[q, q] = c
                J[p, q] = s
                J[q, p] = -s
                S = J.T @ S @ J
    return np.sort(np.diag(S))[::-1]


matrices = arrays(
    np.float64,
    st.tuples(st.integers(1, 6), st.integers(1, 6)),
    elements=st.floats(-10, 10, allow_nan=False, width=64),
)


def test_singular_values_match_jacobi_oracle(rng):
    for shape in [(5, 3), (3, 5), (6, 6)]:
        M = rng.standard_normal(shape)
        s = svd(M).singular_values
        eig = jacobi_eigenvalues(M.T @ M if shape[0] >= shape[1] else M @ M.T)
        np.testing.assert_allclose(s, np.sqrt(np.clip(eig, 0, None)), rtol=1e-10, atol=1e-12)


@given(matrices)
def test_svd_reconstructs_and_is_orthonormal(M):
    f = svd(M)
    np.testing.assert_allclose(f.reconstruct(), M, atol=1e-9 * max(1.0, np.abs(M).max()))
    r = f.singular_values.size
    np.testing.assert_allclose(f.left_vectors.T @ f.left_vectors, np.eye(r), atol=1e-10)
    np.testing.assert_allclose(f.right_vectors.T @ f.right_vectors, np.eye(r), atol=1e-10)
    assert np.all(np.diff(f.singular_values) <= 1e-12)


@given(matrices)
def test_pseudo_inverse_penrose_conditions(M):
    P = pseudo_inverse(M)
    scale = max(1.0, np.abs(M).max())
    atol = 1e-7 * scale
    np.testing.assert_allclose(M @ P @ M, M, atol=atol)
    np.testing.assert_allclose(P @ M @ P, P, atol=1e-7 * max(1.0, np.abs(P).max()))
    np.testing.assert_allclose((M @ P).T, M @ P, atol=1e-8)
    np.testing.assert_allclose((P @ M).T, P @ M, atol=1e-8)


def test_pseudo_inverse_of_full_rank_square_is_inverse(rng):
    M = rng.standard_normal((5, 5))
    np.testing.assert_allclose(pseudo_inverse(M), np.linalg.inv(M), atol=1e-10)


def test_zero_matrix_pinv_is_transposed_zero():
    P = pseudo_inverse(np.zeros((3, 4)))
    assert P.shape == (4, 3)
    assert not P.any()


def test_numerical_rank_and_extremes(rng):
    U = rng.standard_normal((6, 2))
    M = U @ rng.standard_normal((2, 5))
    assert numerical_rank(M) == 2
    smin, smax = singular_value_extremes(M)
    assert smin < 1e-12 * smax
    assert numerical_rank(np.zeros((3, 3))) == 0
    assert default_rank_tol((4, 9)) == pytest.approx(9e-10)


def test_least_squares_matches_normal_equations(rng):
    A = rng.standard_normal((8, 4))
    b = rng.standard_normal(8)
    res = least_squares(A, b)
    x_ref = np.linalg.solve(A.T @ A, A.T @ b)
    np.testing.assert_allclose(res.solution, x_ref, atol=1e-12)
    assert not res.rank_deficient
    assert res.residual_norm == pytest.approx(np.linalg.norm(A @ x_ref - b))


def test_least_squares_rank_deficient_gives_minimum_norm(rng):
    A = rng.standard_normal((6, 2)) @ rng.standard_normal((2, 4))
    b = rng.standard_normal(6)
    res = least_squares(A, b)
    assert res.rank == 2 and res.rank_deficient
    # minimum-norm solution lies in the row space of A
    np.testing.assert_allclose(null_space(A).T @ res.solution, 0, atol=1e-10)


def test_null_space_orthonormal_and_annihilated(rng):
    M = rng.standard_normal((3, 7))
    N = null_space(M)
    assert N.shape == (7, 4)
    np.testing.assert_allclose(N.T @ N, np.eye(4), atol=1e-12)
    np.testing.assert_allclose(M @ N, 0, atol=1e-12)
    np.testing.assert_array_equal(null_space(np.zeros((0, 3))), np.eye(3))


def test_project_out_rows(rng):
    R = rng.standard_normal((2, 5))
    v = rng.standard_normal(5)
    p = project_out_rows(R, v)
    np.testing.assert_allclose(R @ p, 0, atol=1e-12)
    np.testing.assert_allclose(project_out_rows(R, p), p, atol=1e-12)


def test_matrix_csv_roundtrip_full_precision(tmp_path, rng):
    M = rng.standard_normal((4, 3)) * 10.0 ** rng.integers(-20, 20, (4, 3))
    write_matrix_csv(tmp_path / "m.csv", M)
    np.testing.assert_array_equal(read_matrix_csv(tmp_path / "m.csv"), M)
    assert (tmp_path / "m.csv").read_text().splitlines()[0] == "4,3"
    v = rng.standard_normal(5)
    write_vector_csv(tmp_path / "v.csv", v)
    np.testing.assert_array_equal(read_vector_csv(tmp_path / "v.csv"), v)


def test_matrix_csv_header_mismatch(tmp_path):
    (tmp_path / "bad.csv").write_text("3,2\n1,2\n3,4\n")
    with pytest.raises(ValueError, match="header"):
        read_matrix_csv(tmp_path / "bad.csv")
    (tmp_path / "empty.csv").write_text("")
    with pytest.raises(ValueError, match="empty"):
        read_matrix_csv(tmp_path / "empty.csv")


def test_non_finite_input_rejected():
    with pytest.raises(ValueError):
        svd(np.array([[1.0, np.nan]]))
