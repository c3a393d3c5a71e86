import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nstfb.linalg import (
    NullSpaceTuner,
    RankDeficientError,
    SingularSystemError,
    min_norm_feasible,
    null_space_projector,
    precondition,
    restricted_ls,
    spectral_norm,
)
from nstfb.problems import gen_gaussian_matrix


def test_projector_identity_is_zero():
    np.testing.assert_array_equal(null_space_projector(np.eye(2)), np.zeros((2, 2)))


def test_projector_single_row():
    P = null_space_projector(np.array([[1.0, 0.0, 0.0]]))
    np.testing.assert_allclose(P, np.diag([0.0, 1.0, 1.0]), atol=1e-15)


def test_projector_gaussian_identities():
    A = gen_gaussian_matrix(3, 6, 7)
    P = null_space_projector(A)
    assert spectral_norm(P @ P - P) <= 1e-10
    assert spectral_norm(P - P.T) <= 1e-10
    assert spectral_norm(A @ P) <= 1e-10


def test_projector_complex_is_hermitian():
    rng = np.random.default_rng(0)
    A = rng.standard_normal((3, 7)) + 1j * rng.standard_normal((3, 7))
    P = null_space_projector(A)
    assert spectral_norm(P - P.conj().T) <= 1e-12
    assert spectral_norm(A @ P) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(
    M=st.integers(1, 6),
    extra=st.integers(0, 6),
    seed=st.integers(0, 2**32 - 1),
    c=st.floats(0.01, 100.0) | st.floats(-100.0, -0.01),
)
def test_projector_properties(M, extra, seed, c):
    A = gen_gaussian_matrix(M, M + extra, seed)
    P = null_space_projector(A)
    assert spectral_norm(P @ P - P) <= 1e-10
    assert spectral_norm(P - P.T) <= 1e-10
    assert spectral_norm(A @ P) <= 1e-10
    np.testing.assert_allclose(null_space_projector(c * A), P, atol=1e-10)


def test_rank_deficient_rows_rejected():
    A = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0]])
    with pytest.raises(RankDeficientError):
        NullSpaceTuner(A)


def test_wide_only():
    with pytest.raises(ValueError):
        NullSpaceTuner(np.ones((3, 2)))


def test_min_norm_examples():
    np.testing.assert_allclose(min_norm_feasible(np.eye(3), [1.0, 2.0, 3.0]), [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(min_norm_feasible(gen_gaussian_matrix(2, 5, 1), np.zeros(2)),
                                  np.zeros(5))


def test_min_norm_beats_any_feasible_point():
    A = gen_gaussian_matrix(4, 8, 3)
    x = np.random.default_rng(3).standard_normal(8)
    y = A @ x
    x0 = min_norm_feasible(A, y)
    assert np.linalg.norm(A @ x0 - y) <= 1e-10
    assert np.linalg.norm(x0) <= np.linalg.norm(x)
    # oracle: pseudo-inverse
    np.testing.assert_allclose(x0, np.linalg.pinv(A) @ y, atol=1e-12)


def test_tuner_step_is_feasible():
    A = gen_gaussian_matrix(5, 9, 11)
    tuner = NullSpaceTuner(A)
    rng = np.random.default_rng(1)
    y, u = rng.standard_normal(5), rng.standard_normal(9)
    x = tuner.tune(u, y)
    assert np.linalg.norm(A @ x - y) <= 1e-12
    # the step moves u by the smallest possible amount
    np.testing.assert_allclose(x - u, np.linalg.pinv(A) @ (y - A @ u), atol=1e-12)
    np.testing.assert_allclose(tuner.projector(), null_space_projector(A), atol=1e-14)


def test_restricted_ls_examples():
    b = np.array([0.0, 0.0, 7.0, 0.0])
    np.testing.assert_allclose(restricted_ls(np.eye(4), [2], b), [7.0])
    A = gen_gaussian_matrix(6, 10, 2)
    np.testing.assert_array_equal(restricted_ls(A, [1, 4, 7], np.zeros(6)), np.zeros(3))


def test_restricted_ls_normal_equations():
    A = gen_gaussian_matrix(6, 10, 5)
    T = [0, 3, 8]
    b = np.random.default_rng(5).standard_normal(6)
    z = restricted_ls(A, T, b)
    AT = A[:, T]
    assert np.linalg.norm(AT.T @ (AT @ z - b)) <= 1e-10
    np.testing.assert_allclose(z, np.linalg.lstsq(AT, b, rcond=None)[0], atol=1e-12)


def test_restricted_ls_uses_qr_when_ill_conditioned():
    rng = np.random.default_rng(9)
    A = rng.standard_normal((8, 3))
    A[:, 2] = A[:, 0] + 1e-7 * rng.standard_normal(8)
    b = rng.standard_normal(8)
    z, info = restricted_ls(A, [0, 1, 2], b, return_info=True)
    assert info["method"] == "qr"
    np.testing.assert_allclose(z, np.linalg.lstsq(A, b, rcond=None)[0], rtol=1e-5)


def test_restricted_ls_singular():
    A = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(SingularSystemError):
        restricted_ls(A, [0, 1], np.ones(2))


def test_restricted_ls_complex():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((6, 9)) + 1j * rng.standard_normal((6, 9))
    b = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    T = [1, 2, 5]
    np.testing.assert_allclose(restricted_ls(A, T, b), np.linalg.lstsq(A[:, T], b, rcond=None)[0],
                               atol=1e-12)


def test_precondition_examples():
    Q = np.linalg.qr(np.random.default_rng(0).standard_normal((5, 5)))[0][:3]
    np.testing.assert_allclose(precondition(Q, "half"), Q, atol=1e-12)
    np.testing.assert_allclose(precondition(Q, "full"), Q, atol=1e-12)
    np.testing.assert_allclose(precondition(2 * np.eye(3), "half"), np.eye(3), atol=1e-14)
    B = precondition(gen_gaussian_matrix(3, 6, 0), "half")
    assert spectral_norm(B @ B.T - np.eye(3)) <= 1e-10


def test_precondition_full_mode():
    A = gen_gaussian_matrix(3, 6, 1)
    np.testing.assert_allclose(precondition(A, "full"), np.linalg.solve(A @ A.T, A), atol=1e-12)
    with pytest.raises(ValueError):
        precondition(A, "quarter")


@settings(max_examples=30, deadline=None)
@given(M=st.integers(1, 5), extra=st.integers(0, 5), seed=st.integers(0, 10**6))
def test_precondition_half_has_orthonormal_rows(M, extra, seed):
    B = precondition(gen_gaussian_matrix(M, M + extra, seed), "half")
    assert spectral_norm(B @ B.T - np.eye(M)) <= 1e-10


def test_spectral_norm_examples():
    assert spectral_norm(np.diag([1.0, -3.0, 2.0])) == pytest.approx(3.0)
    assert spectral_norm(np.zeros((3, 2))) == 0.0
    S = np.random.default_rng(2).standard_normal((5, 5))
    S = S + S.T
    assert spectral_norm(S) == pytest.approx(np.max(np.abs(np.linalg.eigvalsh(S))), abs=1e-10)
