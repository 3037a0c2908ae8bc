import numpy as np
import pytest

from wforge.errors import NotHermitianError, NotPSDError
from wforge.linalg import (
    as_hermitian,
    complement_basis,
    eig_hermitian,
    is_psd,
    kernel_basis,
    kernel_projector,
    max_generalized_shift,
    min_generalized_ratio,
    numerical_rank,
    pinv_hermitian,
    pinv_sqrt,
    range_projector,
)


def random_psd(rng, d, rank=None):
    rank = rank or d
    X = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    return X @ X.conj().T


def test_as_hermitian_accepts_and_symmetrizes():
    M = np.array([[1, 1j], [-1j + 1e-12, 2]])
    H = as_hermitian(M)
    assert np.allclose(H, H.conj().T, atol=0)


def test_as_hermitian_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        as_hermitian(np.array([[0, 1], [0, 0]]))


def test_as_hermitian_rejects_non_square():
    with pytest.raises(ValueError):
        as_hermitian(np.zeros((2, 3)))


def test_eig_hermitian_reconstructs(rng):
    M = random_psd(rng, 5) - 2 * np.eye(5)
    dec = eig_hermitian(M)
    assert np.all(np.diff(dec.eigenvalues) >= 0)
    assert np.abs(dec.reconstruct() - M).max() < 1e-10


def test_pinv_hermitian_on_rank_deficient(rng):
    M = random_psd(rng, 6, rank=3)
    P = pinv_hermitian(M)
    assert np.abs(M @ P @ M - M).max() < 1e-9
    assert np.abs(P @ M @ P - P).max() < 1e-9


def test_pinv_sqrt_squares_to_pinv(rng):
    M = random_psd(rng, 5, rank=4)
    S = pinv_sqrt(M)
    assert np.abs(S @ S - pinv_hermitian(M)).max() < 1e-8


def test_pinv_sqrt_rejects_indefinite():
    with pytest.raises(NotPSDError):
        pinv_sqrt(np.diag([1.0, -1.0]))


def test_kernel_and_range_projectors_complement(rng):
    M = random_psd(rng, 6, rank=2)
    K = kernel_basis(M)
    assert K.shape[1] == 4
    assert np.abs(M @ K).max() < 1e-9
    assert np.abs(kernel_projector(M) + range_projector(M) - np.eye(6)).max() < 1e-10


def test_numerical_rank_and_complement(rng):
    v = rng.normal(size=(5, 2)) + 1j * rng.normal(size=(5, 2))
    vecs = [v[:, 0], v[:, 1], v[:, 0] + 2 * v[:, 1]]
    assert numerical_rank(np.column_stack(vecs)) == 2
    C = complement_basis(vecs, 5)
    assert C.shape == (5, 3)
    assert np.abs(C.conj().T @ v).max() < 1e-12
    assert numerical_rank(np.zeros((3, 3))) == 0


def test_is_psd():
    assert is_psd(np.eye(3))
    assert not is_psd(np.diag([1, -1e-6]))


def test_generalized_shift_agrees_with_ratio_on_full_rank(rng):
    for _ in range(20):
        W = random_psd(rng, 4)
        D = random_psd(rng, 4)
        lam = max_generalized_shift(W, D)
        # W - lam D is singular and PSD
        w = np.linalg.eigvalsh(W - lam * D)
        assert w[0] > -1e-9 * np.abs(W).max()
        assert abs(w[0]) < 1e-8 * np.abs(W).max()
        assert abs(min_generalized_ratio(W, D) - lam) < 1e-8 * lam


def test_generalized_shift_with_singular_d(rng):
    # D has a kernel coupled to its range through W: the Schur complement
    # form must agree with the W-side form
    for _ in range(20):
        W = random_psd(rng, 5)
        D = random_psd(rng, 5, rank=2)
        a = max_generalized_shift(W, D)
        b = min_generalized_ratio(W, D)
        assert abs(a - b) < 1e-7 * a


def test_generalized_shift_edge_cases():
    W = np.diag([1.0, 0.0])
    assert max_generalized_shift(W, np.diag([0.0, 1.0])) == 0.0
    assert max_generalized_shift(W, np.zeros((2, 2))) == np.inf
    assert max_generalized_shift(np.eye(2), np.diag([2.0, 1.0])) == pytest.approx(0.5)
