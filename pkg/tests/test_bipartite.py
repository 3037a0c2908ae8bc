import numpy as np
import pytest

from wforge.bipartite import (
    BipartiteOperator,
    canonical_phase,
    contract_a,
    contract_a_batch,
    contract_b,
    expectation,
    identity,
    is_ppt,
    partial_conjugate,
    partial_transpose,
    partial_transpose_matrix,
    product,
    projector,
    split_product,
)
from wforge.errors import DimensionError, WforgeError


def random_operator(rng, da, db):
    d = da * db
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return BipartiteOperator(X + X.conj().T, da, db)


def test_shape_is_checked():
    with pytest.raises(DimensionError):
        BipartiteOperator(np.eye(6), 2, 2)


def test_matrix_is_read_only():
    X = identity(2, 2)
    with pytest.raises(ValueError):
        X.matrix[0, 0] = 5


def test_arithmetic_requires_matching_dims():
    with pytest.raises(DimensionError):
        identity(2, 3) + identity(3, 2)
    X = identity(2, 2) * 2 - identity(2, 2)
    assert np.allclose(X.matrix, np.eye(4))


def test_partial_transpose_involution_and_matrix_form(rng):
    X = random_operator(rng, 2, 3)
    assert np.allclose(partial_transpose(partial_transpose(X)).matrix, X.matrix)
    assert np.allclose(partial_transpose_matrix(X.matrix, 2, 3), X.pt().matrix)


def test_partial_transpose_of_product_operator(rng):
    A = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    X = BipartiteOperator(np.kron(A, B), 2, 3)
    assert np.allclose(X.pt().matrix, np.kron(A, B.T))


def test_partial_transpose_expectation_identity(rng):
    # <e,f*|X|e,f*> = <e,f|X^{T_B}|e,f>
    X = random_operator(rng, 2, 4)
    v = product(rng.normal(size=2) + 1j * rng.normal(size=2), rng.normal(size=4) + 1j * rng.normal(size=4))
    assert abs(expectation(X, partial_conjugate(v)) - expectation(X.pt(), v)) < 1e-12


def test_product_normalizes_and_canonicalizes():
    v = product([0, 2j], [1j, 0, 0])
    assert np.isclose(np.linalg.norm(v.joint), 1)
    assert v.e[1].real > 0 and abs(v.e[1].imag) < 1e-15
    with pytest.raises(WforgeError):
        product([0, 0], [1, 0])


def test_canonical_phase_keeps_zero():
    assert np.all(canonical_phase(np.zeros(3)) == 0)


def test_split_product_round_trip(rng):
    v = product(rng.normal(size=3) + 1j * rng.normal(size=3), rng.normal(size=2) + 1j * rng.normal(size=2))
    w = split_product(v.joint * np.exp(0.7j), 3, 2)
    assert abs(abs(np.vdot(v.joint, w.joint)) - 1) < 1e-12


def test_partial_conjugate_example():
    v = product([1, 0], [1, 1j])
    assert np.allclose(partial_conjugate(v).f, np.array([1, -1j]) / np.sqrt(2) * np.exp(0j))


def test_contractions_match_expectation(rng):
    X = random_operator(rng, 2, 3)
    e = rng.normal(size=2) + 1j * rng.normal(size=2)
    f = rng.normal(size=3) + 1j * rng.normal(size=3)
    full = expectation(X, np.kron(e, f))
    assert abs(np.vdot(f, contract_a(X, e) @ f) - full) < 1e-10
    assert abs(np.vdot(e, contract_b(X, f) @ e) - full) < 1e-10
    batch = contract_a_batch(X, np.stack([e, 2 * e]))
    assert np.allclose(batch[0], contract_a(X, e))
    assert np.allclose(batch[1], 4 * contract_a(X, e))
    with pytest.raises(DimensionError):
        contract_a(X, np.ones(3))
    with pytest.raises(DimensionError):
        expectation(X, np.ones(5))


def test_is_ppt_on_bell_and_product():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert not is_ppt(projector(bell, 2, 2))
    assert is_ppt(projector(np.kron([1, 0], [0, 1]), 2, 2))
