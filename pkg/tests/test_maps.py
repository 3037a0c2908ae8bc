import numpy as np
import pytest

from wforge.bipartite import BipartiteOperator
from wforge.errors import DimensionError
from wforge.maps import (
    apply_extended,
    apply_map,
    map_detects,
    map_min_eigenvalue,
    max_entangled,
    transposition_operator,
)
from wforge.states import tilde_rho_b


def random_hermitian(rng, da, db):
    d = da * db
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return BipartiteOperator(X + X.conj().T, da, db)


def random_state(rng, da, db):
    d = da * db
    X = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    M = X @ X.conj().T
    return BipartiteOperator(M / np.trace(M).real, da, db)


@pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 2), (2, 4)])
def test_expectation_equals_extended_map_overlap(dims):
    rng = np.random.default_rng(sum(dims))
    psi = max_entangled(dims[1])
    for _ in range(10):
        X = random_hermitian(rng, *dims)
        rho = random_state(rng, *dims)
        lhs = np.trace(X.matrix @ rho.matrix)
        rhs = np.vdot(psi, apply_extended(X, rho).matrix @ psi)
        assert abs(lhs - rhs) < 1e-9


def test_map_matches_its_definition_on_matrix_units(rng):
    X = random_hermitian(rng, 2, 3)
    T = X.tensor4()
    for a in range(2):
        for a2 in range(2):
            Y = np.zeros((2, 2))
            Y[a, a2] = 1
            assert np.allclose(apply_map(X, Y), T[a2, :, a, :].T)


def test_transposition_operator(rng):
    X = transposition_operator(3)
    Y = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    assert np.allclose(apply_map(X, Y), Y.T)
    rho = random_state(rng, 3, 3)
    # transposition on the A factor: swap the A row and column indices
    expected = rho.tensor4().transpose(2, 1, 0, 3).reshape(9, 9)
    assert np.allclose(apply_extended(X, rho).matrix, expected)


def test_dimension_checks(rng):
    X = random_hermitian(rng, 2, 3)
    with pytest.raises(DimensionError):
        apply_map(X, np.eye(3))
    with pytest.raises(DimensionError):
        apply_extended(X, random_state(rng, 2, 2))
    with pytest.raises(DimensionError):
        apply_extended(X, random_state(rng, 3, 3))


def test_map_of_optimized_witness_detects_its_state(half_pipeline):
    _, W, _ = half_pipeline
    rho = tilde_rho_b(0.5)
    flag, m = map_detects(W, rho)
    assert flag and m < 0
    assert m == map_min_eigenvalue(W.op, rho)


def test_map_is_positive_on_separable_inputs(half_pipeline):
    # a positive map sends product states to PSD operators
    _, W, _ = half_pipeline
    rng = np.random.default_rng(9)
    for _ in range(20):
        e = rng.normal(size=2) + 1j * rng.normal(size=2)
        f = rng.normal(size=4) + 1j * rng.normal(size=4)
        v = np.kron(e, f) / np.linalg.norm(e) / np.linalg.norm(f)
        rho = BipartiteOperator(np.outer(v, v.conj()), 2, 4)
        assert map_min_eigenvalue(W, rho) > -1e-12
