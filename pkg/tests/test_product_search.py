import numpy as np
import pytest
from oracles import product_minimum, subtraction_amount

from wforge.bipartite import BipartiteOperator, expectation, partial_transpose, product
from wforge.errors import NotWitnessError, WforgeError
from wforge.product_search import (
    DEFAULT_CONFIG,
    bloch_grid,
    haar_vector,
    min_contraction_ratio,
    min_product_expectation,
    polish_zero,
    seesaw,
    span_dimension,
    swap_subsystems,
    tangent_form,
    zero_set,
)


def swap_witness():
    """Swap operator on C^2 (x) C^2: <e,f|F|e,f> = |<e|f>|^2."""
    F = np.eye(4)[[0, 2, 1, 3]]
    return BipartiteOperator(F, 2, 2)


def shifted_pt_witness(rng, db, shift):
    d = 2 * db
    psi = rng.normal(size=d) + 1j * rng.normal(size=d)
    psi /= np.linalg.norm(psi)
    P = BipartiteOperator(np.outer(psi, psi.conj()), 2, db)
    return partial_transpose(P) + BipartiteOperator(shift * np.eye(d), 2, db)


def test_config_is_immutable_and_copyable():
    cfg = DEFAULT_CONFIG.with_(seed=5)
    assert cfg.seed == 5 and DEFAULT_CONFIG.seed == 0
    with pytest.raises(Exception):
        cfg.seed = 1


def test_bloch_grid_unit_vectors():
    E = bloch_grid(11)
    assert E.shape == (11, 11, 2)
    assert np.allclose(np.linalg.norm(E, axis=-1), 1)


def test_haar_vector_deterministic():
    a = haar_vector(np.random.default_rng(3), 4)
    b = haar_vector(np.random.default_rng(3), 4)
    assert np.allclose(a, b) and np.isclose(np.linalg.norm(a), 1)


def test_seesaw_value_is_attained_and_not_above_start(rng):
    W = shifted_pt_witness(rng, 3, 0.1)
    e0 = haar_vector(rng, 2)
    start = np.linalg.eigvalsh(np.einsum("i,imjn,j->mn", e0.conj(), W.tensor4(), e0))[0]
    val, e, f, converged, sweeps = seesaw(W, e0)
    assert val <= start + 1e-12
    assert abs(expectation(W, np.kron(e, f)).real - val) < 1e-12
    assert converged and sweeps >= 1


@pytest.mark.parametrize("db", [2, 3, 4])
def test_min_product_expectation_matches_brute_force(db):
    rng = np.random.default_rng(10 + db)
    W = shifted_pt_witness(rng, db, 0.03)
    res = min_product_expectation(W)
    oracle = product_minimum(W.matrix, db, n=60, zooms=4)
    assert abs(res.value - oracle) < 1e-8
    assert abs(expectation(W, res.argmin).real - res.value) < 1e-10


def test_min_product_expectation_qubit_on_b_side(rng):
    W = shifted_pt_witness(rng, 3, 0.03)
    a = min_product_expectation(W).value
    b = min_product_expectation(swap_subsystems(W)).value
    assert abs(a - b) < 1e-9


def test_swap_witness_zero_set_is_continuum_spanning_everything():
    W = swap_witness()
    zs = zero_set(W)
    assert len(zs) > 8
    for z in zs:
        assert abs(expectation(W, z)) < 1e-12
        assert abs(np.vdot(z.e, z.f)) < 1e-6
    assert span_dimension(zs) == 4


def test_zero_set_rejects_operators_negative_on_products():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    X = BipartiteOperator(np.eye(4) * 0.1 - np.outer(bell, bell), 2, 2)
    with pytest.raises(NotWitnessError):
        zero_set(X)


def test_zero_set_grid_and_seesaw_agree(half_pipeline):
    _, W, _ = half_pipeline
    a = zero_set(W.op, method="grid")
    b = zero_set(W.op, method="seesaw")
    assert len(a) == len(b) == 8
    for z in a:
        assert max(abs(np.vdot(z.joint, y.joint)) ** 2 for y in b) > 1 - 1e-6


def test_zeros_are_exact_after_polish(half_pipeline):
    _, W, _ = half_pipeline
    for z in W.zero_set:
        Wf = np.einsum("m,imjn,n->ij", z.f.conj(), W.op.tensor4(), z.f)
        assert np.linalg.norm(Wf @ z.e) < 1e-12


def test_polish_zero_improves_a_perturbed_zero(half_pipeline):
    _, W, _ = half_pipeline
    z = W.zero_set[0]
    rng = np.random.default_rng(0)
    e = z.e + 1e-4 * haar_vector(rng, 2)
    f = z.f + 1e-4 * haar_vector(rng, 4)
    v0 = expectation(W.op, product(e, f)).real
    v1, e2, f2 = polish_zero(W.op, e, f)
    assert abs(expectation(W.op, product(e2, f2)).real - v1) < 1e-14
    assert v1 < 1e-3 * v0


def test_tangent_form_is_psd_at_zeros(half_pipeline):
    _, W, _ = half_pipeline
    for z in W.zero_set:
        Q, B, n = tangent_form(W.op, z.e, z.f)
        assert np.allclose(Q, Q.T)
        assert np.linalg.eigvalsh(Q)[0] > -1e-10
        assert np.allclose(B.conj().T @ z.joint, 0)


def test_span_dimension():
    vecs = [product([1, 0], [1, 0]), product([0, 1], [1, 0]), product([1, 1], [1, 0])]
    assert span_dimension(vecs) == 2
    assert span_dimension([]) == 0


@pytest.mark.parametrize("db", [2, 3])
def test_contraction_ratio_matches_brute_force(db):
    rng = np.random.default_rng(20 + db)
    d = 2 * db
    W = shifted_pt_witness(rng, db, 0.05)
    Y = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    D = BipartiteOperator(Y @ Y.conj().T / d + 0.1 * np.eye(d), 2, db)
    res = min_contraction_ratio(W, D)
    oracle = subtraction_amount(W.matrix, D.matrix, db, n=60)
    assert abs(res.value - oracle) < 1e-6 * oracle
    assert abs(res.primal - res.dual) < 1e-6 * res.value


def test_contraction_ratio_at_a_witness_with_zeros(half_pipeline):
    # the non-optimal first witness: subtracting the projector off its
    # zeros is possible by a positive amount, and the amount is sharp
    W1, _, _ = half_pipeline
    from wforge.linalg import complement_basis

    C = complement_basis([z.joint for z in W1.zero_set], 8)
    D = W1.op.like(C @ C.conj().T)
    res = min_contraction_ratio(W1.op, D, zeros=W1.zero_set)
    assert res.value > 0
    lam = res.value
    assert min_product_expectation(W1.op - D * (0.98 * lam)).value > -1e-9
    assert min_product_expectation(W1.op - D * (1.1 * lam)).value < -1e-9


def test_contraction_ratio_requires_vanishing_on_zeros():
    W = swap_witness()
    with pytest.raises(WforgeError):
        min_contraction_ratio(W, BipartiteOperator(np.eye(4), 2, 2))


def test_contraction_ratio_infinite_when_d_vanishes_everywhere():
    W = swap_witness()
    res = min_contraction_ratio(W, BipartiteOperator(np.zeros((4, 4)), 2, 2))
    assert res.value == np.inf
