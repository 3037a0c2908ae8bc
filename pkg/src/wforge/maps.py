"""Positive maps associated with witnesses.

An operator X on H_A (x) H_C defines a linear map E_X: B(H_A) -> B(H_C) with

    E_X(Y)_{c c'} = sum_{a, a'} Y_{a a'} X_{(a' c'), (a c)},

i.e. E_X(|a><a'|) = <a'|X|a>^T taken over the C indices. This is
tr_A[X^{T_C} (Y (x) 1)] and is the convention for which, with
|Psi> = sum_k |k,k>,

    tr(X rho) = <Psi| (E_X (x) 1)(rho) |Psi>

holds for every rho on H_A (x) H_B with d_B = d_C (see the decisions log for
why the A-side transposition form is not used). For X = (|Psi><Psi|)^{T_A}
the map is the transposition.
"""

from dataclasses import dataclass

import numpy as np

from .bipartite import BipartiteOperator
from .errors import DimensionError

MAP_DETECTION_TOL = 1e-10


@dataclass(frozen=True)
class MapAction:
    source: BipartiteOperator
    output: np.ndarray


def apply_map(X, Y):
    """E_X(Y) for Y on H_A; returns a d_C x d_C matrix."""
    Y = np.asarray(Y, dtype=complex)
    if Y.shape != (X.dim_a, X.dim_a):
        raise DimensionError(f"Y has shape {Y.shape}, expected ({X.dim_a}, {X.dim_a})")
    return np.einsum("ab,bdac->cd", Y, X.tensor4())


def apply_extended(X, rho):
    """(E_X (x) 1)(rho) for rho on H_A (x) H_B; returns an operator on H_C (x) H_B."""
    if rho.dim_a != X.dim_a:
        raise DimensionError(f"map acts on dimension {X.dim_a}, state has d_A = {rho.dim_a}")
    if rho.dim_b != X.dim_b:
        raise DimensionError(f"extension needs d_B = d_C, got {rho.dim_b} and {X.dim_b}")
    dc, db = X.dim_b, rho.dim_b
    out = np.einsum("ambn,bdac->cmdn", rho.tensor4(), X.tensor4())
    return BipartiteOperator(out.reshape(dc * db, dc * db), dc, db)


def max_entangled(d):
    """Unnormalized sum_k |k,k>."""
    return np.eye(d).ravel().astype(complex)


def transposition_operator(d):
    """(|Psi><Psi|)^{T_A} on C^d (x) C^d, whose map is Y -> Y^T."""
    psi = max_entangled(d)
    P = np.outer(psi, psi.conj()).reshape(d, d, d, d)
    # A-side transpose: swap the A row/column indices
    return BipartiteOperator(P.transpose(2, 1, 0, 3).reshape(d * d, d * d), d, d)


def map_min_eigenvalue(W, rho):
    op = W.op if hasattr(W, "op") else W
    M = apply_extended(op, rho).matrix
    return float(np.linalg.eigvalsh((M + M.conj().T) / 2)[0])


def map_detects(W, rho, tol=MAP_DETECTION_TOL):
    """Whether the extended map of W sends rho to a non-positive operator."""
    m = map_min_eigenvalue(W, rho)
    return m < -tol, m
