"""Operators and vectors on H_A (x) H_B.

Basis ordering is |i_A, m_B> with the A index outer, i.e. the composite index
is ``i * d_B + m``. Partial transposition always acts on the B factor.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, WforgeError
from .linalg import as_hermitian


@dataclass(frozen=True)
class BipartiteOperator:
    matrix: np.ndarray
    dim_a: int
    dim_b: int

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        d = self.dim_a * self.dim_b
        if m.shape != (d, d):
            raise DimensionError(
                f"matrix shape {m.shape} does not match dims ({self.dim_a}, {self.dim_b})"
            )
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dims(self):
        return (self.dim_a, self.dim_b)

    @property
    def dim(self):
        return self.dim_a * self.dim_b

    def trace(self):
        return complex(np.trace(self.matrix))

    def like(self, matrix):
        return BipartiteOperator(matrix, self.dim_a, self.dim_b)

    def hermitian(self):
        return self.like(as_hermitian(self.matrix))

    def pt(self):
        return partial_transpose(self)

    def tensor4(self):
        """View as W[i, m, j, n] = <i,m|X|j,n>."""
        return self.matrix.reshape(self.dim_a, self.dim_b, self.dim_a, self.dim_b)

    def __add__(self, other):
        _check_same_dims(self, other)
        return self.like(self.matrix + other.matrix)

    def __sub__(self, other):
        _check_same_dims(self, other)
        return self.like(self.matrix - other.matrix)

    def __mul__(self, c):
        return self.like(self.matrix * c)

    __rmul__ = __mul__

    def __truediv__(self, c):
        return self.like(self.matrix / c)


def _check_same_dims(x, y):
    if x.dims != y.dims:
        raise DimensionError(f"dimension mismatch {x.dims} vs {y.dims}")


def canonical_phase(v):
    """Rotate the global phase so the largest-magnitude entry is real positive."""
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) == 0:
        return v
    return v * (abs(v[k]) / v[k])


@dataclass(frozen=True)
class ProductVector:
    e: np.ndarray
    f: np.ndarray
    joint: np.ndarray = field(repr=False)

    @property
    def dims(self):
        return (len(self.e), len(self.f))


def product(e, f):
    """Normalized product vector |e> (x) |f> with a canonical global phase."""
    e = np.asarray(e, dtype=complex).ravel()
    f = np.asarray(f, dtype=complex).ravel()
    ne, nf = np.linalg.norm(e), np.linalg.norm(f)
    if ne == 0 or nf == 0:
        raise WforgeError("product vector factors must be nonzero")
    e = canonical_phase(e / ne)
    f = canonical_phase(f / nf)
    joint = np.kron(e, f)
    e.setflags(write=False)
    f.setflags(write=False)
    joint.setflags(write=False)
    return ProductVector(e, f, joint)


def split_product(v, dim_a, dim_b):
    """Factor a (numerically) product joint vector via its rank-1 SVD."""
    M = np.asarray(v, dtype=complex).reshape(dim_a, dim_b)
    u, s, vh = np.linalg.svd(M)
    return product(u[:, 0] * s[0], vh[0])


def partial_conjugate(v):
    """|e, f> -> |e, f*> (conjugate the B factor in the computational basis)."""
    return product(v.e, np.conj(v.f))


def partial_transpose(X):
    """Transpose on B: (X^T_B)[(i,m),(j,n)] = X[(i,n),(j,m)]."""
    da, db = X.dims
    t = X.tensor4().transpose(0, 3, 2, 1).reshape(da * db, da * db)
    return X.like(t)


def partial_transpose_matrix(M, dim_a, dim_b):
    return (
        np.asarray(M).reshape(dim_a, dim_b, dim_a, dim_b).transpose(0, 3, 2, 1).reshape(dim_a * dim_b, -1)
    )


def contract_a(W, e):
    """W_e = <e|W|e>, a d_B x d_B matrix."""
    e = np.asarray(e, dtype=complex)
    if e.shape != (W.dim_a,):
        raise DimensionError(f"vector of length {e.size} does not fit H_A of dim {W.dim_a}")
    return np.einsum("i,imjn,j->mn", e.conj(), W.tensor4(), e)


def contract_b(W, f):
    """W_f = <f|W|f>, a d_A x d_A matrix."""
    f = np.asarray(f, dtype=complex)
    if f.shape != (W.dim_b,):
        raise DimensionError(f"vector of length {f.size} does not fit H_B of dim {W.dim_b}")
    return np.einsum("m,imjn,n->ij", f.conj(), W.tensor4(), f)


def contract_a_batch(W, E):
    """Stack of <e|W|e> for the rows of E (shape (k, d_A)) -> (k, d_B, d_B)."""
    return np.einsum("ki,imjn,kj->kmn", E.conj(), W.tensor4(), E, optimize=True)


def expectation(X, v):
    """<v|X|v> for a joint vector or ProductVector `v`."""
    if isinstance(v, ProductVector):
        v = v.joint
    v = np.asarray(v, dtype=complex)
    M = X.matrix if isinstance(X, BipartiteOperator) else np.asarray(X)
    if v.shape != (M.shape[0],):
        raise DimensionError(f"vector of length {v.size} does not fit operator of dim {M.shape[0]}")
    return complex(np.vdot(v, M @ v))


def identity(dim_a, dim_b):
    return BipartiteOperator(np.eye(dim_a * dim_b), dim_a, dim_b)


def projector(v, dim_a, dim_b):
    v = np.asarray(v, dtype=complex)
    return BipartiteOperator(np.outer(v, v.conj()), dim_a, dim_b)


def is_ppt(X, tol=1e-9):
    w = np.linalg.eigvalsh(as_hermitian(X.matrix))
    wt = np.linalg.eigvalsh(as_hermitian(partial_transpose(X).matrix))
    return bool(w[0] >= -tol and wt[0] >= -tol)
