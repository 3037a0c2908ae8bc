"""Dense Hermitian linear algebra helpers.

Every routine here works on small dense complex matrices (dimension at most a
few dozen). Rank decisions use a cutoff relative to the largest eigenvalue
magnitude, so results do not depend on the overall scale of the input.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NotHermitianError, NotPSDError

HERMITIAN_TOL = 1e-10
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def hermitian_deviation(M):
    M = np.asarray(M)
    return float(np.abs(M - M.conj().T).max()) if M.size else 0.0


def as_hermitian(M, tol=HERMITIAN_TOL):
    """Check Hermiticity entrywise within `tol` and return the symmetrized matrix."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    dev = hermitian_deviation(M)
    if dev > tol:
        raise NotHermitianError(dev)
    return (M + M.conj().T) / 2


def eig_hermitian(M):
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    H = as_hermitian(M)
    w, v = np.linalg.eigh(H)
    return EigenDecomposition(w, v)


def _cutoff(w, cutoff):
    if cutoff is not None:
        return cutoff
    scale = np.abs(w).max() if w.size else 0.0
    return RANK_RTOL * scale


def pinv_sqrt(M, cutoff=None, psd_tol=1e-9):
    """Square root of the pseudo-inverse of a PSD matrix.

    Eigenvalues below `cutoff` (default ``1e-10 * max eigenvalue``) are
    treated as exact zeros and mapped to zero.
    """
    w, v = np.linalg.eigh(as_hermitian(M))
    scale = np.abs(w).max() if w.size else 0.0
    if w.size and w[0] < -psd_tol * max(scale, 1.0):
        raise NotPSDError(f"matrix has eigenvalue {w[0]:.3e} < 0")
    c = _cutoff(w, cutoff)
    inv = np.zeros_like(w)
    keep = w > c
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (v * inv) @ v.conj().T


def pinv_hermitian(M, cutoff=None):
    w, v = np.linalg.eigh(as_hermitian(M))
    c = _cutoff(w, cutoff)
    inv = np.zeros_like(w)
    keep = np.abs(w) > c
    inv[keep] = 1.0 / w[keep]
    return (v * inv) @ v.conj().T


def kernel_basis(M, cutoff=None):
    """Orthonormal columns spanning the numerical kernel of Hermitian `M`."""
    w, v = np.linalg.eigh(as_hermitian(M))
    c = _cutoff(w, cutoff)
    return v[:, np.abs(w) <= c]


def range_basis(M, cutoff=None):
    w, v = np.linalg.eigh(as_hermitian(M))
    c = _cutoff(w, cutoff)
    return v[:, np.abs(w) > c]


def kernel_projector(M, cutoff=None):
    k = kernel_basis(M, cutoff)
    return k @ k.conj().T


def range_projector(M, cutoff=None):
    r = range_basis(M, cutoff)
    return r @ r.conj().T


def numerical_rank(vectors, rtol=RANK_RTOL):
    """Rank of the matrix whose columns are `vectors` (relative SVD cutoff)."""
    V = np.asarray(vectors)
    if V.size == 0:
        return 0
    s = np.linalg.svd(V, compute_uv=False)
    if s[0] == 0:
        return 0
    return int((s > rtol * s[0]).sum())


def complement_basis(vectors, dim, rtol=1e-8):
    """Orthonormal basis of the orthogonal complement of span(vectors) in C^dim."""
    if len(vectors) == 0:
        return np.eye(dim, dtype=complex)
    V = np.column_stack(vectors)
    u, s, _ = np.linalg.svd(V, full_matrices=True)
    r = int((s > rtol * s[0]).sum()) if s.size and s[0] > 0 else 0
    return u[:, r:]


def min_eigh(M):
    """Smallest eigenvalue and its eigenvector of a Hermitian matrix (no checks)."""
    w, v = np.linalg.eigh(M)
    return w[0], v[:, 0]


def is_psd(M, tol=1e-9):
    w = np.linalg.eigvalsh(as_hermitian(M))
    return bool(w[0] >= -tol)


def max_generalized_shift(W, D, cutoff_rtol=1e-10):
    """Largest ``lam`` with ``W - lam * D >= 0`` for PSD `W` and PSD `D`.

    Computed as ``1 / lambda_max(W^{-1/2} D W^{-1/2})`` on the range of `W`.
    Returns 0 when `D` reaches outside the range of `W` and ``inf`` when `D`
    vanishes on that range.
    """
    w, v = np.linalg.eigh(W)
    scale = max(np.abs(w).max(), np.abs(D).max(), 1e-300)
    keep = w > cutoff_rtol * scale
    vk = v[:, ~keep]
    if vk.shape[1] and np.abs(vk.conj().T @ D @ vk).max() > 1e-9 * scale:
        return 0.0
    s = v[:, keep] / np.sqrt(w[keep])
    m = np.linalg.eigvalsh(s.conj().T @ D @ s)[-1] if s.shape[1] else 0.0
    if m <= 1e-14:
        return np.inf
    return 1.0 / m


def min_generalized_ratio(W, D, cutoff_rtol=1e-10):
    """Same quantity as :func:`max_generalized_shift`, from the D side.

    Minimum eigenvalue of ``D_r^{-1/2} S D_r^{-1/2}`` where ``D_r`` is `D`
    on its range and ``S`` is the Schur complement of `W` that eliminates the
    kernel of `D`. When the kernel of `D` is not coupled to its range this is
    the plain ``D^{-1/2} W D^{-1/2}`` minimum on the range.
    """
    w, v = np.linalg.eigh(D)
    scale = max(np.abs(w).max(), 1e-300)
    keep = w > cutoff_rtol * scale
    if not keep.any():
        return np.inf
    vr, vk = v[:, keep], v[:, ~keep]
    Wrr = vr.conj().T @ W @ vr
    if vk.shape[1]:
        Wkk = vk.conj().T @ W @ vk
        Wrk = vr.conj().T @ W @ vk
        Wkk_w, Wkk_v = np.linalg.eigh(Wkk)
        wscale = max(np.abs(W).max(), 1e-300)
        pos = Wkk_w > cutoff_rtol * wscale
        # coupling into the null part of Wkk makes any shift infeasible
        null = Wkk_v[:, ~pos]
        if null.shape[1] and np.abs(Wrk @ null).max() > 1e-7 * wscale:
            return 0.0
        inv = (Wkk_v[:, pos] / Wkk_w[pos]) @ Wkk_v[:, pos].conj().T
        Wrr = Wrr - Wrk @ inv @ Wrk.conj().T
    s = 1.0 / np.sqrt(w[keep])
    M = (s[:, None] * Wrr) * s[None, :]
    return max(float(np.linalg.eigvalsh((M + M.conj().T) / 2)[0]), 0.0)
