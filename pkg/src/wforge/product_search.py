"""Optimization over product vectors.

The central objects are the infimum of <e,f|W|e,f> over product vectors, the
set of product vectors on which a witness vanishes, and the largest multiple
of an operator D that can be subtracted from W while keeping it positive on
product vectors.

For d_A = 2 (or d_B = 2, by swapping the factors) the A factor lives on the
Bloch sphere and the minimization over the B factor is an exact eigenvalue
problem, so a dense grid over two real angles followed by a local polish is
effectively exhaustive. For larger dimensions the see-saw multistart is used,
and "no zero found" only means none was found.
"""

from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .bipartite import (
    BipartiteOperator,
    ProductVector,
    contract_a,
    contract_a_batch,
    contract_b,
    expectation,
    product,
)
from .errors import NotWitnessError, WforgeError
from .linalg import as_hermitian, max_generalized_shift, min_generalized_ratio, numerical_rank


@dataclass(frozen=True)
class SearchConfig:
    restarts: int = 64
    max_sweeps: int = 500
    value_tol: float = 1e-12
    zero_tol: float = 1e-8
    dedup_fidelity: float = 1 - 1e-6
    grid_resolution: int = 101
    seed: int = 0
    max_iterations: int = 50
    lambda_min_step: float = 1e-9
    mix_weight: float = 0.5
    max_backoff: int = 20

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        for name in ("value_tol", "zero_tol", "dedup_fidelity"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def rng(self, salt=0):
        return np.random.default_rng([self.seed, salt])

    def with_(self, **kw):
        return replace(self, **kw)


DEFAULT_CONFIG = SearchConfig()


@dataclass(frozen=True)
class MinimizationResult:
    value: float
    argmin: ProductVector
    converged: bool
    sweeps_used: int


@dataclass(frozen=True)
class RatioResult:
    """Outcome of :func:`min_contraction_ratio`.

    ``value`` is the subtractable amount; ``source`` says whether it was
    attained at a sampled A factor ("global") or as a limit at a zero of W
    ("zero").
    """

    value: float
    argmin_e: np.ndarray | None = None
    primal: float | None = None
    dual: float | None = None
    source: str = "global"
    local_limits: tuple = field(default=(), repr=False)

    def __float__(self):
        return float(self.value)


def _check_hermitian(W):
    if not isinstance(W, BipartiteOperator):
        raise TypeError("expected a BipartiteOperator")
    return W.like(as_hermitian(W.matrix))


def swap_subsystems(W):
    da, db = W.dims
    m = W.tensor4().transpose(1, 0, 3, 2).reshape(da * db, da * db)
    return BipartiteOperator(m, db, da)


def haar_vector(rng, d):
    z = rng.normal(size=d) + 1j * rng.normal(size=d)
    return z / np.linalg.norm(z)


def bloch_vector(theta, phi):
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def bloch_grid(n):
    """Grid of A factors on the Bloch sphere, shape (n, n, 2); rows are theta."""
    ts = np.linspace(0, np.pi, n)
    ps = np.linspace(0, 2 * np.pi, n, endpoint=False)
    T, P = np.meshgrid(ts, ps, indexing="ij")
    return np.stack([np.cos(T / 2), np.exp(1j * P) * np.sin(T / 2)], axis=-1)


def _grid_local_minima(G):
    """Indices of local minima of a (theta, phi) grid; poles are single points."""
    n = G.shape[0]
    pad = np.concatenate([G[:, -1:], G, G[:, :1]], axis=1)
    inner = G[1:-1]
    ok = np.ones_like(inner, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == dj == 0:
                continue
            nb = pad[1 + di : n - 1 + di, 1 + dj : 1 + dj + G.shape[1]]
            ok &= inner <= nb
    idx = [(i + 1, j) for i, j in zip(*np.nonzero(ok))]
    idx += [(0, 0), (n - 1, 0)]
    return idx


def _chart(center):
    """Local chart e(x) = normalize(center + B x) around a unit vector."""
    d = len(center)
    M = np.eye(d, dtype=complex) - np.outer(center, center.conj())
    u, _, _ = np.linalg.svd(M)
    B = u[:, : d - 1]

    def e_of(x):
        z = x[: d - 1] + 1j * x[d - 1 :]
        v = center + B @ z
        return v / np.linalg.norm(v)

    return e_of, 2 * (d - 1)


def _nelder_mead(fun, x0, xatol=1e-10, fatol=1e-16, maxiter=4000):
    return minimize(
        fun, x0, method="Nelder-Mead",
        options=dict(xatol=xatol, fatol=fatol, maxiter=maxiter, maxfev=2 * maxiter),
    )


def _min_eig_over_b(W, e):
    w, v = np.linalg.eigh(contract_a(W, e))
    return w[0], v[:, 0]


def seesaw(W, e, max_sweeps=500, value_tol=1e-12):
    """Alternating minimization of <e,f|W|e,f> starting from A factor `e`."""
    val, f = _min_eig_over_b(W, e)
    sweeps = 0
    converged = False
    for sweeps in range(1, max_sweeps + 1):
        w, v = np.linalg.eigh(contract_b(W, f))
        e = v[:, 0]
        new, f = _min_eig_over_b(W, e)
        if abs(val - new) < value_tol:
            val = new
            converged = True
            break
        val = new
    return float(val), e, f, converged, sweeps


def _polish(W, e, sweeps=300):
    """See-saw polish that keeps the best point seen."""
    val, e, f, _, _ = seesaw(W, e, max_sweeps=sweeps, value_tol=0.0)
    return val, e, f


def _refine_a(W, e0, polish=True):
    """Nelder-Mead on the A sphere of min_f <e,f|W|e,f>, then see-saw polish."""
    e_of, npar = _chart(e0)
    res = _nelder_mead(lambda x: _min_eig_over_b(W, e_of(x))[0], np.zeros(npar))
    e = e_of(res.x)
    val, f = _min_eig_over_b(W, e)
    if polish:
        pv, pe, pf = _polish(W, e)
        if pv <= val:
            val, e, f = pv, pe, pf
    return float(val), e, f


def _grid_values(W, n):
    E = bloch_grid(n).reshape(-1, 2)
    mats = contract_a_batch(W, E)
    G = np.linalg.eigvalsh(mats)[:, 0].reshape(n, n)
    return G, E.reshape(n, n, 2)


def _result(W, val, e, f, converged, sweeps):
    v = product(e, f)
    exact = expectation(W, v).real
    return MinimizationResult(float(exact), v, converged, sweeps)


def min_product_expectation(W, cfg=DEFAULT_CONFIG):
    """Minimum of <e,f|W|e,f> over normalized product vectors.

    See-saw from ``cfg.restarts`` Haar-random A factors; for a qubit factor a
    Bloch-sphere grid is also scanned and its best cells polished. The value
    is an upper bound on the true infimum.
    """
    W = _check_hermitian(W)
    if W.dim_a != 2 and W.dim_b == 2:
        r = min_product_expectation(swap_subsystems(W), cfg)
        return _result(W, r.value, r.argmin.f, r.argmin.e, r.converged, r.sweeps_used)
    rng = cfg.rng(1)
    best = None
    for _ in range(cfg.restarts):
        val, e, f, conv, sw = seesaw(W, haar_vector(rng, W.dim_a), cfg.max_sweeps, cfg.value_tol)
        if best is None or val < best[0]:
            best = (val, e, f, conv, sw)
    if W.dim_a == 2:
        G, E = _grid_values(W, cfg.grid_resolution)
        order = np.argsort(G.ravel())[:5]
        for k in order:
            i, j = divmod(int(k), G.shape[1])
            val, e, f = _refine_a(W, E[i, j])
            if val < best[0]:
                best = (val, e, f, True, 0)
    return _result(W, *best)


def _dedup(vectors, fidelity):
    out = []
    for v in vectors:
        if all(abs(np.vdot(u.joint, v.joint)) ** 2 < fidelity for u in out):
            out.append(v)
    return out


def zero_set(W, cfg=DEFAULT_CONFIG, method="auto"):
    """Product vectors on which W vanishes (expectation below ``cfg.zero_tol``).

    ``method`` is "grid" (qubit A factor only), "seesaw", or "auto" (grid when
    available). Raises NotWitnessError if a product vector with expectation
    below ``-cfg.zero_tol`` turns up.
    """
    W = _check_hermitian(W)
    if W.dim_a != 2 and W.dim_b == 2 and method in ("auto", "grid"):
        swapped = zero_set(swap_subsystems(W), cfg, method)
        return [product(v.f, v.e) for v in swapped]
    if method == "auto":
        method = "grid" if W.dim_a == 2 else "seesaw"
    if method == "grid" and W.dim_a != 2:
        raise WforgeError("grid zero search needs a qubit factor")

    cands = []
    if method == "grid":
        G, E = _grid_values(W, cfg.grid_resolution)
        if G.min() < -cfg.zero_tol:
            i, j = np.unravel_index(np.argmin(G), G.shape)
            raise NotWitnessError(f"negative product expectation {G.min():.3e} at e={E[i, j]}")
        scale = max(np.abs(W.matrix).max(), 1e-300)
        minima = [ij for ij in _grid_local_minima(G) if G[ij] < 1e-2 * scale]
        minima.sort(key=lambda ij: G[ij])
        for ij in minima[:200]:
            cands.append(_refine_a(W, E[ij]))
    else:
        rng = cfg.rng(2)
        for _ in range(cfg.restarts):
            val, e, f, _, _ = seesaw(W, haar_vector(rng, W.dim_a), cfg.max_sweeps, cfg.value_tol)
            cands.append((val, e, f))

    found = []
    for val, e, f in cands:
        if val < -cfg.zero_tol:
            raise NotWitnessError(f"negative product expectation {val:.3e}")
        if val >= cfg.zero_tol:
            continue
        w, v = np.linalg.eigh(contract_a(W, e))
        ks = np.nonzero(w < cfg.zero_tol)[0]
        for k in ks:
            fk = v[:, k]
            if len(ks) == 1:
                _, e, fk = polish_zero(W, e, fk)
            found.append(product(e, fk))
    return _dedup(found, cfg.dedup_fidelity)


def span_dimension(vectors, rtol=1e-10):
    if len(vectors) == 0:
        return 0
    return numerical_rank(np.column_stack([v.joint for v in vectors]), rtol)


def tangent_form(X, e0, f0):
    """Second-order expansion of <e,f|X|e,f> around the product |e0,f0>.

    Perturb e = e0 + E1 x, f = f0 + F1 y with E1, F1 orthonormal complements
    of e0, f0. When the first-order term vanishes (e.g. |e0,f0> is a zero of a
    product-positive X), the expectation is ``r^T Q r + O(|r|^3)`` with
    ``r = (Re z, Im z)``, ``z = (x, y)``. Returns ``(Q, B, n)`` where the
    columns of ``B`` map the complex coordinates z to first-order vectors in H.
    """
    da, db = X.dims
    E1 = _perp_basis(e0)
    F1 = _perp_basis(f0)
    na, nb = E1.shape[1], F1.shape[1]
    n = na + nb
    B = np.hstack([np.kron(E1, f0[:, None]), np.kron(e0[:, None], F1)])
    M = X.matrix
    H = B.conj().T @ M @ B
    ef = np.kron(e0, f0)
    K = np.zeros((n, n), dtype=complex)
    row = ef.conj() @ M
    # <e0 f0| X |E1_a F1_b>: the second-order cross term x_a y_b
    K[:na, na:] = E1.T @ row.reshape(da, db) @ F1
    S = K + K.T
    Hr = np.block([[H.real, -H.imag], [H.imag, H.real]])
    Sr = np.block([[S.real, -S.imag], [-S.imag, -S.real]])
    Q = Hr + Sr
    return (Q + Q.T) / 2, B, n


def _perp_basis(v):
    d = len(v)
    M = np.eye(d, dtype=complex) - np.outer(v, v.conj())
    u, _, _ = np.linalg.svd(M)
    return u[:, : d - 1]


def polish_zero(W, e, f, iterations=4):
    """Newton refinement of an approximate zero |e,f> of W.

    Uses the second-order expansion of <e,f|W|e,f> around the current point
    (see :func:`tangent_form`) and steps to the minimizer of the quadratic
    model; directions of vanishing curvature are left untouched.
    """
    e = np.asarray(e, dtype=complex)
    f = np.asarray(f, dtype=complex)
    best = (expectation(W, np.kron(e, f)).real, e, f)
    for _ in range(iterations):
        Q, B, n = tangent_form(W, e, f)
        c = B.conj().T @ (W.matrix @ np.kron(e, f))
        g = 2 * np.concatenate([c.real, c.imag])
        w, v = np.linalg.eigh(Q)
        keep = w > 1e-9 * max(np.abs(w).max(), 1e-300)
        r = -(v[:, keep] / w[keep]) @ (v[:, keep].T @ g) / 2
        z = r[:n] + 1j * r[n:]
        na = len(e) - 1
        E1, F1 = _perp_basis(e), _perp_basis(f)
        e = e + E1 @ z[:na]
        f = f + F1 @ z[na:]
        e, f = e / np.linalg.norm(e), f / np.linalg.norm(f)
        val = expectation(W, np.kron(e, f)).real
        if abs(val) <= abs(best[0]) or val < best[0]:
            best = (val, e, f)
    return best


def local_subtraction_limit(W, D, e0, f0):
    """Limit of the subtractable amount of D at the zero |e0,f0> of W."""
    QW, _, _ = tangent_form(W, e0, f0)
    QD, _, _ = tangent_form(D, e0, f0)
    return max_generalized_shift(QW, QD, cutoff_rtol=1e-9)


def _shift_at(W, D, e):
    return max_generalized_shift(contract_a(W, e), contract_a(D, e))


def _grid_shift(W, D, n):
    E = bloch_grid(n).reshape(-1, 2)
    We = contract_a_batch(W, E)
    De = contract_a_batch(D, E)
    w, v = np.linalg.eigh(We)
    scale = max(np.abs(W.matrix).max(), np.abs(D.matrix).max(), 1e-300)
    out = np.empty(len(E))
    regular = w[:, 0] > 1e-8 * scale
    s = v[regular] / np.sqrt(w[regular])[:, None, :]
    M = np.einsum("kam,kab,kbn->kmn", s.conj(), De[regular], s, optimize=True)
    top = np.linalg.eigvalsh(M)[:, -1]
    with np.errstate(divide="ignore"):
        out[regular] = np.where(top > 1e-14, 1.0 / np.maximum(top, 1e-300), np.inf)
    for k in np.nonzero(~regular)[0]:
        out[k] = max_generalized_shift(We[k], De[k])
    return out.reshape(n, n), E.reshape(n, n, 2), De


def min_contraction_ratio(W, D, cfg=DEFAULT_CONFIG, zeros=None):
    """Largest lam such that W - lam * D stays positive on product vectors.

    Equivalently the infimum over A factors e of the minimum eigenvalue of
    D_e^{-1/2} W_e D_e^{-1/2}. The infimum is taken over sampled A factors
    (grid for a qubit factor, random multistart otherwise) and over the
    second-order limits at each zero of W, where the ratio is 0/0.

    Raises if D does not vanish on the zeros of W (nothing can be subtracted
    then) or if W takes negative values on product vectors.
    """
    W = _check_hermitian(W)
    D = _check_hermitian(D)
    if W.dims != D.dims:
        raise WforgeError("dimension mismatch")
    if W.dim_a != 2 and W.dim_b == 2:
        Ws, Ds = swap_subsystems(W), swap_subsystems(D)
        zs = None if zeros is None else [product(v.f, v.e) for v in zeros]
        return min_contraction_ratio(Ws, Ds, cfg, zs)
    if zeros is None:
        zeros = zero_set(W, cfg)
    dscale = max(np.abs(D.matrix).max(), 1e-300)
    for z in zeros:
        if abs(expectation(D, z)) > 1e-7 * dscale:
            raise WforgeError("D does not vanish on a zero of W; it cannot be subtracted")

    locals_ = []
    for z in zeros:
        locals_.append(local_subtraction_limit(W, D, z.e, z.f))

    best_val, best_e = np.inf, None
    d_nonzero = False
    if W.dim_a == 2:
        G, E, De = _grid_shift(W, D, cfg.grid_resolution)
        d_nonzero = np.abs(De).max() > 1e-12 * dscale
        flat = G.ravel()
        finite = np.isfinite(flat)
        if finite.any():
            order = np.argsort(flat)[:8]
            starts = [E.reshape(-1, 2)[k] for k in order if np.isfinite(flat[k])]
        else:
            starts = []
    else:
        rng = cfg.rng(3)
        starts = [haar_vector(rng, W.dim_a) for _ in range(cfg.restarts)]
        d_nonzero = any(np.abs(contract_a(D, e)).max() > 1e-12 * dscale for e in starts)

    near = [z.e for z in zeros]

    def objective(e):
        for e0 in near:
            if 1 - abs(np.vdot(e0, e)) ** 2 < 1e-10:
                return np.inf
        return _shift_at(W, D, e)

    for e_start in starts:
        v0 = objective(e_start)
        if not np.isfinite(v0):
            continue
        e_of, npar = _chart(e_start)
        res = _nelder_mead(lambda x: min(objective(e_of(x)), 1e300), np.zeros(npar),
                           xatol=1e-9, fatol=1e-14, maxiter=2000)
        e = e_of(res.x)
        val = objective(e)
        if v0 < val:
            val, e = v0, e_start
        if val < best_val:
            best_val, best_e = val, e

    if not d_nonzero and not any(np.isfinite(x) for x in locals_):
        return RatioResult(np.inf, None, np.inf, np.inf, "global", tuple(locals_))

    primal = dual = best_val
    if best_e is not None:
        We, Dm = contract_a(W, best_e), contract_a(D, best_e)
        if np.linalg.eigvalsh(We)[0] < -cfg.zero_tol:
            raise NotWitnessError("W is negative on a product vector")
        dual = max_generalized_shift(We, Dm)
        primal = min_generalized_ratio(We, Dm)

    value, source = best_val, "global"
    if locals_ and min(locals_) < value:
        value, source = float(min(locals_)), "zero"
    return RatioResult(float(value), best_e, primal, dual, source, tuple(locals_))
