"""A 2x4 family of PPT entangled states, range tests and separable-part extraction.

The key observation used throughout: a product vector |e,f> lies in R(rho)
with |e,f*> in R(rho^{T_B}) exactly when it is a zero of

    G = P_K(rho) + P_K(rho^{T_B})^{T_B},

since <e,f*|Q|e,f*> = <e,f|Q^{T_B}|e,f>. ``G`` is positive on product
vectors, so a state is an edge state iff ``G`` has no product zeros, i.e. iff
its minimum over product vectors is strictly positive.
"""

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import minimize_scalar

from .bipartite import (
    BipartiteOperator,
    ProductVector,
    contract_a,
    contract_a_batch,
    expectation,
    partial_conjugate,
    partial_transpose,
    product,
)
from .errors import DimensionError, NotPPTError, NotPSDError, WforgeError
from .linalg import as_hermitian, kernel_projector, pinv_hermitian
from .product_search import (
    DEFAULT_CONFIG,
    _chart,
    _grid_local_minima,
    _nelder_mead,
    bloch_grid,
    haar_vector,
    seesaw,
    swap_subsystems,
)

MEMBERSHIP_TOL = 1e-7
PSD_TOL = 1e-9
# relative eigenvalue cutoff separating range from kernel; the greedy
# decomposition uses the coarser BSA value because every subtraction leaves
# round-off eigenvalues of order 1e-10..1e-9 behind
RANK_RTOL = 1e-10
BSA_RANK_RTOL = 1e-8


def _abs_cutoff(M, rank_rtol):
    return rank_rtol * max(np.abs(np.linalg.eigvalsh(M)).max(), 1e-300)

# --------------------------------------------------------------------------
# the rho_b family and its symmetries


def rho_b(b):
    """The 2x4 state with parameter b in [0, 1], normalized by 1/(7b+1).

    PPT for every b; entangled (and an edge state) for 0 < b < 1.
    """
    b = float(b)
    if not 0.0 <= b <= 1.0:
        raise WforgeError(f"b must lie in [0, 1], got {b}")
    M = np.zeros((8, 8))
    for i in range(3):
        M[i, i] = M[i, i + 5] = M[i + 5, i] = M[i + 5, i + 5] = b
    M[3, 3] = b
    M[4, 4] = M[7, 7] = (1 + b) / 2
    M[4, 7] = M[7, 4] = np.sqrt(1 - b * b) / 2
    return BipartiteOperator(M / (7 * b + 1), 2, 4)


def _pair_block(u2):
    """4x4 operator acting as the 2x2 block `u2` on span{|0>,|3>} and span{|1>,|2>}."""
    U = np.zeros((4, 4), dtype=complex)
    for i, j in ((0, 3), (1, 2)):
        U[np.ix_([i, j], [i, j])] = u2
    return U


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)


def u_b():
    """Real unitary on B with rho_b^{T_B} = (1 x U_B) rho_b (1 x U_B)^dag."""
    return _pair_block(SIGMA_X)


def v_b():
    """Unitary on B that maps rho_b to a partial-transpose invariant state."""
    return _pair_block((np.eye(2) + 1j * SIGMA_X) / np.sqrt(2))


def local_b(X, U):
    """(1 x U) X (1 x U)^dag."""
    L = np.kron(np.eye(X.dim_a), U)
    return X.like(L @ X.matrix @ L.conj().T)


def tilde_transform(rho):
    if rho.dim_b != 4:
        raise DimensionError(f"transform needs d_B = 4, got {rho.dim_b}")
    return local_b(rho, v_b())


def tilde_rho_b(b):
    return tilde_transform(rho_b(b))


def symmetry_generator():
    """T_A x T_B: a phase on A and a real 2pi/3 rotation of span{|1>,|2>} on B."""
    w = 2 * np.pi / 3
    TA = np.diag([1, np.exp(1j * w)])
    TB = np.eye(4, dtype=complex)
    TB[1:3, 1:3] = [[np.cos(w), -np.sin(w)], [np.sin(w), np.cos(w)]]
    return BipartiteOperator(np.kron(TA, TB), 2, 4)


# --------------------------------------------------------------------------
# checks


def check_psd(rho, tol=PSD_TOL, name="operator"):
    w = np.linalg.eigvalsh(as_hermitian(rho.matrix))
    if w[0] < -tol:
        raise NotPSDError(f"{name} has eigenvalue {w[0]:.3e} < 0")


def check_ppt(rho, tol=PSD_TOL):
    check_psd(rho, tol, "state")
    w = np.linalg.eigvalsh(as_hermitian(partial_transpose(rho).matrix))
    if w[0] < -tol:
        raise NotPPTError(f"partial transpose has eigenvalue {w[0]:.3e} < 0")


def range_residual(rho, v, rank_rtol=RANK_RTOL):
    """Relative norm of the component of `v` outside R(rho)."""
    if isinstance(v, ProductVector):
        v = v.joint
    P = kernel_projector(rho.matrix, _abs_cutoff(rho.matrix, rank_rtol))
    return float(np.linalg.norm(P @ v) / np.linalg.norm(v))


def gamma_operator(rho, rank_rtol=RANK_RTOL):
    """P_K(rho) + P_K(rho^{T_B})^{T_B}; its product zeros are the range pairs."""
    P = kernel_projector(rho.matrix, _abs_cutoff(rho.matrix, rank_rtol))
    rt = partial_transpose(rho).matrix
    Q = kernel_projector(rt, _abs_cutoff(rt, rank_rtol))
    return rho.like(P) + partial_transpose(rho.like(Q))


# --------------------------------------------------------------------------
# product vectors in a range


@dataclass(frozen=True)
class RangeProducts:
    """Product vectors found in R(rho).

    ``finite`` is False when the constraint minors vanish identically; then
    ``vectors`` is a sample of the continuous family.
    """

    vectors: list
    finite: bool
    method: str
    inconclusive: bool = False

    def __iter__(self):
        return iter(self.vectors)

    def __len__(self):
        return len(self.vectors)

    def __getitem__(self, k):
        return self.vectors[k]


def fibonacci_sphere(n):
    """Roughly uniform points on the Bloch sphere as qubit state vectors."""
    k = np.arange(n) + 0.5
    theta = np.arccos(1 - 2 * k / n)
    phi = np.pi * (1 + 5**0.5) * k
    return np.stack([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)], axis=1)


def _constraint_pencil(K, db):
    """Rows of M(alpha) = C0 + alpha C1 acting on f for e = |0> + alpha|1>."""
    ks = K.T.conj().reshape(-1, 2, db)
    return ks[:, 0, :], ks[:, 1, :]


def _null_vectors(M, rtol=1e-7):
    _, s, vh = np.linalg.svd(M)
    scale = max(np.abs(M).max(), 1.0)
    ranks = int((s > rtol * scale).sum())
    return vh[ranks:].conj()


def _dedup(vectors, fidelity=1 - 1e-6):
    out = []
    for v in vectors:
        if all(abs(np.vdot(u.joint, v.joint)) ** 2 < fidelity for u in out):
            out.append(v)
    return out


CONTINUUM = "continuum"


def _polynomial_range_products(K, db, max_minors=200, seed=0):
    """Common roots of the maximal minors of M(alpha).

    Returns None if the interpolation is ill-conditioned and CONTINUUM if
    every minor vanishes identically (some f exists for every e).
    """
    C0, C1 = _constraint_pencil(K, db)
    k = C0.shape[0]
    subsets = list(combinations(range(k), db))
    if len(subsets) > max_minors:
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(subsets), max_minors, replace=False)
        subsets = [subsets[i] for i in pick]
    xs = np.cos(np.pi * (np.arange(2 * db + 1) + 0.5) / (2 * db + 1))
    V = np.vander(xs, db + 1)
    polys = []
    for S in subsets:
        rows = list(S)
        vals = np.array([np.linalg.det(C0[rows] + x * C1[rows]) for x in xs])
        coef, *_ = np.linalg.lstsq(V, vals, rcond=None)
        if np.abs(V @ coef - vals).max() > 1e-8 * max(np.abs(vals).max(), 1e-300):
            return None
        polys.append(coef)
    polys = np.array(polys)
    scale = np.abs(polys).max()
    if scale < 1e-12:
        return CONTINUUM
    polys = polys / scale

    cands = []
    p = polys[np.argmax(np.linalg.norm(polys, axis=1))]
    nz = np.nonzero(np.abs(p) > 1e-10)[0]
    p = p[nz[0]:]
    if len(p) > 1:
        cands = list(np.roots(p))
    # keep a root only if every minor vanishes there (gcd filter), i.e. the
    # pencil drops rank at that alpha
    roots = []
    for a in cands:
        if all(abs(a - r) > 1e-6 for r in roots):
            roots.append(a)
    found = []
    for a in roots:
        M = C0 + a * C1
        for f in _null_vectors(M):
            found.append(product([1, a], f))
    for f in _null_vectors(C1):
        found.append(product([0, 1], f))
    return found


def product_vectors_in_range(rho, samples=64, cfg=DEFAULT_CONFIG, rank_rtol=RANK_RTOL):
    """Product vectors |e,f> in the range of a PSD operator.

    For d_A = 2 and at least d_B kernel constraints the answer is a finite set
    obtained from the common roots of the constraint minors. With fewer
    constraints every e admits some f and the family is continuous; it is then
    sampled at `samples` points of the A sphere.
    """
    rho = rho.hermitian()
    da, db = rho.dims
    K = _kernel(rho, rank_rtol)
    if da == 2 and K.shape[1] >= db:
        found = _polynomial_range_products(K, db)
        if found is CONTINUUM:
            inconclusive = False
        elif found is not None:
            found = [v for v in found if range_residual(rho, v, rank_rtol) < MEMBERSHIP_TOL]
            return RangeProducts(_dedup(found), True, "polynomial-d2")
        else:
            inconclusive = True
    else:
        inconclusive = False
    if da == 2:
        C0, C1 = _constraint_pencil(K, db) if K.shape[1] else (np.zeros((0, db)),) * 2
        found = []
        for e in fibonacci_sphere(samples):
            M = e[0] * C0 + e[1] * C1 if K.shape[1] else np.zeros((0, db))
            nv = _null_vectors(M) if M.shape[0] else np.eye(db)
            if len(nv):
                found.append(product(e, nv[0]))
        return RangeProducts(found, False, "heuristic", inconclusive)
    P = rho.like(kernel_projector(rho.matrix, _abs_cutoff(rho.matrix, rank_rtol)))
    rng = cfg.rng(7)
    found = []
    for _ in range(samples):
        val, e, f, _, _ = seesaw(P, haar_vector(rng, da), cfg.max_sweeps, cfg.value_tol)
        v = product(e, f)
        if range_residual(rho, v, rank_rtol) < MEMBERSHIP_TOL:
            found.append(v)
    return RangeProducts(_dedup(found), False, "heuristic", inconclusive)


def _kernel(rho, rank_rtol=RANK_RTOL):
    w, v = np.linalg.eigh(rho.matrix)
    scale = max(np.abs(w).max(), 1e-300)
    return v[:, np.abs(w) <= rank_rtol * scale]


# --------------------------------------------------------------------------
# edge certification


@dataclass(frozen=True)
class EdgeCertificate:
    verdict: str  # "edge" | "not-edge" | "inconclusive"
    witnesses_of_failure: ProductVector | None
    method: str  # "polynomial-d2" | "heuristic"
    floor: float = np.nan
    residuals: tuple = ()

    @property
    def is_edge(self):
        return self.verdict == "edge"


def _partner_residuals(rho, v, rank_rtol=RANK_RTOL):
    return (range_residual(rho, v, rank_rtol),
            range_residual(partial_transpose(rho), partial_conjugate(v), rank_rtol))


def _minimize_over_products(X, cfg, n=None):
    """Global minimum of <e,f|X|e,f> for an operator positive on products.

    Returns (value, e, f). Qubit factor: grid + Nelder-Mead + see-saw polish;
    otherwise see-saw multistart.
    """
    if X.dim_a != 2 and X.dim_b == 2:
        val, e, f = _minimize_over_products(swap_subsystems(X), cfg, n)
        return val, f, e
    best = (np.inf, None, None)
    if X.dim_a == 2:
        n = n or cfg.grid_resolution
        E = bloch_grid(n)
        G = np.linalg.eigvalsh(contract_a_batch(X, E.reshape(-1, 2)))[:, 0].reshape(n, n)
        minima = sorted(_grid_local_minima(G), key=lambda ij: G[ij])[:6]
        for ij in minima:
            val, e, f = _refine(X, E[ij])
            if val < best[0]:
                best = (val, e, f)
    else:
        rng = cfg.rng(5)
        for _ in range(cfg.restarts):
            val, e, f, _, _ = seesaw(X, haar_vector(rng, X.dim_a), cfg.max_sweeps, 0.0)
            if val < best[0]:
                best = (val, e, f)
    return best


def _refine(X, e0):
    e_of, npar = _chart(e0)

    def g(x):
        return np.linalg.eigvalsh(contract_a(X, e_of(x)))[0]

    res = _nelder_mead(g, np.zeros(npar))
    val, e, f, _, _ = seesaw(X, e_of(res.x), 200, 0.0)
    return val, e, f


def certify_edge(delta, cfg=DEFAULT_CONFIG, rank_rtol=RANK_RTOL):
    """Decide whether no |e,f> in R(delta) has its partner |e,f*> in R(delta^{T_B}).

    With a finite set of range products (polynomial path) each partner is
    tested directly. Otherwise the minimum of the range-pair operator over
    product vectors is located numerically: a zero (residuals below 1e-7) is
    a counterexample; a floor clearly above the membership scale certifies
    the edge property; anything in between is reported inconclusive.
    """
    delta = delta.hermitian()
    check_ppt(delta)
    rp = product_vectors_in_range(delta, cfg=cfg, rank_rtol=rank_rtol)
    if rp.finite:
        best = None
        for v in rp.vectors:
            r = _partner_residuals(delta, v, rank_rtol)
            if best is None or max(r) < max(best[1]):
                best = (v, r)
        if best is not None and max(best[1]) < MEMBERSHIP_TOL:
            return EdgeCertificate("not-edge", best[0], rp.method, 0.0, best[1])
        if best is not None and best[1][1] < 1e-5:
            return EdgeCertificate("inconclusive", best[0], rp.method, np.nan, best[1])
        return EdgeCertificate("edge", None, rp.method, np.nan, best[1] if best else ())

    G = gamma_operator(delta, rank_rtol)
    val, e, f = _minimize_over_products(G, cfg)
    v = product(e, f)
    r = _partner_residuals(delta, v, rank_rtol)
    if max(r) < MEMBERSHIP_TOL:
        return EdgeCertificate("not-edge", v, "heuristic", float(val), r)
    if val > 1e-10:
        return EdgeCertificate("edge", None, "heuristic", float(val), r)
    return EdgeCertificate("inconclusive", v, "heuristic", float(val), r)


# --------------------------------------------------------------------------
# subtraction of product vectors and the separable/edge decomposition


def _min_eig(M):
    return float(np.linalg.eigvalsh((M + M.conj().T) / 2)[0])


def max_subtraction(rho, v, rank_rtol=RANK_RTOL):
    """Largest lam with rho - lam|v><v| and its partial transpose both PSD.

    Zero unless |v> is in R(rho) and |v*> (B-conjugated) is in R(rho^{T_B}).
    The closed form 1/<v|rho^+|v> is checked against the actual spectra and
    reduced by bisection if round-off pushes an eigenvalue below -PSD_TOL.
    """
    if not isinstance(v, ProductVector):
        raise TypeError("expected a ProductVector")
    rho = rho.hermitian()
    rt = partial_transpose(rho)
    vc = partial_conjugate(v)
    if (range_residual(rho, v, rank_rtol) > MEMBERSHIP_TOL
            or range_residual(rt, vc, rank_rtol) > MEMBERSHIP_TOL):
        return 0.0
    a = expectation(rho.like(pinv_hermitian(rho.matrix, _abs_cutoff(rho.matrix, rank_rtol))), v).real
    b = expectation(rt.like(pinv_hermitian(rt.matrix, _abs_cutoff(rt.matrix, rank_rtol))), vc).real
    if a <= 0 or b <= 0:
        return 0.0
    lam = float(min(1.0 / a, 1.0 / b))
    P = np.outer(v.joint, v.joint.conj())
    Pt = np.outer(vc.joint, vc.joint.conj())

    def ok(x):
        return _min_eig(rho.matrix - x * P) >= -PSD_TOL and _min_eig(rt.matrix - x * Pt) >= -PSD_TOL

    if ok(lam):
        return lam
    lo, hi = 0.0, lam
    for _ in range(60):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if ok(mid) else (lo, mid)
    return lo


@dataclass(frozen=True)
class BsaResult:
    p: float
    separable_terms: list  # [(weight, ProductVector)]
    rho_sep: BipartiteOperator | None
    delta: BipartiteOperator | None
    reconstruction_error: float
    certificate: EdgeCertificate | None
    status: str  # "edge-remainder" | "local decomposition" | "separable"
    steps: list = field(default_factory=list)


def _minimax_pair(A, B):
    """min over unit f of max(f^dag A f, f^dag B f) = max_t lam_min(tA + (1-t)B)."""
    def neg(t):
        return -np.linalg.eigvalsh(t * A + (1 - t) * B)[0]

    r = minimize_scalar(neg, bounds=(0.0, 1.0), method="bounded", options=dict(xatol=1e-10))
    t = r.x
    for tt in (0.0, 1.0):
        if neg(tt) < neg(t):
            t = tt
    w, vecs = np.linalg.eigh(t * A + (1 - t) * B)
    return -neg(t), vecs[:, 0]


def _best_candidate_continuum(rho, cfg, n=25, rank_rtol=RANK_RTOL):
    """Product vector in Gamma maximizing lam*, for a continuous Gamma (qubit A)."""
    Rp = rho.like(pinv_hermitian(rho.matrix, _abs_cutoff(rho.matrix, rank_rtol)))
    rt = partial_transpose(rho)
    Rtp = partial_transpose(rt.like(pinv_hermitian(rt.matrix, _abs_cutoff(rt.matrix, rank_rtol))))
    G = gamma_operator(rho, rank_rtol)
    gscale = 1.0

    def h(e):
        w, v = np.linalg.eigh(contract_a(G, e))
        S = v[:, w < 1e-9 * gscale]
        if S.shape[1] == 0:
            return np.inf, None
        A = S.conj().T @ contract_a(Rp, e) @ S
        B = S.conj().T @ contract_a(Rtp, e) @ S
        val, c = _minimax_pair(A, B)
        return val, S @ c

    E = bloch_grid(n)
    vals = np.full((n, n), np.inf)
    for i in range(n):
        for j in range(n if 0 < i < n - 1 else 1):
            vals[i, j] = h(E[i, j])[0]
        if not 0 < i < n - 1:
            vals[i, :] = vals[i, 0]
    order = np.argsort(vals.ravel())[:4]
    best = (np.inf, None)
    for k in order:
        i, j = divmod(int(k), n)
        if not np.isfinite(vals[i, j]):
            continue
        e_of, npar = _chart(E[i, j])
        res = _nelder_mead(lambda x: min(h(e_of(x))[0], 1e300), np.zeros(npar),
                           xatol=1e-8, fatol=1e-12, maxiter=800)
        e = e_of(res.x)
        val, f = h(e)
        if val < best[0] and f is not None:
            best = (val, product(e, f))
    return best[1]


def _gamma_candidates(rho, cfg, rank_rtol=RANK_RTOL):
    """Candidate product vectors with |v> in R(rho) and |v*> in R(rho^{T_B})."""
    G = gamma_operator(rho, rank_rtol)
    da, db = rho.dims
    if da != 2:
        if db == 2:
            sw = _gamma_candidates(swap_subsystems(rho), cfg, rank_rtol)
            return [product(v.f, v.e) for v in sw]
        rng = cfg.rng(11)
        out = []
        for _ in range(cfg.restarts):
            val, e, f, _, _ = seesaw(G, haar_vector(rng, da), cfg.max_sweeps, 0.0)
            if val < 1e-12:
                out.append(product(e, f))
        return _dedup(out)
    n = 41
    E = bloch_grid(n).reshape(-1, 2)
    w = np.linalg.eigvalsh(contract_a_batch(G, E))[:, 0]
    if np.all(w < 1e-9):
        v = _best_candidate_continuum(rho, cfg, rank_rtol=rank_rtol)
        return [] if v is None else [v]
    from .product_search import zero_set

    try:
        return zero_set(G, cfg.with_(grid_resolution=cfg.grid_resolution, zero_tol=1e-12))
    except WforgeError:
        return []


def bsa_decompose(rho, cfg=DEFAULT_CONFIG, max_steps=None, lambda_tol=1e-9,
                  rank_rtol=BSA_RANK_RTOL):
    """Greedy split rho = (1 - p) rho_sep + p delta of a PPT state.

    Each round subtracts the product projector with the largest admissible
    weight (see :func:`max_subtraction`) among the current candidates. Every
    round lowers rank(rho) + rank(rho^{T_B}), so the loop is finite. The
    remainder is checked with :func:`certify_edge`; if it is not certified
    the status is "local decomposition" (greedy is not trace-maximal).
    """
    rho = rho.hermitian()
    check_ppt(rho)
    tr = rho.trace().real
    rem = rho
    terms = []
    steps = []
    max_steps = max_steps or 4 * rho.dim
    for it in range(max_steps):
        cands = _gamma_candidates(rem, cfg, rank_rtol)
        scored = [(max_subtraction(rem, v, rank_rtol), v) for v in cands]
        scored = [s for s in scored if s[0] > lambda_tol]
        if not scored:
            break
        lam, v = max(scored, key=lambda s: s[0])
        P = np.outer(v.joint, v.joint.conj())
        rem = rem.like(rem.matrix - lam * P).hermitian()
        terms.append((lam, v))
        steps.append(dict(step=it, weight=lam, remaining_trace=rem.trace().real))
    sep_weight = sum(w for w, _ in terms)
    p = float(rem.trace().real / tr)
    rho_sep = None
    if terms:
        M = sum(w * np.outer(v.joint, v.joint.conj()) for w, v in terms)
        rho_sep = rho.like(M / sep_weight)
    recon = rem.matrix + sum(w * np.outer(v.joint, v.joint.conj()) for w, v in terms)
    err = float(np.abs(recon - rho.matrix).max())
    if p < 1e-9:
        return BsaResult(0.0, terms, rho_sep, None, err, None, "separable", steps)
    delta = rem / rem.trace().real
    try:
        cert = certify_edge(delta, cfg, rank_rtol)
    except WforgeError:
        cert = None
    status = "edge-remainder" if cert is not None and cert.is_edge else "local decomposition"
    return BsaResult(p, terms, rho_sep, delta, err, cert, status, steps)


def random_separable(rng, n_terms, dim_a, dim_b):
    """Random convex combination of `n_terms` Haar-random product projectors."""
    w = rng.dirichlet(np.ones(n_terms))
    terms = [(wk, product(haar_vector(rng, dim_a), haar_vector(rng, dim_b))) for wk in w]
    M = sum(wk * np.outer(v.joint, v.joint.conj()) for wk, v in terms)
    return BipartiteOperator(M, dim_a, dim_b), terms
