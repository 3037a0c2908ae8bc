"""Entanglement witnesses: validation, detection, subtraction and optimization.

A witness W is Hermitian, non-negative on product vectors, has a negative
eigenvalue, and is trace-normalized. Optimization repeatedly subtracts an
operator D that vanishes on the zero set P_W, by the largest amount that
keeps W non-negative on product vectors (see
:func:`wforge.product_search.min_contraction_ratio`). In "general" mode D is
a projector; in "nd" mode D = a P + (1 - a) Q^{T_B} is decomposable, which
preserves the ability of the witness to detect PPT entangled states.
"""

from dataclasses import dataclass, field

import numpy as np

from .bipartite import (
    BipartiteOperator,
    expectation,
    identity,
    partial_conjugate,
    partial_transpose,
    product,
)
from .errors import NotEdgeError, NotPPTError, NotWitnessError, WforgeError
from .linalg import as_hermitian, complement_basis, kernel_projector
from .product_search import (
    DEFAULT_CONFIG,
    min_contraction_ratio,
    min_product_expectation,
    span_dimension,
    tangent_form,
    zero_set,
)

NEG_EIG_TOL = 1e-10
DETECTION_TOL = 1e-10


@dataclass(frozen=True)
class Witness:
    op: BipartiteOperator
    zero_set: list = field(repr=False)
    floor: float = 0.0
    kind_evidence: object = None
    meta: dict = field(default_factory=dict, repr=False)

    @property
    def dims(self):
        return self.op.dims

    @property
    def matrix(self):
        return self.op.matrix


@dataclass(frozen=True)
class TraceStep:
    iteration: int
    lam: float
    rank: int
    floor: float
    zero_count: int


@dataclass
class OptimizationTrace:
    steps: list = field(default_factory=list)
    terminal_status: str = "iteration-cap"
    warnings: list = field(default_factory=list)

    def rows(self):
        return [(s.iteration, s.lam, s.floor, s.zero_count) for s in self.steps]


def validate(op, cfg=DEFAULT_CONFIG, evidence=None, meta=None):
    """Check the witness conditions and return a trace-normalized Witness."""
    if not isinstance(op, BipartiteOperator):
        raise TypeError("expected a BipartiteOperator")
    H = as_hermitian(op.matrix)
    tr = np.trace(H).real
    if tr <= 0:
        raise NotWitnessError(f"trace {tr:.3e} is not positive; cannot normalize")
    H = H / tr
    W = op.like(H)
    wmin = np.linalg.eigvalsh(H)[0]
    if wmin >= -NEG_EIG_TOL:
        raise NotWitnessError("operator is positive semidefinite (no negative eigenvalue)")
    res = min_product_expectation(W, cfg)
    if res.value < -cfg.zero_tol:
        raise NotWitnessError(
            f"negative on the product vector e={res.argmin.e}, f={res.argmin.f} (value {res.value:.3e})"
        )
    zs = zero_set(W, cfg) if res.value <= cfg.zero_tol else []
    floor = res.value
    return Witness(W, zs, float(floor), evidence, dict(meta or {}))


def detects(W, rho, tol=DETECTION_TOL):
    """tr(W rho) and whether it is below -tol."""
    w = np.linalg.eigvalsh(as_hermitian(rho.matrix))
    if w[0] < -1e-9:
        raise WforgeError(f"state is not PSD (eigenvalue {w[0]:.3e})")
    op = W.op if isinstance(W, Witness) else W
    val = float(np.trace(op.matrix @ rho.matrix).real)
    return val, val < -tol


def _check_annihilates(W, D, tol=1e-7):
    scale = max(np.abs(D.matrix).max(), 1e-300)
    for z in W.zero_set:
        if abs(expectation(D, z)) > tol * scale:
            raise WforgeError("D does not vanish on the zero set; it cannot be subtracted")


def subtract(W, D, lam, cfg=DEFAULT_CONFIG):
    """(W - lam D), renormalized to unit trace and revalidated."""
    if lam == 0:
        return W
    if lam < 0:
        raise WforgeError("lam must be non-negative")
    _check_annihilates(W, D)
    new = W.op.like(W.op.matrix - lam * D.matrix)
    return validate(new, cfg, W.kind_evidence, W.meta)


def _soft_vectors(W, zeros, rtol=1e-7):
    """First-order directions at each zero along which W grows only at higher order."""
    out = []
    for z in zeros:
        Q, B, n = tangent_form(W.op if isinstance(W, Witness) else W, z.e, z.f)
        w, v = np.linalg.eigh(Q)
        scale = max(np.abs(w).max(), 1e-300)
        for k in np.nonzero(w < rtol * scale)[0]:
            out.append(B @ (v[:n, k] + 1j * v[n:, k]))
    return out


def _complement_projector(vectors, dim, rtol=1e-7):
    C = complement_basis(vectors, dim, rtol)
    return C @ C.conj().T, C.shape[1]


def subtraction_direction(W, mode="general", mix=0.5):
    """The operator D to subtract next and its rank; None when nothing is left.

    P projects onto the complement of the zero set and of the soft directions
    at each zero (subtracting anything with weight there would immediately
    violate positivity at second order). In nd mode Q is built the same way
    from W^{T_B}, whose zeros are the B-conjugated zeros of W.
    """
    d = W.op.dim
    zeros = W.zero_set
    vecs = [z.joint for z in zeros] + _soft_vectors(W, zeros)
    P, rp = _complement_projector(vecs, d)
    if mode == "general":
        if rp == 0:
            return None, 0
        return W.op.like(P / np.trace(P).real), rp
    if mode != "nd":
        raise ValueError(f"unknown mode {mode!r}")
    Wt = partial_transpose(W.op)
    czeros = [partial_conjugate(z) for z in zeros]
    cvecs = [z.joint for z in czeros] + _soft_vectors(Wt, czeros)
    Q, rq = _complement_projector(cvecs, d)
    if rp + rq == 0:
        return None, 0
    D = mix * P + (1 - mix) * partial_transpose(W.op.like(Q)).matrix
    return W.op.like(D / np.trace(D).real), rp + rq


def _step(W, D, rank, it, cfg, trace):
    ratio = min_contraction_ratio(W.op, D, cfg, zeros=W.zero_set)
    lam = ratio.value
    if not np.isfinite(lam):
        trace.warnings.append(f"iteration {it}: subtraction unconstrained")
        return None
    if lam <= cfg.lambda_min_step:
        return None
    for _ in range(cfg.max_backoff + 1):
        try:
            new = subtract(W, D, lam, cfg)
        except NotWitnessError:
            lam /= 2
            continue
        trace.steps.append(TraceStep(it, float(lam), int(rank), new.floor, len(new.zero_set)))
        return new
    trace.warnings.append(f"iteration {it}: backoff exhausted")
    return None


def optimize(W, mode="general", cfg=DEFAULT_CONFIG, mix=None, builder=None):
    """Subtract until the zero set (with soft directions) spans the space.

    Terminal status: "optimal-certified" when P_W and the soft directions
    span H, "epsilon-exhausted" when the admissible amount falls below
    ``cfg.lambda_min_step``, "iteration-cap" otherwise.
    """
    mix = cfg.mix_weight if mix is None else mix
    trace = OptimizationTrace()
    d = W.op.dim
    for it in range(cfg.max_iterations):
        if span_dimension(W.zero_set) == d:
            trace.terminal_status = "optimal-certified"
            return W, trace
        D, rank = builder(W) if builder else subtraction_direction(W, mode, mix)
        if D is None:
            trace.terminal_status = "optimal-certified"
            return W, trace
        new = _step(W, D, rank, it, cfg, trace)
        if new is None:
            trace.terminal_status = "epsilon-exhausted"
            return W, trace
        W = new
    if span_dimension(W.zero_set) == d:
        trace.terminal_status = "optimal-certified"
    return W, trace


def edge_kernels(delta):
    """Projectors onto K(delta) and K(delta^{T_B})."""
    P1 = kernel_projector(delta.matrix)
    Q1 = kernel_projector(partial_transpose(delta).matrix)
    return delta.like(P1), delta.like(Q1)


def construct_from_edge(delta, cfg=DEFAULT_CONFIG, certify=True):
    """Witness detecting the edge state `delta`.

    W_delta = a (P1 + Q1^{T_B}) with P1, Q1 the kernel projectors of delta and
    delta^{T_B}, a = 1 / tr(P1 + Q1). Its minimum eps1 over product vectors is
    positive exactly because delta is an edge state; W1 is proportional to
    W_delta - eps1 * 1.
    """
    from .states import certify_edge, check_ppt

    delta = delta.hermitian()
    try:
        check_ppt(delta)
    except NotPPTError:
        raise
    if certify:
        cert = certify_edge(delta, cfg)
        if not cert.is_edge:
            raise NotEdgeError(f"state is not edge ({cert.verdict})", cert)
    P1, Q1 = edge_kernels(delta)
    a = 1.0 / (np.trace(P1.matrix).real + np.trace(Q1.matrix).real)
    Wd = (P1 + partial_transpose(Q1)) * a
    eps1 = min_product_expectation(Wd, cfg).value
    if eps1 <= cfg.zero_tol:
        raise NotEdgeError(f"product floor {eps1:.3e} is not positive: state is not edge")
    W1 = Wd - identity(*delta.dims) * eps1
    return validate(W1, cfg, evidence=delta, meta=dict(epsilon1=eps1))


def edge_iteration(W1, cfg=DEFAULT_CONFIG):
    """Subtract P_n + Q_n^{T_B} (projectors off P_W and P_{W^T}) while possible.

    Then hand over to ``optimize(mode="nd")`` for any residual subtraction.
    """
    def builder(W):
        d = W.op.dim
        zeros = W.zero_set
        P, rp = _complement_projector([z.joint for z in zeros] + _soft_vectors(W, zeros), d)
        cz = [partial_conjugate(z) for z in zeros]
        Wt = partial_transpose(W.op)
        Q, rq = _complement_projector([z.joint for z in cz] + _soft_vectors(Wt, cz), d)
        if rp + rq == 0:
            return None, 0
        return W.op.like(P + partial_transpose(W.op.like(Q)).matrix), rp + rq

    W, trace = optimize(W1, "nd", cfg, builder=builder)
    if trace.terminal_status == "epsilon-exhausted":
        W, tail = optimize(W, "nd", cfg)
        trace.steps += tail.steps
        trace.warnings += tail.warnings
        trace.terminal_status = tail.terminal_status
    return W, trace


def random_projector_seed(rng, dim_a, dim_b, rank=3):
    """Decomposable start P + P^{T_B} from a random projector of given rank."""
    d = dim_a * dim_b
    Z = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    q, _ = np.linalg.qr(Z)
    P = BipartiteOperator(q @ q.conj().T, dim_a, dim_b)
    return P + partial_transpose(P)


# --------------------------------------------------------------------------
# analytic 2x4 gallery


def gallery_a():
    A = np.zeros((8, 8))
    A[1, 1] = A[2, 2] = A[5, 5] = A[6, 6] = 1
    A[1, 6] = A[6, 1] = -2
    return BipartiteOperator(A, 2, 4)


def gallery_b():
    B = np.eye(8)
    for i, j, v in ((0, 3, 1), (0, 5, -2), (2, 7, -2), (4, 7, -1)):
        B[i, j] = B[j, i] = v
    return BipartiteOperator(B, 2, 4)


def basis_ket(i, m, db=4, da=2):
    v = np.zeros(da * db)
    v[i * db + m] = 1
    return v


def w_of_x(x):
    """(A + x B) / x: not a witness by itself (may be negative on products)."""
    if x == 0:
        raise WforgeError("x must be nonzero")
    A, B = gallery_a(), gallery_b()
    return (A + B * x) / x


def wx_witness(x0, cfg=DEFAULT_CONFIG):
    """W(x0) shifted by the identity until it is non-negative on products."""
    if x0 <= 0:
        raise WforgeError("x0 must be positive")
    Wx = w_of_x(x0)
    lam = -min_product_expectation(Wx, cfg).value
    return validate(Wx + identity(2, 4) * lam, cfg, meta=dict(x0=x0, shift=lam))


def limit_test(rho, A=None, B=None, tol_a=1e-10, tol_b=1e-8):
    """Limit of tr(W(x) rho) as x -> 0+, and whether it flags rho entangled.

    The limit is tr(B rho) when tr(A rho) vanishes and +inf otherwise; a
    negative limit certifies entanglement.
    """
    A = gallery_a() if A is None else A
    B = gallery_b() if B is None else B
    ta = float(np.trace(A.matrix @ rho.matrix).real)
    tb = float(np.trace(B.matrix @ rho.matrix).real)
    if abs(ta) <= tol_a:
        return tb, tb < -tol_b
    if ta > 0:
        return np.inf, False
    return -np.inf, True


def s_family(phis):
    """Product vectors (|0> + e^{i p}|1>) (x) sum_k e^{-i k p}|k> (unnormalized)."""
    out = []
    for p in np.atleast_1d(phis):
        e = np.array([1, np.exp(1j * p)])
        f = np.exp(-1j * p * np.arange(4))
        out.append(np.kron(e, f))
    return np.array(out)


def s_complement():
    """Stated basis of the orthogonal complement of span(S)."""
    return np.array([
        -basis_ket(0, 2) + basis_ket(1, 3),
        -basis_ket(0, 1) + basis_ket(1, 2),
        -basis_ket(0, 0) + basis_ket(1, 1),
    ])


def common_zeros(A, B, n=61, tol=1e-10):
    """Product vectors where A vanishes and B vanishes too (qubit A factor).

    Scans the A sphere; at each e, restricts B_e to the kernel of A_e and
    keeps its kernel. Returns joint vectors (not deduplicated).
    """
    from .bipartite import contract_a

    vecs = []
    ts = np.linspace(0, np.pi, n)
    ps = np.linspace(0, 2 * np.pi, n - 1, endpoint=False)
    for t in ts:
        for p in (ps if 0 < t < np.pi else ps[:1]):
            e = np.array([np.cos(t / 2), np.exp(1j * p) * np.sin(t / 2)])
            w, v = np.linalg.eigh(contract_a(A, e))
            K = v[:, w < tol]
            if K.shape[1] == 0:
                continue
            w2, v2 = np.linalg.eigh(K.conj().T @ contract_a(B, e) @ K)
            for k in np.nonzero(np.abs(w2) < tol)[0]:
                vecs.append(np.kron(e, K @ v2[:, k]))
    return vecs
