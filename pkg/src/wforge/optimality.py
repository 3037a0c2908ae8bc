"""Local analysis of a witness at its zeros and the resulting optimality test.

Around a zero |e0,f0> of W, perturb

    e(eps) = e0 + eps cos(theta) e^{i phi_e} e1,
    f(eps) = f0 + eps sin(theta) e^{i phi_f} f1,

with e1 ⊥ e0, f1 ⊥ f0. The unnormalized expectation is a quartic in eps with
coefficients A_0..A_4. Positivity on product vectors forces A_0 = A_1 = 0 and
A_2 >= 0; directions with A_2 = 0 ("soft" directions) are exactly those in
which an operator P must vanish to first order for it to be subtractable.

For a qubit A factor, e1 is fixed up to a phase and the existence of a soft
direction at a zero reduces to comparing two numbers built from the blocks
w_ij = <e_i|W|e_j> (see :func:`lemma_a8_test`). Collecting the zeros and the
soft vectors Psi gives the optimality verdict: W is optimal iff they span H.
"""

from dataclasses import dataclass, field

import numpy as np

from .bipartite import expectation, product
from .errors import WforgeError
from .linalg import complement_basis, pinv_hermitian
from .product_search import (
    DEFAULT_CONFIG,
    _perp_basis,
    min_contraction_ratio,
    span_dimension,
    swap_subsystems,
)

FRAME_TOL = 1e-12


@dataclass(frozen=True)
class TangentFrame:
    e0: np.ndarray
    f0: np.ndarray
    e1: np.ndarray
    f1: np.ndarray
    phi_e: float = 0.0
    phi_f: float = 0.0
    theta: float = np.pi / 4

    def __post_init__(self):
        for name in ("e0", "f0", "e1", "f1"):
            v = np.asarray(getattr(self, name), dtype=complex)
            if abs(np.linalg.norm(v) - 1) > 1e-10:
                raise WforgeError(f"frame vector {name} is not normalized")
            object.__setattr__(self, name, v)
        if abs(np.vdot(self.e0, self.e1)) > 1e-10 or abs(np.vdot(self.f0, self.f1)) > 1e-10:
            raise WforgeError("frame vectors e1, f1 must be orthogonal to e0, f0")

    def vectors(self, eps):
        """Unnormalized e(eps), f(eps)."""
        e = self.e0 + eps * np.cos(self.theta) * np.exp(1j * self.phi_e) * self.e1
        f = self.f0 + eps * np.sin(self.theta) * np.exp(1j * self.phi_f) * self.f1
        return e, f


@dataclass(frozen=True)
class FrameCoefficients:
    a0: float
    a1: float
    a2: float
    a3: float
    a4: float

    def as_array(self):
        return np.array([self.a0, self.a1, self.a2, self.a3, self.a4])


def matrix_elements(W, e0, f0, e1, f1):
    """M[i, j, k, l] = <e_i, f_j| W |e_k, f_l> for i, j, k, l in {0, 1}."""
    E = np.stack([e0, e1])
    F = np.stack([f0, f1])
    return np.einsum("ia,jb,abcd,kc,ld->ijkl", E.conj(), F.conj(), W.tensor4(), E, F)


def frame_coefficients(W, frame, check=True):
    """Coefficients A_0..A_4 of the eps-expansion at a frame.

    With ``check`` the closed form is compared to a degree-4 fit through five
    evaluations of the unnormalized expectation; disagreement above 1e-8
    raises.
    """
    M = matrix_elements(W, frame.e0, frame.f0, frame.e1, frame.f1)
    c, s = np.cos(frame.theta), np.sin(frame.theta)
    pe, pf = np.exp(1j * frame.phi_e), np.exp(1j * frame.phi_f)
    a0 = M[0, 0, 0, 0].real
    a1 = 2 * (c * pe * M[0, 0, 1, 0] + s * pf * M[0, 0, 0, 1]).real
    a2 = (
        c * c * M[1, 0, 1, 0].real
        + s * s * M[0, 1, 0, 1].real
        + 2 * s * c * (np.conj(pe) * pf * M[1, 0, 0, 1] + pe * pf * M[0, 0, 1, 1]).real
    )
    a3 = 2 * s * c * (c * pf * M[1, 0, 1, 1] + s * pe * M[0, 1, 1, 1]).real
    a4 = s * s * c * c * M[1, 1, 1, 1].real
    out = FrameCoefficients(float(a0), float(a1), float(a2), float(a3), float(a4))
    if check:
        fit = fit_coefficients(W, frame)
        scale = max(np.abs(W.matrix).max(), 1.0)
        if np.abs(fit - out.as_array()).max() > 1e-8 * scale:
            raise WforgeError("closed-form expansion disagrees with the polynomial fit")
    return out


def fit_coefficients(W, frame, eps=(-1.0, -0.5, 0.0, 0.5, 1.0)):
    """Degree-4 interpolation of <e(eps),f(eps)|W|e(eps),f(eps)>; returns a0..a4."""
    vals = []
    for x in eps:
        e, f = frame.vectors(x)
        vals.append(expectation(W, np.kron(e, f)).real)
    return np.polyfit(np.array(eps), np.array(vals), 4)[::-1]


def x_of_w(W, e0, f0, e1, f1):
    """W^{10}_{10} W^{01}_{01} - (|W^{01}_{10}| + |W^{11}_{00}|)^2."""
    M = matrix_elements(W, e0, f0, e1, f1)
    return float(M[1, 0, 1, 0].real * M[0, 1, 0, 1].real - (abs(M[1, 0, 0, 1]) + abs(M[0, 0, 1, 1])) ** 2)


def min_a2_over_angles(W, e0, f0, e1, f1):
    """min over theta, phi_e, phi_f of A_2: smallest eigenvalue of a 2x2 form.

    Phases are chosen so both cross terms are negative reals, after which
    A_2 = a c^2 + b s^2 - 2 s c (|W^{01}_{10}| + |W^{11}_{00}|).
    """
    M = matrix_elements(W, e0, f0, e1, f1)
    a, b = M[1, 0, 1, 0].real, M[0, 1, 0, 1].real
    m = abs(M[1, 0, 0, 1]) + abs(M[0, 0, 1, 1])
    return float(np.linalg.eigvalsh(np.array([[a, -m], [-m, b]]))[0])


def optimal_phases(W, e0, f0, e1, f1):
    """Phases making both cross terms of A_2 negative real, and the balancing theta."""
    M = matrix_elements(W, e0, f0, e1, f1)
    phi0 = np.angle(M[1, 0, 0, 1])
    phi1 = np.angle(M[0, 0, 1, 1])
    # phi_e - phi_f = phi0 + pi,  phi_e + phi_f = pi - phi1
    phi_e = np.mod((phi0 - phi1) / 2 + np.pi, 2 * np.pi)
    phi_f = np.mod(np.pi - phi1 - phi_e, 2 * np.pi)
    a, b = M[1, 0, 1, 0].real, M[0, 1, 0, 1].real
    if a < FRAME_TOL and b < FRAME_TOL:
        raise WforgeError("both diagonal elements vanish: theta undetermined (degenerate)")
    theta = float(np.arctan2(np.sqrt(max(a, 0.0)), np.sqrt(max(b, 0.0))))
    return float(phi_e), float(phi_f), theta


def e_blocks(W, e0, e1):
    """w_ij = <e_i|W|e_j> as d_B x d_B matrices, i, j in {0, 1}."""
    E = np.stack([e0, e1])
    return np.einsum("ia,ambn,jb->ijmn", E.conj(), W.tensor4(), E)


def solve_phase_e(W, e0, f0, e1=None, rtol=1e-9):
    """Phase of the A-side perturbation that makes the soft direction exist.

    Returns ``(phi_e, degenerate)``. The second-order change of W along
    e0 + x e1 (|x| = 1), minimized over the B-side perturbation, is
    L - 2 Re[x^2 <f0|w01 G w01|f0>]; it is smallest when
    e^{-2 i phi_e} <f0|w10 G w10|f0> is a non-negative real, G being the
    pseudo-inverse of w00.
    """
    if e1 is None:
        e1 = _perp_basis(e0)[:, 0]
    w = e_blocks(W, e0, e1)
    G = pinv_hermitian(w[0, 0])
    c = np.vdot(f0, w[1, 0] @ G @ w[1, 0] @ f0)
    scale = max(np.abs(W.matrix).max(), 1e-300)
    if abs(c) <= rtol * scale:
        return 0.0, True
    return float(np.mod(np.angle(c) / 2, np.pi)), False


@dataclass(frozen=True)
class A8Result:
    exists: bool
    lhs: float
    rhs: float
    frame: TangentFrame | None = None
    psi: list = field(default_factory=list)
    x_value: float | None = None
    degenerate: bool = False
    note: str = ""


def lemma_a8_test(W, e0, f0, rtol=1e-7):
    """Does a soft direction exist at the zero |e0,f0>? (qubit A factor)

    Compares L = <f0|w11 - w01 G w10 - w10 G w01|f0> with
    R = 2 |<f0|w01 G w01|f0>|; L >= R always holds for a witness, and
    equality means some (e1, f1, phases, theta) give A_2 = 0. On equality the
    frame and Psi vector(s) are constructed and X is evaluated there.
    """
    if W.dim_a != 2:
        raise WforgeError("this test needs a qubit A factor")
    e0 = np.asarray(e0, dtype=complex)
    f0 = np.asarray(f0, dtype=complex)
    e1 = _perp_basis(e0)[:, 0]
    w = e_blocks(W, e0, e1)
    G = pinv_hermitian(w[0, 0])
    u = w[0, 1] @ f0
    v = w[1, 0] @ f0
    L = np.vdot(f0, w[1, 1] @ f0).real - np.vdot(u, G @ u).real - np.vdot(v, G @ v).real
    c = np.vdot(f0, w[0, 1] @ G @ w[0, 1] @ f0)
    R = 2 * abs(c)
    scale = max(abs(L), R, 1e-300)
    wscale = max(np.abs(W.matrix).max(), 1e-300)

    # h must lie in R(w00) for the quadratic model to be bounded
    from .linalg import kernel_projector

    Pk = kernel_projector(w[0, 0])
    if np.linalg.norm(Pk @ u) + np.linalg.norm(Pk @ v) > 1e-6 * wscale:
        return A8Result(False, float(L), float(R), degenerate=True,
                        note="first-order couplings leave the range of w00")
    if abs(L - R) > rtol * max(scale, 1e-12 * wscale) and abs(L - R) > 1e-12 * wscale:
        return A8Result(False, float(L), float(R))

    degenerate = R <= 1e-9 * wscale
    chis = [0.0, np.pi / 2] if degenerate else [float(np.mod(-np.angle(c) / 2, np.pi))]
    psis = []
    frame = None
    xval = None
    for chi in chis:
        x = np.exp(1j * chi)
        g = -G @ (x * u + np.conj(x) * v)
        g = g - f0 * np.vdot(f0, g)
        ng = np.linalg.norm(g)
        if ng <= 1e-9:
            return A8Result(True, float(L), float(R), degenerate=True,
                            note="soft direction lies along e only (theta boundary)")
        f1 = g / ng
        phi_e, phi_f, theta = optimal_phases(W, e0, f0, e1, f1)
        fr = TangentFrame(e0, f0, e1, f1, phi_e, phi_f, theta)
        xv = x_of_w(W, e0, f0, e1, f1)
        if frame is None:
            frame, xval = fr, xv
        psis.append(psi_vector(fr))
    return A8Result(True, float(L), float(R), frame, psis, xval, degenerate)


def psi_vector(frame):
    """sin(theta) e^{i phi_f}|e0,f1> + cos(theta) e^{i phi_e}|e1,f0> (unit norm)."""
    v = (np.sin(frame.theta) * np.exp(1j * frame.phi_f) * np.kron(frame.e0, frame.f1)
         + np.cos(frame.theta) * np.exp(1j * frame.phi_e) * np.kron(frame.e1, frame.f0))
    return v / np.linalg.norm(v)


def random_frame(rng, e0, f0):
    """Random unit e1 ⊥ e0, f1 ⊥ f0 and random angles."""
    def perp(v):
        B = _perp_basis(v)
        z = rng.normal(size=B.shape[1]) + 1j * rng.normal(size=B.shape[1])
        x = B @ z
        return x / np.linalg.norm(x)

    return TangentFrame(e0, f0, perp(e0), perp(f0),
                        rng.uniform(0, 2 * np.pi), rng.uniform(0, 2 * np.pi),
                        rng.uniform(0, np.pi / 2))


@dataclass(frozen=True)
class Verdict:
    optimal: bool | None
    certificate: str | None  # "span" | "psi-closure" | None
    subtractable_direction: np.ndarray | None = None
    subtractable_amount: float | None = None
    psi_vectors: list = field(default_factory=list, repr=False)
    diagnostics: list = field(default_factory=list)

    @property
    def status(self):
        if self.optimal is None:
            return "inconclusive"
        return "optimal" if self.optimal else "not-optimal"


def optimality_verdict(W, cfg=DEFAULT_CONFIG, cross_check=True):
    """Decide optimality of a witness from its zeros and soft directions."""
    op = W.op
    zeros = list(W.zero_set)
    d = op.dim
    if span_dimension(zeros) == d:
        return Verdict(True, "span")
    if op.dim_a != 2:
        if op.dim_b != 2:
            return Verdict(None, None, diagnostics=["soft-direction test needs a qubit factor"])
        op = swap_subsystems(op)
        zeros = [product(z.f, z.e) for z in zeros]
        swapped = True
    else:
        swapped = False
    psis, diags = [], []
    for z in zeros:
        r = lemma_a8_test(op, z.e, z.f)
        if r.degenerate and not r.psi:
            diags.append(r.note or "degenerate zero")
        psis += r.psi
    if diags:
        return Verdict(None, None, diagnostics=diags)
    vecs = [z.joint for z in zeros] + psis
    C = complement_basis(vecs, d, rtol=1e-7)
    if C.shape[1] == 0:
        return Verdict(True, "psi-closure", psi_vectors=_unswap(psis, op.dims, swapped))
    psi = C[:, 0]
    amount = None
    if cross_check:
        P = op.like(np.outer(psi, psi.conj()))
        amount = min_contraction_ratio(op, P, cfg, zeros=zeros).value
        if not amount > 0:
            diags.append("complement direction not subtractable numerically")
            return Verdict(None, None, _unswap([psi], op.dims, swapped)[0], amount,
                           _unswap(psis, op.dims, swapped), diags)
    return Verdict(False, None, _unswap([psi], op.dims, swapped)[0], amount,
                   _unswap(psis, op.dims, swapped), diags)


def _unswap(vectors, dims, swapped):
    if not swapped:
        return list(vectors)
    da, db = dims  # dims of the swapped operator
    return [np.asarray(v).reshape(da, db).T.ravel() for v in vectors]
