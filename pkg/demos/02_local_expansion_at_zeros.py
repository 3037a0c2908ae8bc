"""Second-order structure of a witness around its zeros.

At a zero |e0,f0> the expectation along a perturbation frame is a quartic
in eps whose constant and linear terms vanish and whose quadratic term is
non-negative. Directions where the quadratic term also vanishes ("soft"
directions) decide whether anything can still be subtracted.
"""

import numpy as np

from wforge.optimality import (
    frame_coefficients,
    lemma_a8_test,
    optimality_verdict,
    random_frame,
    x_of_w,
)
from wforge.states import tilde_rho_b
from wforge.witness import construct_from_edge, gallery_a, validate

rng = np.random.default_rng(0)

W1 = construct_from_edge(tilde_rho_b(0.5))
z = W1.zero_set[0]
print("random frames at a zero of the first witness:")
for _ in range(5):
    fr = random_frame(rng, z.e, z.f)
    c = frame_coefficients(W1.op, fr)
    X = x_of_w(W1.op, fr.e0, fr.f0, fr.e1, fr.f1)
    print(f"  A0={c.a0:+.1e} A1={c.a1:+.1e} A2={c.a2:.4f} X={X:.4f}")

print("\nsoft-direction test at the zeros of the first witness:")
for z in W1.zero_set:
    r = lemma_a8_test(W1.op, z.e, z.f)
    print(f"  L = {r.lhs:.6f}  R = {r.rhs:.6f}  soft direction: {r.exists}")
v = optimality_verdict(W1)
print(f"verdict: {v.status}, subtractable amount along the complement: {v.subtractable_amount:.3e}")

print("\na decomposable witness with a continuous zero set:")
G = validate(gallery_a())
r = next(lemma_a8_test(G.op, z.e, z.f) for z in G.zero_set
         if lemma_a8_test(G.op, z.e, z.f).frame is not None)
c = frame_coefficients(G.op, r.frame)
print(f"  L = {r.lhs:.4f} = R = {r.rhs:.4f}; A2 at the constructed frame = {c.a2:.1e}")
print(f"  verdict: {optimality_verdict(G).status} ({optimality_verdict(G).certificate})")
