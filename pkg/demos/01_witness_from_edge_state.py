"""Build and optimize a witness for an edge PPT entangled state.

The state is tilde-rho_{1/2}, a 2x4 PPT entangled state that equals its own
partial transpose. We certify that it is an edge state, build the first
witness from its kernel projectors, and then subtract positive operators
until the product vectors on which the witness vanishes span the space.
"""

import numpy as np

from wforge.optimality import optimality_verdict
from wforge.product_search import span_dimension
from wforge.states import certify_edge, tilde_rho_b
from wforge.witness import construct_from_edge, detects, edge_iteration

delta = tilde_rho_b(0.5)
cert = certify_edge(delta)
print(f"edge certificate: {cert.verdict} (product floor {cert.floor:.2e}, method {cert.method})")

W1 = construct_from_edge(delta)
val1, _ = detects(W1, delta)
print(f"first witness: epsilon1 = {W1.meta['epsilon1']:.6e}, tr(W1 delta) = {val1:.6e}")
print(f"  zeros: {len(W1.zero_set)}, span {span_dimension(W1.zero_set)}")
print(f"  verdict: {optimality_verdict(W1).status}")

W, trace = edge_iteration(W1)
print("\niteration  lambda        zeros")
for it, lam, floor, nz in trace.rows():
    print(f"{it:9d}  {lam:.6e}  {nz}")
val, _ = detects(W, delta)
print(f"\noptimized witness: tr(W delta) = {val:.6e}, status {trace.terminal_status}")
print(f"  zeros: {len(W.zero_set)}, span {span_dimension(W.zero_set)}")
print(f"  W equals its partial transpose: {np.allclose(W.op.matrix, W.op.pt().matrix, atol=1e-8)}")
for z in W.zero_set:
    print("  e =", np.round(z.e, 4), " f =", np.round(z.f, 4))
