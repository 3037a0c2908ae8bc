"""The positive map of a witness and what it detects.

tr(W rho) equals the overlap of (E_W (x) 1)(rho) with the unnormalized
maximally entangled vector, so the map detects everything the witness does
and possibly more.
"""

import numpy as np

from wforge.maps import apply_extended, map_min_eigenvalue, max_entangled
from wforge.states import tilde_rho_b
from wforge.witness import construct_from_edge, detects, edge_iteration

W, _ = edge_iteration(construct_from_edge(tilde_rho_b(0.5)))
rho = tilde_rho_b(0.5)
psi = max_entangled(4)
print(f"tr(W rho)               = {np.trace(W.op.matrix @ rho.matrix).real:.10f}")
print(f"<Psi|(E (x) 1)(rho)|Psi> = {np.vdot(psi, apply_extended(W.op, rho).matrix @ psi).real:.10f}")

print("\n   b    tr(W rho_b)   map min eigenvalue")
for b in np.linspace(0.3, 1.0, 8):
    r = tilde_rho_b(b)
    print(f"{b:5.2f}  {detects(W, r)[0]:+.6f}    {map_min_eigenvalue(W, r):+.6f}")
