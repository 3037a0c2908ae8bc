"""Independent brute-force reference computations for a qubit A factor.

Nothing here calls the search code of the package: values come from plain
grids over the Bloch sphere followed by successive zoomed grids.
"""

import numpy as np
from scipy.linalg import eigh


def bloch(theta, phi):
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def _contract(M, db, e):
    T = M.reshape(2, db, 2, db)
    return np.einsum("i,imjn,j->mn", e.conj(), T, e)


def grid_minimize(fun, n=100, zooms=3):
    """Minimize fun(theta, phi) over an n x n grid, then zoom around the best cell."""
    th0, th1, ph0, ph1 = 0.0, np.pi, 0.0, 2 * np.pi
    best = (np.inf, None)
    for _ in range(zooms + 1):
        ths = np.linspace(th0, th1, n)
        phs = np.linspace(ph0, ph1, n)
        for t in ths:
            for p in phs:
                v = fun(t, p)
                if v < best[0]:
                    best = (v, (t, p))
        t, p = best[1]
        dt, dp = 2 * (th1 - th0) / (n - 1), 2 * (ph1 - ph0) / (n - 1)
        th0, th1 = max(t - dt, 0.0), min(t + dt, np.pi)
        ph0, ph1 = p - dp, p + dp
    return best


def product_minimum(M, db, n=100, zooms=3):
    """min over product vectors of <e,f|M|e,f>."""
    return grid_minimize(lambda t, p: np.linalg.eigvalsh(_contract(M, db, bloch(t, p)))[0], n, zooms)[0]


def subtraction_amount(W, D, db, n=100, zooms=3):
    """min over e of the smallest generalized eigenvalue of (W_e, D_e); D full rank."""
    def f(t, p):
        e = bloch(t, p)
        return eigh(_contract(W, db, e), _contract(D, db, e), eigvals_only=True)[0]

    return grid_minimize(f, n, zooms)[0]
