"""Detection-range curves for witnesses built from the edge states tilde-rho_b.

For each b on a grid the witness is constructed from tilde-rho_b and
optimized. Two quantities are reported, each for the witness and for its
positive map:

* b' - the largest b~ such that tilde-rho_{b~} is still detected
  (bisection to 1e-4 on [b, 1]);
* lambda - the largest lam such that tilde-rho_b + lam * 1 is still
  detected. For the witness this is -tr(W tilde-rho_b) since tr W = 1; for
  the map it is found by bisection on the sign of the minimum eigenvalue.
"""

import csv
from dataclasses import asdict, dataclass

import numpy as np

from .bipartite import identity
from .maps import map_min_eigenvalue
from .product_search import DEFAULT_CONFIG
from .states import tilde_rho_b
from .witness import DETECTION_TOL, construct_from_edge, edge_iteration

COLUMNS = ("b", "bprime_witness", "bprime_map", "lambda_witness", "lambda_map")


@dataclass
class FigureRow:
    b: float
    bprime_witness: float = np.nan
    bprime_map: float = np.nan
    lambda_witness: float = np.nan
    lambda_map: float = np.nan


def grid_points(n):
    """n interior points k/(n+1); n = 9 gives 0.1, ..., 0.9."""
    return [(k + 1) / (n + 1) for k in range(n)]


def optimized_witness(b, cfg=DEFAULT_CONFIG):
    W1 = construct_from_edge(tilde_rho_b(b), cfg)
    W, trace = edge_iteration(W1, cfg)
    return W, trace


def bisect_threshold(detected, lo, hi, tol=1e-4):
    """Largest x in [lo, hi] with detected(x), assuming detected(lo) and a single switch."""
    if detected(hi):
        return hi
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if detected(mid):
            lo = mid
        else:
            hi = mid
    return lo


def witness_value(W, rho):
    return float(np.trace(W.op.matrix @ rho.matrix).real)


def bprime(W, b, via_map=False, tol=1e-4):
    if via_map:
        det = lambda x: map_min_eigenvalue(W, tilde_rho_b(x)) < -DETECTION_TOL  # noqa: E731
    else:
        det = lambda x: witness_value(W, tilde_rho_b(x)) < -DETECTION_TOL  # noqa: E731
    if not det(b):
        return np.nan
    return bisect_threshold(det, b, 1.0, tol)


def lambda_map(W, rho, tol=1e-9, cap=1e3):
    """Largest lam with (E_W (x) 1)(rho + lam 1) still non-positive."""
    one = identity(*rho.dims)
    det = lambda lam: map_min_eigenvalue(W, rho + one * lam) < -DETECTION_TOL  # noqa: E731
    if not det(0.0):
        return 0.0
    hi = max(-witness_value(W, rho), 1e-6)
    while det(hi):
        hi *= 2
        if hi > cap:
            return np.inf
    return bisect_threshold(det, 0.0, hi, tol)


def figure_row(b, which=(1, 2), cfg=DEFAULT_CONFIG):
    W, _ = optimized_witness(b, cfg)
    row = FigureRow(b)
    if 1 in which:
        row.bprime_witness = bprime(W, b)
        row.bprime_map = bprime(W, b, via_map=True)
    if 2 in which:
        rho = tilde_rho_b(b)
        row.lambda_witness = -witness_value(W, rho)
        row.lambda_map = lambda_map(W, rho)
    return row


def figure_rows(n, which=(1, 2), cfg=DEFAULT_CONFIG, workers=1):
    bs = grid_points(n)
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(workers) as ex:
            return list(ex.map(figure_row, bs, [which] * n, [cfg] * n))
    return [figure_row(b, which, cfg) for b in bs]


def write_csv(rows, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for r in rows:
            d = asdict(r)
            w.writerow(["" if np.isnan(d[c]) else repr(float(d[c])) for c in COLUMNS])


def read_csv(path):
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(FigureRow(**{c: float(rec[c]) if rec[c] else np.nan for c in COLUMNS}))
    return rows
