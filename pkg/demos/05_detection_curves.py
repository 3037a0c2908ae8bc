"""Detection ranges of optimized witnesses across the tilde-rho_b family.

For each b the witness is built from tilde-rho_b and optimized; b' is the
largest b~ with tilde-rho_{b~} still detected, and lambda the largest amount
of white noise tolerated. The same command is available as
``wforge figures --grid 9 --out curves.csv``.
"""

import sys

from wforge.figures import COLUMNS, figure_rows

n = int(sys.argv[1]) if len(sys.argv) > 1 else 5
rows = figure_rows(n)
print("  ".join(f"{c:>14s}" for c in COLUMNS))
for r in rows:
    print("  ".join(f"{getattr(r, c):14.6g}" for c in COLUMNS))
