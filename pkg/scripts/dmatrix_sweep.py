#!/usr/bin/env python3
"""Sweep the modulus at L = 1 and tabulate the D matrix, its determinant, the
index count, and the six elliptic quadratures (the data behind the reference
det-D and A2 curves).

Writes dmatrix_sweep.csv; det < 0 and n(D) = 1 across the sweep.
"""

import sys

from dswlab.cli import main

if __name__ == "__main__":
    sys.exit(main(["dmatrix-sweep", "--L", "1", "--out", "dmatrix_sweep.csv"]
                  + sys.argv[1:]))
