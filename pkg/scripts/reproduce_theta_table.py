#!/usr/bin/env python3
"""Regenerate the Floquet-constant reference table.

Writes theta_table.csv with one row per (L, kappa) pair at the reference
labels. Note the three misprinted cells in the printed reference table; the
computed values here are the self-consistent ones (see NOTES.md).
"""

import sys

from dswlab.cli import main

if __name__ == "__main__":
    sys.exit(main(["theta-table", "--out", "theta_table.csv"] + sys.argv[1:]))
