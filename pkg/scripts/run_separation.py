#!/usr/bin/env python3
"""Hidden-bit discrimination race: learning protocol vs Pauli-QPD baseline.

Sweeps total shot budgets at several branch counts R and records each
method's success rate at recovering the planted sign from fresh instances.
"""

import sys

from knitsim.cli import main

if __name__ == "__main__":
    sys.exit(main([
        "separation", "--R", "1", "2", "3", "--n", "1", "--eps", "0.5",
        "--shots-grid", "500", "1000", "2000", "4000", "8000",
        "--instances", "20", "--seed", "11", "--out", "separation.csv",
        *sys.argv[1:],
    ]))
