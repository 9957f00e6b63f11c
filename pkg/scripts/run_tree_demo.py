#!/usr/bin/env python3
"""End-to-end demo: estimate a random two-level tree circuit.

Allocates a shot plan for a random (L=2, R=2, d=2) tree, runs the
leaf-to-root learned estimation, and prints the estimate next to the exact
contraction oracle.
"""

import sys

from knitsim.cli import main

if __name__ == "__main__":
    sys.exit(main([
        "tree", "--L", "2", "--R", "2", "--d", "2", "--eps", "0.2",
        "--delta", "0.1", "--trials", "10", "--seed", "5",
        "--out", "tree_demo.csv", *sys.argv[1:],
    ]))
