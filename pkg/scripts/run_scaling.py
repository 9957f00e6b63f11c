#!/usr/bin/env python3
"""Planned-shot growth of the learning method vs quasiprobability baselines.

Reproduces the crossover table: the learning totals grow polynomially in the
number of cut wires while the baseline Hoeffding counts grow geometrically.
"""

import sys

from knitsim.cli import main

if __name__ == "__main__":
    sys.exit(main([
        "scaling", "--d", "2", "--eps", "0.1", "--delta", "0.1",
        "--r-max", "6", "--out", "scaling.csv", *sys.argv[1:],
    ]))
