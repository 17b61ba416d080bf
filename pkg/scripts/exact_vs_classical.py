#!/usr/bin/env python3
"""Cross-check the classical sampler against the exact channel at L = 4.

Runs the synchronous (lambda = 0) point, where diagonal observables are
exactly classical, and prints the maximum deviation of the sampled Markov
matrix evolution from the dense-channel diagonal.
"""

import sys

from asyncqca.cli import main

if __name__ == "__main__":
    sys.exit(main([
        "classical", "--L", "4", "--T", "20", "--trials", "2000",
        "--lambda", "0", "--p-branch", "0.7", "--seed", "1",
        "--verify-exact", *sys.argv[1:],
    ]))
