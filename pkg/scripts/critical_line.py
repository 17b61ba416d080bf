#!/usr/bin/env python3
"""Critical line, transition order, and g along the contour for lambda in [0.5, 1].

Writes critical.csv (per-lambda table) and critical_summary.json with the
located order-change point and the branching ratio there.
"""

import sys

from asyncqca.cli import main

if __name__ == "__main__":
    sys.exit(main([
        "critical", "--lambda", "0.5:1:26", "--iters", "1000", *sys.argv[1:],
    ]))
