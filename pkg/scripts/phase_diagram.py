#!/usr/bin/env python3
"""Full stationary phase diagram on the 201x201 grid, with a PGM heatmap.

Equivalent to:
    asyncqca sweep --lambda 0:1:201 --p-branch 0:1:201 --iters 1000 --pgm
"""

import sys

from asyncqca.cli import main

if __name__ == "__main__":
    sys.exit(main([
        "sweep", "--lambda", "0:1:201", "--p-branch", "0:1:201",
        "--iters", "1000", "--threads", "4", "--pgm", *sys.argv[1:],
    ]))
