#!/usr/bin/env python3
"""Full-scale angle sweep: two lines at theta in {0.01, ..., 1.57}.

Runs plain and line-search cyclic projections with 10 random starts per
angle and writes the summary CSV (default stdout).  Any cycproj
angle-sweep flag can be appended to override the experiment defaults,
e.g. --out data/angle_sweep.csv or --reps 3 for a quick look.
"""

import sys

from cycproj.cli import main

DEFAULTS = [
    "angle-sweep",
    "--theta-min", "0.01",
    "--theta-max", "1.57",
    "--theta-step", "0.01",
    "--reps", "10",
    "--eps", "1e-9",
    "--max-iter", "400000",
]

if __name__ == "__main__":
    sys.exit(main(DEFAULTS + sys.argv[1:]))
