#!/usr/bin/env python3
"""Regenerate the oscillator (r1, r2) violation map at beta = 0.1 with contours."""

import sys

from workreal.cli import main

if __name__ == "__main__":
    sys.exit(main(["squeeze-grid", "--out", "results/squeeze_grid", *sys.argv[1:]]))
