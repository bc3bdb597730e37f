#!/usr/bin/env python3
"""Regenerate the temperature trend: deepest violation and its location per beta."""

import sys

from workreal.cli import main

if __name__ == "__main__":
    sys.exit(main(["squeeze-beta", "--out", "results/squeeze_beta", *sys.argv[1:]]))
