#!/usr/bin/env python3
"""Regenerate the two-level angle sweep (721 angles, beta = 1)."""

import sys

from workreal.cli import main

if __name__ == "__main__":
    sys.exit(main(["tls-theta", "--out", "results/tls_theta", *sys.argv[1:]]))
