#!/usr/bin/env python3
"""Solve the full-elemental entropy LP exactly for a small instance.

This is the brute-force reference the search is measured against; it is
tractable up to n=4 (12 variables, 67,596 elemental rows) with symmetry
collapsing, and refuses larger universes unless forced.
"""

import argparse
import sys

from entrobound.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--eta", default="1")
    ap.add_argument("--out-cert", default="full_lp.cert")
    ap.add_argument("--no-symmetry", action="store_true")
    args = ap.parse_args()
    argv = ["full-lp", "--n", str(args.n), "--eta", args.eta,
            "--out-cert", args.out_cert,
            "--out-manifest", args.out_cert + ".manifest"]
    if not args.no_symmetry:
        argv.append("--symmetry")
    sys.exit(main(argv))
