#!/usr/bin/env python3
"""Sweep the storage/repair tradeoff curve for a regenerating-code instance.

Writes eta -> certified bound as CSV alongside the layered-code inner
points, so the certified outer bound can be compared against the achievable
corner points directly.
"""

import argparse
import sys

from entrobound.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=3)
    ap.add_argument("--etas", default="0,1/2,1,3/2,2")
    ap.add_argument("--out-csv", default="tradeoff.csv")
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--episodes", type=int, default=40)
    ap.add_argument("--kappa", type=int, default=256)
    args = ap.parse_args()
    sys.exit(main(["sweep", "--n", str(args.n), "--etas", args.etas,
                   "--kappa", str(args.kappa),
                   "--episodes", str(args.episodes),
                   "--stagnation", "4", "--seed", str(args.seed),
                   "--out-csv", args.out_csv]))
