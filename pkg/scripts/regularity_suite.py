#!/usr/bin/env python3
"""Holder and mollification audits over recursion and scheme fields."""

import argparse
import sys

from cltlab.cli import main as cli


def run(out_root: str) -> int:
    rc = 0
    for n in (8, 32, 128):
        rc |= cli([
            "regularity", "--family", "rademacher", "--phi", "abs",
            "--n", str(n), "--slack", "0", "--out", f"{out_root}/lattice-n{n}",
        ])
    rc |= cli([
        "regularity", "--source", "pde", "--phi", "abs",
        "--sigma-under", "1", "--sigma-bar", "1", "--h", "0.01",
        "--out", f"{out_root}/scheme",
    ])
    for beta in ("1.0", "0.5"):
        rc |= cli([
            "mollify-check", "--phi", "abs_pow", "--beta", beta,
            "--eps", "0.2,0.1,0.05", "--out", f"{out_root}/mollify-beta{beta}",
        ])
    return rc


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="cltlab-out/regularity")
    args = ap.parse_args()
    sys.exit(run(args.out))
