#!/usr/bin/env python3
"""Run the two standard convergence-rate experiments and chart them.

The symmetric single-law family is compared against the analytic reference;
the two-member family against a Richardson scheme value. Outputs land under
--out (default cltlab-out/rate-experiments), one subdirectory each.
"""

import argparse
import sys

from cltlab.cli import main as cli


def run(out_root: str, ns: str) -> int:
    rc = cli([
        "rates", "--family", "rademacher", "--phi", "abs", "--ns", ns,
        "--emit-svg", "--out", f"{out_root}/symmetric",
    ])
    rc |= cli([
        "rates", "--family", "rademacher_pair", "--phi", "abs", "--ns", ns,
        "--exponent-rule", "basic", "--emit-svg", "--out", f"{out_root}/two-member",
    ])
    return rc


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="cltlab-out/rate-experiments")
    ap.add_argument("--ns", default="4,16,64,256,1024,4096")
    args = ap.parse_args()
    sys.exit(run(args.out, args.ns))
