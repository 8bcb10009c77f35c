#!/usr/bin/env python3
"""Tabulate how the standard-protocol fidelity approaches its large-N limit.

Prints CSV with the fidelity, the guaranteed lower bound, the leading
asymptote 1 - (d^2-1)/(4N), and the rescaled residual N*(1-F) - (d^2-1)/4,
which should shrink as N grows.

Example:
    python3 scripts/scan_convergence.py --d 2 --n-max 400 --step 10
"""

import argparse
import csv
import sys

from pbtfid import asymptote_standard, fidelity_standard, lower_bound_standard


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--d", type=int, default=2, help="local dimension")
    parser.add_argument("--n-max", type=int, default=200)
    parser.add_argument("--step", type=int, default=5)
    args = parser.parse_args()

    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["N", "F", "lower_bound", "asymptote", "rescaled_residual"])
    leading = (args.d**2 - 1) / 4
    for n in range(1, args.n_max + 1, args.step):
        f = fidelity_standard(args.d, n).fidelity
        writer.writerow(
            [
                n,
                f"{f:.15f}",
                f"{lower_bound_standard(args.d, n):.15f}",
                f"{asymptote_standard(args.d, n):.15f}",
                f"{n * (1 - f) - leading:+.6f}",
            ]
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
