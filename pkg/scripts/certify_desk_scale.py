#!/usr/bin/env python3
"""Run the full oracle certification sweep over every size under the cap.

For each (d, N) with d^(N+1) within the oracle cap and N small enough for
the projector constructions, runs the formula-vs-oracle comparison, the
spectrum matching, and the dual-certificate checks, in both the standard
and the optimized setting.

Example:
    python3 scripts/certify_desk_scale.py --max-dim 256
"""

import argparse
import sys

from pbtfid import optimize_coefficients, run_verification


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--max-dim", type=int, default=128, help="cap on d^(N+1)")
    args = parser.parse_args()

    failures = 0
    for d in (2, 3, 4):
        for n in range(1, 7):
            if d ** (n + 1) > args.max_dim:
                continue
            for mode in ("standard", "optimized"):
                coeffs = (
                    optimize_coefficients(d, n).coefficients
                    if mode == "optimized"
                    else None
                )
                checks = run_verification(d, n, mode, coeffs)
                ok = all(c.passed for c in checks)
                failures += 0 if ok else 1
                worst = max(c.deviation for c in checks)
                print(
                    f"[{'PASS' if ok else 'FAIL'}] d={d} N={n} {mode:9s} "
                    f"worst deviation {worst:.2e}"
                )
    print(f"{failures} failing configurations")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
