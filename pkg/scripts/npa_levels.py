#!/usr/bin/env python3
"""Moment-matrix level survey.

Solves the chosen inequalities at every relaxation level and prints the
bounds next to the seesaw value, so the tightening from 1+AB through AQ
(and the incomparable Q2) is visible per row. Q1 appears only when the
objective has no three-body terms.
"""

import argparse
import sys
import time

from tribell.bell_expr import catalog_entry
from tribell.npa import LEVELS, SdpParams, npa_upper_bound
from tribell.seesaw import SeesawParams, quantum_maximum


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--ids", type=int, nargs="*", default=[2, 7, 23, 41])
    parser.add_argument("--tol", type=float, default=1e-8)
    parser.add_argument("--max-iterations", type=int, default=10**6)
    parser.add_argument("--restarts", type=int, default=200)
    args = parser.parse_args()

    sdp = SdpParams(tolerance=args.tol, max_iterations=args.max_iterations)
    header = f"{'id':>3} {'seesaw':>12}" + "".join(f" {level:>12}" for level in LEVELS)
    print(header)
    for ident in args.ids:
        expr = catalog_entry(ident).expression
        seesaw = quantum_maximum(expr, SeesawParams(restarts=args.restarts))
        cells = [f"{ident:>3}", f"{seesaw.value:>12.7f}"]
        for level in LEVELS:
            started = time.perf_counter()
            try:
                bound = npa_upper_bound(expr, level, sdp)
            except ValueError:
                cells.append(f"{'-':>12}")
                continue
            except RuntimeError:
                cells.append(f"{'cap':>12}")
                continue
            cells.append(f"{bound:>12.7f}")
            elapsed = time.perf_counter() - started
            if elapsed > 5:
                cells[-1] += f" ({elapsed:.0f}s)"
        print(" ".join(cells))
    return 0


if __name__ == "__main__":
    sys.exit(main())
