#!/usr/bin/env python3
"""How many seesaw restarts does each inequality need?

For every catalog entry, runs single-restart seesaws from many seeds and
reports what fraction of them land within --slack of the best value seen.
Rows with a low hit rate are the ones where the 200-restart default is
doing real work.
"""

import argparse
import sys

from tribell.bell_expr import catalog_entry
from tribell.seesaw import SeesawParams, seesaw_run


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", type=int, default=100, help="single-restart runs per id")
    parser.add_argument("--slack", type=float, default=1e-6)
    parser.add_argument("--ids", type=int, nargs="*", default=list(range(1, 47)))
    args = parser.parse_args()

    params = SeesawParams(restarts=1)
    print(f"{'id':>3} {'best':>12} {'hit rate':>9} {'median sweeps':>14}")
    for ident in args.ids:
        expr = catalog_entry(ident).expression
        runs = [seesaw_run(expr, seed, params) for seed in range(args.seeds)]
        best = max(run.value for run in runs)
        hits = sum(run.value >= best - args.slack for run in runs)
        sweeps = sorted(run.sweeps_used for run in runs)
        print(f"{ident:>3} {best:>12.7f} {hits / len(runs):>9.2f}"
              f" {sweeps[len(sweeps) // 2]:>14}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
