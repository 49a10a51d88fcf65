#!/usr/bin/env python3
"""Measure how the constructive solver's runtime grows with instance size.

Doubles the node and edge counts a few times, solves several seeds per size,
and prints the median wall-clock time plus the growth ratio between steps.

Example:
    python scripts/scaling_study.py --base-nodes 115 --base-edges 220 --doublings 3
"""

import argparse
import statistics
import sys
import time

from mdrpp import GenSpec, generate_instance, random_connected_graph, solve_multitrip


def parse_args():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--base-nodes", type=int, default=115)
    p.add_argument("--base-edges", type=int, default=220)
    p.add_argument("--doublings", type=int, default=3)
    p.add_argument("--seeds", type=int, default=3, help="seeds per size")
    p.add_argument("--set", choices=("A", "B", "C"), default="B")
    return p.parse_args()


def main():
    args = parse_args()
    previous = None
    print(f"{'nodes':>7} {'edges':>7} {'median_s':>9} {'ratio':>6}")
    for step in range(args.doublings + 1):
        n = args.base_nodes * (2 ** step)
        m = args.base_edges * (2 ** step)
        times = []
        for seed in range(1, args.seeds + 1):
            base = random_connected_graph(n, m, seed, integer_weights=False,
                                          min_weight=0.5, max_weight=3.0)
            inst = generate_instance(base, GenSpec(n, m, seed, set_kind=args.set))
            t0 = time.perf_counter()
            sol = solve_multitrip(inst)
            times.append(time.perf_counter() - t0)
            if not sol.complete:
                print(f"  warning: seed {seed} at size {n} left "
                      f"{len(sol.uncovered)} edges uncovered", file=sys.stderr)
        med = statistics.median(times)
        ratio = "" if previous is None else f"{med / max(previous, 1e-9):.1f}"
        print(f"{n:>7} {m:>7} {med:>9.3f} {ratio:>6}")
        previous = med
    return 0


if __name__ == "__main__":
    sys.exit(main())
