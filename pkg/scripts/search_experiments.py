#!/usr/bin/env python3
"""Brute-force the true minimum cost on tiny instances.

Sweeps every covering structure in which each player keeps at least one
private position, runs the exhaustive protocol search, and compares the
result against the structural lower and upper estimates
max(k, r*ceil(log2 d)) and r*ceil(log2 d) + k. Parity on singleton
structures is also swept, where the floor is exactly n bits.

Sizes grow brutally fast; n or k beyond 3 usually trips the enumeration
ceiling (override with MACROSCOPE_CEILING at your own risk).

    python scripts/search_experiments.py --max-n 3 --d 2
"""

import argparse
import itertools
import time

from macroscope import (
    AllotmentStructure,
    Blindness,
    CeilingExceeded,
    SearchSpace,
    TargetFunction,
    ceil_log2,
    generate_structure,
    intersection_graph,
    min_cost_search,
)


def private_structures(n, k):
    positions = tuple(range(1, n + 1))
    subsets = [c for size in range(1, n + 1)
               for c in itertools.combinations(positions, size)]
    for sets in itertools.product(subsets, repeat=k):
        if set().union(*sets) != set(positions):
            continue
        others = [set().union(*(sets[q] for q in range(k) if q != i))
                  for i in range(k)]
        if all(set(sets[i]) - others[i] for i in range(k)):
            yield AllotmentStructure(n, sets)


def parity_floor_table(max_n):
    print("parity on singleton structures (floor should equal n):")
    for n in range(2, max_n + 1):
        structure = generate_structure("partition", n, n)
        space = SearchSpace(TargetFunction.parity(), structure,
                            Blindness.SINGLE, n)
        start = time.perf_counter()
        try:
            result = min_cost_search(space)
        except CeilingExceeded as err:
            print(f"  n={n}: skipped ({err})")
            continue
        took = time.perf_counter() - start
        print(f"  n={n}: min cost {result.min_cost}, "
              f"{result.explored} candidates, {took:.2f}s")


def sandwich_table(max_n, max_k, d):
    fn = TargetFunction.constancy(d)
    print(f"\nall-equal check, d={d}, private-position structures:")
    print("  n k sets                        r  lo  min  hi")
    for n in range(2, max_n + 1):
        for k in range(2, min(n, max_k) + 1):
            for structure in private_structures(n, k):
                r = intersection_graph(structure).component_count
                lo = max(k, r * ceil_log2(d))
                hi = r * ceil_log2(d) + k
                space = SearchSpace(fn, structure, Blindness.SINGLE, hi)
                try:
                    found = min_cost_search(space).min_cost
                except CeilingExceeded:
                    found = None
                    verdict = "ceiling"
                else:
                    verdict = "ok" if found is not None and lo <= found <= hi \
                        else "OUTSIDE BOUNDS"
                sets = ",".join("{" + ",".join(map(str, s)) + "}"
                                for s in structure.sets)
                shown = "-" if found is None else str(found)
                print(f"  {n} {k} {sets:<27} {r}  {lo}   {shown:<4} {hi} {verdict}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--max-n", type=int, default=3)
    parser.add_argument("--max-k", type=int, default=3)
    parser.add_argument("--d", type=int, default=2)
    args = parser.parse_args()
    parity_floor_table(args.max_n)
    sandwich_table(args.max_n, args.max_k, args.d)


if __name__ == "__main__":
    main()
