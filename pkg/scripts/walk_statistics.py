#!/usr/bin/env python3
"""Gap statistics of fair bits and the V+ walk, against their exact laws."""
import argparse

from skewprod.walk import gap_statistics, ks_statistic, vplus_law, vplus_walk


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    g = gap_statistics(args.seed, args.samples)
    print(f"even parity  {g.parity_even:.5f}  (exact 2/3)")
    for k in range(5):
        d = 2 * k + 1
        print(f"P(d={d:2d})     {g.d_law.get(d, 0.0):.5f}  (exact {3 / 4 ** (k + 1):.5f})")
    a = vplus_walk(args.seed + 1, args.samples)
    b = vplus_walk(args.seed + 2, args.samples, "first-return")
    law = vplus_law()
    print(f"V+ mean step {a.mean_step:+.5f}  (exact 0)")
    for k in (1, 0, -1, -2, -3):
        print(f"P(step={k:+d})  direct {float((a.step_values == k).mean()):.5f}  "
              f"first-return {float((b.step_values == k).mean()):.5f}  exact {law[k]:.5f}")
    print(f"KS(direct, first-return) = {ks_statistic(a.step_values, b.step_values):.5f}")
    print(f"visits to 0: {a.zero_visits} in {a.steps} steps")


if __name__ == "__main__":
    main()
