#!/usr/bin/env python3
"""Sweep n for the periodic approximation of the (0101) boundary measure and write a CSV."""
import argparse
import sys

from skewprod.dynamics import SkewSystem
from skewprod.fiber import mobius_model
from skewprod.measure import boundary_approx, traces_csv


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, default=2.0)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--target", default="0101")
    ap.add_argument("--n", type=int, nargs="+", default=[6, 18, 38, 66, 150, 400, 1000])
    ap.add_argument("--engine", default="auto", choices=["auto", "lifted", "near", "direct"])
    ap.add_argument("--out", default="-", help="CSV path, '-' for stdout")
    args = ap.parse_args(argv)

    sysm = SkewSystem(mobius_model(args.beta), args.engine)
    traces = [boundary_approx(sysm, args.target, args.delta, n) for n in args.n]
    text = traces_csv(traces)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    for t in traces:
        print(f"n={t.n:5d} period={len(t.eta):5d} (N+M)/n={(t.N + t.M) / t.n:.3f} "
              f"distance={t.distance:.4f}", file=sys.stderr)


if __name__ == "__main__":
    main()
