#!/usr/bin/env python3
"""Hyperbolic periodic orbits synthesised near a grid of points, both classes, as CSV."""
import argparse
import csv
import sys

import numpy as np

from skewprod.dynamics import SkewSystem
from skewprod.errors import NotFound
from skewprod.fiber import pld_model
from skewprod.itinerary import contracting_periodic_near, expanding_periodic_near


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--points", type=int, default=9)
    ap.add_argument("--radius", type=float, default=0.01)
    args = ap.parse_args(argv)

    sysm = SkewSystem(pld_model())
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["p", "class", "period", "x", "chi", "distance", "residual", "method"])
    for p in np.linspace(0.05, 0.95, args.points):
        for fn in (expanding_periodic_near, contracting_periodic_near):
            try:
                s = fn(sysm, float(p), args.radius)
            except NotFound as exc:
                print(f"# p={p:.3f}: {exc}", file=sys.stderr)
                continue
            o = s.orbit
            w.writerow([f"{p:.4f}", o.klass, o.period, repr(o.x), repr(o.chi), repr(s.distance),
                        repr(o.residual), s.method])


if __name__ == "__main__":
    main()
