#!/usr/bin/env python3
"""Occupation of (eps, 1 - eps) along random fiber orbits for the commuting models."""
import argparse

import numpy as np

from skewprod.fiber import arctan_model, mobius_model
from skewprod.walk import make_rng, occupation_decay


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--eps", type=float, default=0.25)
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--n", type=int, nargs="+", default=[10_000, 100_000, 1_000_000])
    ap.add_argument("--particles", type=int, default=0,
                    help="uniform particles in (eps, 1 - eps); 0 tracks the single point x0")
    ap.add_argument("--x0", type=float, default=0.5)
    args = ap.parse_args(argv)

    parts = None
    if args.particles:
        parts = make_rng(0).uniform(args.eps, 1 - args.eps, args.particles)
    for model in (mobius_model(2.0), arctan_model()):
        tab = occupation_decay(model, args.eps, args.n, args.seeds, args.x0, parts)
        print(f"# {model.kind}")
        print(tab.csv(), end="")
        frac = np.array(tab.mean_fraction)
        print(f"# ratio last/first = {frac[-1] / frac[0]:.4f}")


if __name__ == "__main__":
    main()
