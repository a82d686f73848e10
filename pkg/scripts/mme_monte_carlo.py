#!/usr/bin/env python3
"""Finite-time exponent along Parry-random exposed orbits versus the endpoint formula."""
import argparse

from skewprod.dynamics import SkewSystem, mme_monte_carlo
from skewprod.fiber import mobius_model, pld_model


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args(argv)
    for model in (pld_model(), mobius_model(2.0), mobius_model(3.0)):
        errs = []
        for seed in range(args.seeds):
            r = mme_monte_carlo(SkewSystem(model), args.samples, seed)
            errs.append(r.estimate - r.formula)
        print(f"{model.kind:7s} {model.params.get('beta', '')!s:5s} formula {r.formula:+.6f}  "
              f"errors {' '.join(f'{e:+.4f}' for e in errs)}")


if __name__ == "__main__":
    main()
