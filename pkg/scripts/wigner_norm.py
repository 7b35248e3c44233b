"""Operator norm of the symmetric block Gaussian noise against 2 sqrt(nd) as nd grows."""
import argparse
import math

import numpy as np

from osync.blockmat import operator_norm
from osync.model import generate_gaussian


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=int, default=3)
    parser.add_argument("--ns", default="50,100,200,500,1000")
    parser.add_argument("--samples", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    print(f"{'n':>6} {'nd':>6} {'mean ratio':>11} {'min':>7} {'max':>7}")
    for n in (int(x) for x in args.ns.split(",")):
        ratios = np.array([
            operator_norm(generate_gaussian(n, args.d, 1.0, seed=args.seed + s).noise())
            / (2 * math.sqrt(n * args.d))
            for s in range(args.samples)
        ])
        print(f"{n:6d} {n * args.d:6d} {ratios.mean():11.4f} {ratios.min():7.4f} {ratios.max():7.4f}")


if __name__ == "__main__":
    main()
