"""Where the sufficient conditions for tightness kick in, compared with what the solver certifies.

For each (n, sigma) the script reports how often the SDP bound (proximity constant 4)
and the low-rank bound (p = 2d + 1) hold on sampled noise, next to the fraction of
instances the power method actually certifies. The bounds are far more conservative
than the observed behaviour.
"""
import argparse

from osync.certify import bound_bm, bound_cvx
from osync.model import generate_gaussian, make_rng
from osync.solver import Termination, solve


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--d", type=int, default=3)
    parser.add_argument("--ns", default="100,300,500")
    parser.add_argument("--sigmas", default="0.02,0.05,0.1,0.2,0.5,1.0")
    parser.add_argument("--trials", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    d = args.d
    print(f"{'n':>5} {'sigma':>6} {'sdp bound':>10} {'bm bound':>9} {'certified':>10}")
    for n in (int(x) for x in args.ns.split(",")):
        for si, sigma in enumerate(float(x) for x in args.sigmas.split(",")):
            cvx = bm = cert = 0
            for t in range(args.trials):
                P = generate_gaussian(n, d, sigma, make_rng(args.seed, n, si, t))
                Delta, G = P.noise(), P.ground_truth
                cvx += bound_cvx(Delta, G).satisfied
                bm += bound_bm(Delta, G, 2 * d + 1).satisfied
                cert += solve(P)[1].termination is Termination.CERTIFIED
            k = args.trials
            print(f"{n:5d} {sigma:6.2f} {cvx:>7d}/{k} {bm:>6d}/{k} {cert:>7d}/{k}")


if __name__ == "__main__":
    main()
