"""Success-rate heatmaps for the SDP (p = d, truth-initialized) and low-rank (p = 2d, random start) regimes.

    python3 scripts/run_phase_transition.py --out results --threads 4          # desk grid
    python3 scripts/run_phase_transition.py --out results --threads 4 --full   # 13 x 10 grid, 20 trials

The full grid runs 2 x 2600 solves with up to 500 iterations each at n up to 1000; expect hours on one core.
"""
import argparse
import sys
import time
from pathlib import Path

from osync.experiment import ExperimentGrid, Regime, run_phase_transition, success_matrix


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", default="results")
    parser.add_argument("--d", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--full", action="store_true")
    parser.add_argument("--regimes", default="sdp,bm")
    args = parser.parse_args(argv)

    for name in args.regimes.split(","):
        regime = Regime(name)
        if args.full:
            grid = ExperimentGrid.full(d=args.d, regime=regime, seed=args.seed)
        else:
            grid = ExperimentGrid(d=args.d, regime=regime, seed=args.seed)
        out = Path(args.out) / regime.value
        start = time.perf_counter()
        results = run_phase_transition(
            grid, out, threads=args.threads,
            progress=lambda c: print(f"  {regime.value} kappa={c.kappa:g} n={c.n}: "
                                     f"{c.successes}/{c.trials} ({c.timeouts} timeouts)", file=sys.stderr))
        kappas, ns, M = success_matrix(results)
        print(f"{regime.value} (p={grid.p}) in {time.perf_counter() - start:.0f}s -> {out}")
        print("kappa\\n " + " ".join(f"{n:>6d}" for n in ns))
        for k, row in zip(kappas, M):
            print(f"{k:7.2f} " + " ".join(f"{v:6.2f}" for v in row))


if __name__ == "__main__":
    main()
