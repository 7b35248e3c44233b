"""Command-line entry point: ``osync {generate,solve,certify,landscape-check,phase-transition}``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from pathlib import Path

from . import certify as cert
from .experiment import ExperimentGrid, Regime, run_phase_transition
from .landscape import bm_inequality_audit, sample_socp_test
from .manifold import distance_to_sync, read_tuple_csv, sync_state, write_tuple_csv
from .model import generate_gaussian, load_problem, objective, save_problem, sigma_from_kappa
from .solver import Init, SolverConfig, solve


def _dump(record: dict) -> None:
    print(json.dumps(record, indent=2, sort_keys=True, default=float))


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _instance_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--d", type=int, default=3)
    noise = p.add_mutually_exclusive_group()
    noise.add_argument("--sigma", type=float, help="raw noise level")
    noise.add_argument("--kappa", type=float, help="noise level as sigma = kappa * sqrt(n / d)")


def _sigma(args) -> float:
    if args.sigma is not None:
        return args.sigma
    if args.kappa is not None:
        return sigma_from_kappa(args.kappa, args.n, args.d)
    return 0.0


def _out_dir(args) -> Path:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_generate(args) -> int:
    problem = generate_gaussian(args.n, args.d, _sigma(args), args.seed)
    csv_path, meta_path = save_problem(problem, _out_dir(args) / args.name)
    _dump({"problem": str(csv_path), "metadata": str(meta_path), **problem.metadata()})
    return 0


def cmd_solve(args) -> int:
    if args.problem:
        problem = load_problem(args.problem)
    else:
        problem = generate_gaussian(args.n, args.d, _sigma(args), args.seed)
    config = SolverConfig(
        max_iters=args.max_iters,
        residual_tol=args.residual_tol,
        gap_tol=args.gap_tol,
        fixed_point_tol=args.fixed_point_tol,
        p=args.p,
        init=Init(args.init),
        seed=args.seed,
    )
    start = time.perf_counter()
    S, trace = solve(problem, config)
    elapsed = time.perf_counter() - start
    certificate = cert.certify(problem, S, args.residual_tol, args.gap_tol)
    record = {
        "n": problem.n,
        "d": problem.d,
        "p": S.p,
        "sigma": problem.sigma,
        "seed": args.seed,
        "init": config.init.value,
        "termination": trace.termination.value,
        "iterations": trace.iterations,
        "objective": objective(problem, S),
        "certificate": certificate.to_dict(),
        "seconds": elapsed,
    }
    if problem.is_canonical:
        record["distance_to_truth"] = distance_to_sync(S, sync_state(problem.n, problem.d))
    if args.out_dir:
        out = _out_dir(args)
        write_tuple_csv(S, out / "solution.csv")
        record["solution"] = str(out / "solution.csv")
    if args.trace:
        with Path(args.trace).open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("iter", "objective", "residual"))
            for t, f, r in trace.rows():
                writer.writerow((t, repr(f), repr(r)))
    _dump(record)
    return 0


def cmd_certify(args) -> int:
    problem = load_problem(args.problem)
    S = read_tuple_csv(args.candidate)
    certificate = cert.certify(problem, S, args.residual_tol, args.gap_tol)
    record = {"certificate": certificate.to_dict(), "objective": objective(problem, S)}
    Delta, G = problem.noise(), problem.ground_truth
    record["bound_cvx"] = cert.bound_cvx(Delta, G).to_dict()
    p_bm = args.bm_p if args.bm_p else max(S.p, 2 * problem.d + 1)
    try:
        record["bound_bm"] = cert.bound_bm(Delta, G, p_bm).to_dict()
    except cert.NotApplicable as exc:
        record["bound_bm"] = {"not_applicable": str(exc)}
    _dump(record)
    return 0 if certificate.certified else 1


def cmd_landscape(args) -> int:
    problem = load_problem(args.problem)
    S = read_tuple_csv(args.candidate)
    report = sample_socp_test(problem, S, args.directions, args.seed)
    record = {"socp": report.to_dict()}
    try:
        record["audit"] = bm_inequality_audit(problem, S, args.critical_tol).to_dict()
    except ValueError as exc:
        record["audit"] = {"error": str(exc)}
    _dump(record)
    return 0


def cmd_phase_transition(args) -> int:
    regime = Regime(args.regime)
    common = dict(d=args.d, p=args.p, regime=regime, seed=args.seed, max_iters=args.max_iters)
    if args.full:
        grid = ExperimentGrid.full(**common)
    else:
        grid = ExperimentGrid(
            kappa_values=tuple(args.kappas), n_values=tuple(args.ns), trials=args.trials, **common)

    def progress(cell):
        print(f"kappa={cell.kappa:g} n={cell.n}: {cell.successes}/{cell.trials}", file=sys.stderr)

    results = run_phase_transition(grid, _out_dir(args), threads=args.threads,
                                   progress=None if args.quiet else progress)
    _dump({
        "out_dir": str(args.out_dir),
        "cells": [
            {"kappa": r.kappa, "n": r.n, "successes": r.successes, "trials": r.trials,
             "timeouts": r.timeouts}
            for r in results
        ],
    })
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out-dir", default=None)

    tolerances = argparse.ArgumentParser(add_help=False)
    tolerances.add_argument("--residual-tol", type=float, default=cert.RESIDUAL_TOL)
    tolerances.add_argument("--gap-tol", type=float, default=cert.GAP_TOL)

    parser = argparse.ArgumentParser(prog="osync", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", parents=[common], help="sample a Gaussian instance")
    _instance_args(p)
    p.add_argument("--name", default="problem.csv")
    p.set_defaults(func=cmd_generate, out_dir_default=".")

    p = sub.add_parser("solve", parents=[common, tolerances], help="run the projected power method")
    _instance_args(p)
    p.add_argument("--problem", help="problem CSV written by `generate` (overrides --n/--d/--sigma)")
    p.add_argument("--p", type=int, default=None, help="factorization rank (default d)")
    p.add_argument("--init", choices=[Init.GROUND_TRUTH.value, Init.RANDOM.value],
                   default=Init.GROUND_TRUTH.value)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--fixed-point-tol", type=float, default=1e-10,
                   help="stop when the RMS change per entry drops below this; "
                        "lower it together with --residual-tol")
    p.add_argument("--trace", help="write per-iteration CSV (iter, objective, residual)")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("certify", parents=[common, tolerances], help="check a candidate's dual certificate")
    p.add_argument("--problem", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--bm-p", type=int, default=None, help="rank used for the low-rank bound")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("landscape-check", parents=[common], help="sampled second-order test and audit")
    p.add_argument("--problem", required=True)
    p.add_argument("--candidate", required=True)
    p.add_argument("--directions", type=int, default=100)
    p.add_argument("--critical-tol", type=float, default=1e-8)
    p.set_defaults(func=cmd_landscape)

    p = sub.add_parser("phase-transition", parents=[common], help="success rate over a (kappa, n) grid")
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--regime", choices=[r.value for r in Regime], default=Regime.SDP.value)
    p.add_argument("--p", type=int, default=None, help="rank (default d for sdp, 2d for bm)")
    p.add_argument("--kappas", type=_floats, default=[0.0, 0.2, 0.35, 0.5])
    p.add_argument("--ns", type=_ints, default=[100, 200])
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--full", action="store_true",
                   help="full grid: kappa 0..0.6 step 0.05, n 100..1000 step 100, 20 trials")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_phase_transition, out_dir_default="phase_transition")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.out_dir is None:
        args.out_dir = getattr(args, "out_dir_default", None)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
