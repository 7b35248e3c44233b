"""Phase-transition harness: success rate of certification over a (kappa, n) grid."""
from __future__ import annotations

import csv
import enum
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import generate_gaussian, make_rng, sigma_from_kappa
from .solver import Init, SolverConfig, Termination, solve

FULL_KAPPAS = tuple(round(0.05 * k, 2) for k in range(13))
FULL_NS = tuple(range(100, 1001, 100))
DESK_KAPPAS = (0.0, 0.2, 0.35, 0.5)
DESK_NS = (100, 200)


class Regime(str, enum.Enum):
    SDP = "sdp"
    BM = "bm"


@dataclass
class ExperimentGrid:
    kappa_values: tuple = DESK_KAPPAS
    n_values: tuple = DESK_NS
    d: int = 3
    p: int | None = None
    trials: int = 10
    regime: Regime = Regime.SDP
    seed: int = 0
    max_iters: int = 500

    def __post_init__(self):
        self.regime = Regime(self.regime)
        self.kappa_values = tuple(float(k) for k in self.kappa_values)
        self.n_values = tuple(int(n) for n in self.n_values)
        if any(k < 0 for k in self.kappa_values):
            raise ValueError("kappa values must be >= 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.p is None:
            self.p = self.d if self.regime is Regime.SDP else 2 * self.d
        if self.p < self.d:
            raise ValueError(f"need p >= d, got p={self.p}, d={self.d}")

    @classmethod
    def full(cls, d: int = 3, regime: Regime = Regime.SDP, **kw) -> "ExperimentGrid":
        return cls(FULL_KAPPAS, FULL_NS, d=d, trials=20, regime=regime, **kw)

    def cells(self):
        for ki, kappa in enumerate(self.kappa_values):
            for n in self.n_values:
                yield ki, kappa, n


@dataclass
class CellResult:
    kappa: float
    n: int
    successes: int
    trials: int
    timeouts: int = 0
    mean_iters: float = 0.0
    mean_seconds: float = 0.0
    terminations: dict = field(default_factory=dict)

    @property
    def fraction(self) -> float:
        return self.successes / self.trials


def run_trial(grid: ExperimentGrid, kappa_index: int, kappa: float, n: int, trial: int):
    """One instance of one cell; returns ``(termination, iterations, seconds)``."""
    rng = make_rng(grid.seed, n, grid.d, kappa_index, trial)
    start = time.perf_counter()
    problem = generate_gaussian(n, grid.d, sigma_from_kappa(kappa, n, grid.d), rng)
    init = Init.GROUND_TRUTH if grid.regime is Regime.SDP else Init.RANDOM
    config = SolverConfig(max_iters=grid.max_iters, p=grid.p, init=init, seed=rng)
    _, trace = solve(problem, config)
    return trace.termination, trace.iterations, time.perf_counter() - start


def run_cell(grid: ExperimentGrid, kappa_index: int, kappa: float, n: int) -> CellResult:
    outcomes = [run_trial(grid, kappa_index, kappa, n, t) for t in range(grid.trials)]
    terms = [o[0] for o in outcomes]
    counts = {t.value: terms.count(t) for t in Termination if terms.count(t)}
    return CellResult(
        kappa=kappa,
        n=n,
        successes=terms.count(Termination.CERTIFIED),
        trials=grid.trials,
        timeouts=terms.count(Termination.MAX_ITERS),
        mean_iters=float(np.mean([o[1] for o in outcomes])),
        mean_seconds=float(np.mean([o[2] for o in outcomes])),
        terminations=counts,
    )


def _run_cell_args(args):
    return run_cell(*args)


def run_phase_transition(grid: ExperimentGrid, out_dir=None, threads: int = 1,
                         progress=None) -> list[CellResult]:
    """Run every cell of the grid; optionally write the CSV artifacts to ``out_dir``.

    Cells are independent (each trial has its own RNG stream), so they may be
    spread over ``threads`` worker processes without changing any result.
    """
    jobs = [(grid, ki, kappa, n) for ki, kappa, n in grid.cells()]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_cell_args, jobs))
    else:
        results = []
        for job in jobs:
            results.append(run_cell(*job))
            if progress is not None:
                progress(results[-1])
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        write_results(results, out_dir / "phase_transition.csv")
        write_timings(results, out_dir / "timings.csv")
        emit_heatmap(results, out_dir / "heatmap.csv", out_dir / "heatmap.pgm")
    return results


def _fmt(x: float) -> str:
    return format(float(x), ".6g")


RESULT_COLUMNS = ("kappa", "n", "successes", "trials", "timeouts", "mean_iters")


def write_results(results, path) -> Path:
    """Deterministic per-cell counts (no wall-clock values)."""
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(RESULT_COLUMNS)
            for r in results:
                writer.writerow([_fmt(r.kappa), r.n, r.successes, r.trials, r.timeouts, _fmt(r.mean_iters)])
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def write_timings(results, path) -> Path:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(("kappa", "n", "mean_seconds"))
            for r in results:
                writer.writerow([_fmt(r.kappa), r.n, format(r.mean_seconds, ".4f")])
    except OSError as exc:
        raise OSError(f"cannot write timings to {path}: {exc}") from exc
    return path


def success_matrix(results) -> tuple[list, list, np.ndarray]:
    """Success fractions with rows ordered by kappa descending and columns by n ascending."""
    if not results:
        raise ValueError("no results to summarize")
    kappas = sorted({r.kappa for r in results}, reverse=True)
    ns = sorted({r.n for r in results})
    M = np.full((len(kappas), len(ns)), np.nan)
    for r in results:
        M[kappas.index(r.kappa), ns.index(r.n)] = r.fraction
    return kappas, ns, M


def emit_heatmap(results, path, pgm_path=None) -> Path:
    """Write the success-fraction matrix as CSV and, optionally, a plain (P2) graymap."""
    kappas, ns, M = success_matrix(results)
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["kappa\\n", *ns])
            for k, row in zip(kappas, M):
                writer.writerow([_fmt(k), *(format(v, ".4f") for v in row)])
        if pgm_path is not None:
            levels = np.rint(np.nan_to_num(M) * 255).astype(int)
            lines = ["P2", f"{len(ns)} {len(kappas)}", "255"]
            lines += [" ".join(str(v) for v in row) for row in levels]
            Path(pgm_path).write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write heatmap to {exc.filename or path}: {exc}") from exc
    return path
