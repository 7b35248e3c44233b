"""Generalized projected power method ``S_i <- P(sum_j A_ij S_j)``.

Two regimes share the same iteration: the SDP-candidate run (``p = d``,
started at the ground truth) and the Burer-Monteiro run (``p > d``, random
start). Every iterate is checked against the dual certificate.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import certify as cert
from .blockmat import eigen_low
from .manifold import RANK_RTOL, RankDeficient, StiefelTuple, polar_batch, random_stiefel
from .model import SyncProblem, objective

JITTER_SCALE = 1e-8
# Above this side length the eigen-gap is only evaluated every GAP_EVERY iterations.
GAP_EVERY_LIMIT = 600
GAP_EVERY = 10


class Init(str, enum.Enum):
    GROUND_TRUTH = "ground-truth"
    RANDOM = "random"
    GIVEN = "given"


class Termination(str, enum.Enum):
    CERTIFIED = "CertifiedStop"
    FIXED_POINT = "FixedPoint"
    MAX_ITERS = "MaxIters"
    ABORTED = "AbortedRankDeficient"


@dataclass
class SolverConfig:
    max_iters: int = 500
    residual_tol: float = cert.RESIDUAL_TOL
    gap_tol: float = cert.GAP_TOL
    fixed_point_tol: float = 1e-10
    p: int | None = None
    init: Init = Init.GROUND_TRUTH
    seed: int | np.random.Generator | None = 0
    start: StiefelTuple | None = None

    def __post_init__(self):
        self.init = Init(self.init)
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if min(self.residual_tol, self.gap_tol, self.fixed_point_tol) <= 0:
            raise ValueError("tolerances must be positive")
        if self.init is Init.GIVEN and self.start is None:
            raise ValueError("init=given needs a start tuple")


@dataclass
class SolveTrace:
    objectives: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    iterations: int = 0
    termination: Termination = Termination.MAX_ITERS
    gap: float = float("nan")

    def rows(self):
        for t, (f, r) in enumerate(zip(self.objectives, self.residuals), start=1):
            yield t, f, r


def power_step(problem: SyncProblem, S: StiefelTuple, jitter_rng=None) -> StiefelTuple:
    """One simultaneous update of every block from the previous iterate.

    If some ``sum_j A_ij S_j`` is rank deficient and ``jitter_rng`` is given,
    those blocks are perturbed once by ``1e-8`` Gaussian noise and projected
    again; otherwise (or if that fails too) :class:`RankDeficient` is raised.
    """
    M = cert._AS(problem, S)
    factors, ratios = polar_batch(M)
    bad = np.flatnonzero(~(ratios > RANK_RTOL))
    if bad.size and jitter_rng is not None:
        scale = JITTER_SCALE * max(np.abs(M[bad]).max(), 1.0)
        retry, retry_ratios = polar_batch(M[bad] + scale * jitter_rng.standard_normal(M[bad].shape))
        factors[bad] = retry
        ratios[bad] = retry_ratios
        bad = np.flatnonzero(~(ratios > RANK_RTOL))
    if bad.size:
        raise RankDeficient(ratios[bad[0]], int(bad[0]))
    return StiefelTuple(factors, check=False)


def check_fixed_point(problem: SyncProblem, S: StiefelTuple) -> float:
    """First-order residual ``||(Lambda - A) S||_op``; zero exactly at critical points."""
    return cert.residual(problem, S)


def initial_point(problem: SyncProblem, config: SolverConfig) -> StiefelTuple:
    n, d = problem.n, problem.d
    p = config.p or d
    if config.init is Init.GROUND_TRUTH:
        if problem.ground_truth is None:
            raise ValueError("init=ground-truth needs a problem with ground truth")
        return StiefelTuple(np.concatenate(
            [problem.ground_truth.blocks, np.zeros((n, d, p - d))], axis=2))
    if config.init is Init.RANDOM:
        return random_stiefel(n, d, p, config.seed)
    start = config.start
    if (start.n, start.d, start.p) != (n, d, p):
        raise ValueError(f"start tuple has shape {(start.n, start.d, start.p)}, expected {(n, d, p)}")
    return start


def solve(problem: SyncProblem, config: SolverConfig | None = None) -> tuple[StiefelTuple, SolveTrace]:
    """Iterate :func:`power_step` until certified, stalled, or out of iterations."""
    config = SolverConfig() if config is None else config
    S = initial_point(problem, config)
    trace = SolveTrace()
    jitter_rng = np.random.default_rng(
        config.seed if isinstance(config.seed, (int, np.integer)) else 0)
    n, d = problem.n, problem.d
    gap_stride = 1 if n * d <= GAP_EVERY_LIMIT else GAP_EVERY
    for t in range(1, config.max_iters + 1):
        try:
            S_next = power_step(problem, S, jitter_rng)
        except RankDeficient:
            trace.termination = Termination.ABORTED
            return S, trace
        step = np.linalg.norm(S_next.blocks - S.blocks) / math.sqrt(n * d)
        S = S_next
        Lam = cert.compute_lambda(problem, S)
        res = cert.residual(problem, S, Lam)
        trace.objectives.append(objective(problem, S))
        trace.residuals.append(res)
        trace.iterations = t
        stalled = step < config.fixed_point_tol
        # The eigen-gap is the expensive part; it only matters once the residual passes.
        if res < config.residual_tol and (t % gap_stride == 0 or stalled or t == config.max_iters):
            trace.gap = float(eigen_low(cert.certificate_matrix(problem, Lam), d + 1)[-1])
            if trace.gap > config.gap_tol:
                trace.termination = Termination.CERTIFIED
                return S, trace
        if stalled:
            trace.termination = Termination.FIXED_POINT
            return S, trace
    trace.termination = Termination.MAX_ITERS
    return S, trace

