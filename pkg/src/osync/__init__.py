"""Orthogonal group synchronization by projected power iteration with dual certificates."""
from .blockmat import BlockDiagonal, BlockMatrix, eigen_low, hadamard_with_gram, operator_norm, partial_trace
from .certify import Certificate, Verdict, bound_bm, bound_cvx, compute_lambda, proximity_check
from .manifold import (
    RankDeficient,
    StiefelTuple,
    TangentTuple,
    align,
    distance_to_sync,
    polar_project,
    random_stiefel,
    sync_state,
    tangent_project,
)
from .model import SyncProblem, generate_gaussian, objective, reduce_to_canonical, sigma_from_kappa
from .solver import SolverConfig, SolveTrace, Termination, power_step, solve

__version__ = "0.1.0"
