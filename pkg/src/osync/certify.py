"""Dual certificates for global optimality, and evaluators for the deterministic bounds.

For a candidate ``S`` the multiplier ``Lambda`` is block diagonal with

    Lambda_ii = 1/2 sum_j (S_i S_j^T A_ji + A_ij S_j S_i^T).

If ``(Lambda - A) S = 0`` and ``Lambda - A`` is PSD with exactly ``d`` zero
eigenvalues, ``S S^T`` is the unique SDP optimum and ``S`` solves the
rank-constrained problem.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .blockmat import BlockDiagonal, BlockMatrix, eigen_low, operator_norm, partial_trace
from .manifold import StiefelTuple, distance_to_sync
from .model import SyncProblem

RESIDUAL_TOL = 1e-6
GAP_TOL = 1e-8
DELTA_CVX = 4.0


class Verdict(str, enum.Enum):
    CERTIFIED = "CertifiedUniqueRankD"
    FIRST_ORDER_ONLY = "FirstOrderOnly"
    FAILED = "Failed"


class NotApplicable(ValueError):
    """The low-rank bound needs ``p >= 2d + 1``."""


def _AS(problem: SyncProblem, S: StiefelTuple) -> np.ndarray:
    if (S.n, S.d) != (problem.n, problem.d):
        raise ValueError(f"candidate has (n, d) = {(S.n, S.d)}, problem has {(problem.n, problem.d)}")
    return (problem.A.data @ S.stacked).reshape(S.blocks.shape)


def compute_lambda(problem: SyncProblem, S: StiefelTuple) -> BlockDiagonal:
    # sum_j A_ij S_j S_i^T = (AS)_i S_i^T and the other half is its transpose.
    M = _AS(problem, S) @ S.blocks.transpose(0, 2, 1)
    return BlockDiagonal(problem.n, problem.d, M)


def certificate_matrix(problem: SyncProblem, Lam: BlockDiagonal) -> BlockMatrix:
    """``C = Lambda - A``."""
    return Lam.to_block_matrix() - problem.A


def residual(problem: SyncProblem, S: StiefelTuple, Lam: BlockDiagonal | None = None) -> float:
    """``||(Lambda - A) S||_op``, computed blockwise without forming ``C``."""
    Lam = compute_lambda(problem, S) if Lam is None else Lam
    R = Lam.blocks @ S.blocks - _AS(problem, S)
    return operator_norm(R.reshape(problem.n * problem.d, S.p))


@dataclass(frozen=True)
class Certificate:
    lam: BlockDiagonal
    residual: float
    low_spectrum: np.ndarray
    verdict: Verdict
    residual_tol: float
    gap_tol: float

    @property
    def gap(self) -> float:
        """``lambda_{d+1}(Lambda - A)``."""
        return float(self.low_spectrum[-1])

    @property
    def certified(self) -> bool:
        return self.verdict is Verdict.CERTIFIED

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "residual": self.residual,
            "gap": self.gap,
            "low_spectrum": [float(v) for v in self.low_spectrum],
            "residual_tol": self.residual_tol,
            "gap_tol": self.gap_tol,
        }


def certify(problem: SyncProblem, S: StiefelTuple, residual_tol: float = RESIDUAL_TOL,
            gap_tol: float = GAP_TOL) -> Certificate:
    """Check ``(Lambda - A) S = 0`` and ``lambda_{d+1}(Lambda - A) > 0`` numerically."""
    Lam = compute_lambda(problem, S)
    res = residual(problem, S, Lam)
    low = eigen_low(certificate_matrix(problem, Lam), problem.d + 1)
    if res < residual_tol and low[-1] > gap_tol:
        verdict = Verdict.CERTIFIED
    elif res < residual_tol:
        verdict = Verdict.FIRST_ORDER_ONLY
    else:
        verdict = Verdict.FAILED
    return Certificate(Lam, res, low, verdict, residual_tol, gap_tol)


@dataclass(frozen=True)
class BoundReport:
    """Sufficient condition ``n >= quadratic + cross + alignment + noise_norm``."""

    lhs: float
    quadratic: float
    cross: float
    alignment: float
    noise_norm: float
    delta: float
    gamma: float | None = None
    rhs_terms: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "rhs_terms", (self.quadratic, self.cross, self.alignment, self.noise_norm))

    @property
    def rhs(self) -> float:
        return float(sum(self.rhs_terms))

    @property
    def margin(self) -> float:
        return self.lhs - self.rhs

    @property
    def satisfied(self) -> bool:
        return self.lhs >= self.rhs

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs_terms": {
                "quadratic": self.quadratic,
                "cross": self.cross,
                "alignment": self.alignment,
                "noise_norm": self.noise_norm,
            },
            "delta": self.delta,
            "gamma": self.gamma,
            "satisfied": self.satisfied,
            "margin": self.margin,
        }


def _check_noise(Delta: BlockMatrix) -> None:
    diag = Delta.blocks[np.arange(Delta.n), np.arange(Delta.n)]
    if np.max(np.abs(diag), initial=0.0) > 1e-12:
        raise ValueError("noise must have zero diagonal blocks")


def _bound(Delta: BlockMatrix, G: StiefelTuple, delta: float, gamma=None) -> BoundReport:
    _check_noise(Delta)
    n, d = Delta.n, Delta.d
    norm = operator_norm(Delta)
    columns = Delta.data.reshape(n * d, n, d).transpose(1, 0, 2)  # block columns, nd x d each
    col_norm = max(operator_norm(c) for c in columns)
    # Delta_i^T G = sum_j Delta_ij G_j
    DG = np.einsum("ijab,jbc->iac", Delta.blocks, G.blocks)
    align_norm = max(operator_norm(m) for m in DG)
    return BoundReport(
        lhs=float(n),
        quadratic=3 * delta ** 2 * d * norm ** 2 / (2 * n),
        cross=delta * math.sqrt(d / n) * norm * col_norm,
        alignment=align_norm,
        noise_norm=norm,
        delta=delta,
        gamma=gamma,
    )


def bound_cvx(Delta: BlockMatrix, G: StiefelTuple) -> BoundReport:
    """Tightness condition for the SDP relaxation (proximity constant 4)."""
    return _bound(Delta, G, DELTA_CVX)


def anisotropy(Delta: BlockMatrix) -> float:
    """``gamma = ||Tr_d(Delta)||_op / ||Delta||_op``, floored at 1."""
    norm = operator_norm(Delta)
    if norm == 0:
        return 1.0
    return max(operator_norm(partial_trace(Delta)) / norm, 1.0)


def delta_bm(p: int, d: int, gamma: float) -> float:
    """Proximity constant for second-order critical points of the rank-p factorization."""
    if p <= 2 * d:
        raise NotApplicable(f"bound needs p >= 2d + 1, got p={p}, d={d}")
    return (2 + math.sqrt(5)) * (p + d) * gamma / (p - 2 * d)


def bound_bm(Delta: BlockMatrix, G: StiefelTuple, p: int, d: int | None = None) -> BoundReport:
    """Benign-landscape condition for the rank-p Burer-Monteiro factorization."""
    d = Delta.d if d is None else d
    if d != Delta.d:
        raise ValueError(f"d={d} does not match noise block size {Delta.d}")
    gamma = anisotropy(Delta)
    return _bound(Delta, G, delta_bm(p, d, gamma), gamma)


def proximity_check(S: StiefelTuple, Z: StiefelTuple, Delta: BlockMatrix, delta: float,
                    atol: float = 1e-9) -> bool:
    """``d_F(S, Z) <= delta sqrt(d/n) ||Delta||_op`` (with float slack ``atol``)."""
    n, d = S.n, S.d
    return distance_to_sync(S, Z) <= delta * math.sqrt(d / n) * operator_norm(Delta) + atol
