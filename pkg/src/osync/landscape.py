"""First- and second-order diagnostics of ``f(S) = <A, S S^T>`` on St(d, p)^n.

Scaling note: the gradient and Hessian below are *half* the true derivatives
of ``f``; along the polar retraction ``d/dt f = 2 <grad, Y>`` and
``d^2/dt^2 f = 2 q(Y)``. Signs and zero sets are unaffected, and those are
all the optimality conditions look at.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import certify as cert
from .manifold import StiefelTuple, TangentTuple, distance_to_sync, sync_state, tangent_project
from .model import SyncProblem

TANGENT_TOL = 1e-8


def riemannian_gradient(problem: SyncProblem, S: StiefelTuple) -> TangentTuple:
    """Blockwise tangent projection of ``sum_j A_ij S_j``."""
    return TangentTuple(tangent_project(S.blocks, cert._AS(problem, S)))


def hessian_quadform(problem: SyncProblem, S: StiefelTuple, Sdot: TangentTuple,
                     lam=None) -> float:
    """``-sum_i <Lambda_ii, Y_i Y_i^T> + sum_ij <A_ij, Y_i Y_j^T>`` for tangent ``Y``."""
    if Sdot.blocks.shape != S.blocks.shape:
        raise ValueError(f"direction has shape {Sdot.blocks.shape}, base point {S.blocks.shape}")
    err = Sdot.tangency_error(S)
    if err > TANGENT_TOL * max(1.0, Sdot.norm()):
        raise ValueError(f"direction is not tangent at S (skew defect {err:.3e})")
    lam = cert.compute_lambda(problem, S) if lam is None else lam
    Y = Sdot.blocks
    local = np.einsum("iab,iac,ibc->", lam.blocks, Y, Y)
    X = Sdot.stacked
    coupled = np.sum((problem.A.data @ X) * X)
    return float(coupled - local)


def _orthogonal_complement_directions(S: StiefelTuple, rng: np.random.Generator) -> np.ndarray:
    # Phi (I_p - S_i^T S_i) with one Gaussian Phi shared by all blocks.
    Phi = rng.standard_normal((S.d, S.p))
    P = np.eye(S.p) - S.blocks.transpose(0, 2, 1) @ S.blocks
    return Phi @ P


@dataclass(frozen=True)
class SocpReport:
    grad_norm: float
    max_hessian_quadform: float
    num_directions: int
    lambda_min_blocks: np.ndarray
    grad_tol: float
    quad_tol: float
    lambda_tol: float = 1e-6

    @property
    def is_socp_numerically(self) -> bool:
        return (
            self.grad_norm < self.grad_tol
            and self.max_hessian_quadform <= self.quad_tol
            and float(np.min(self.lambda_min_blocks)) >= 1 - self.lambda_tol
        )

    def to_dict(self) -> dict:
        return {
            "grad_norm": self.grad_norm,
            "max_hessian_quadform": self.max_hessian_quadform,
            "num_directions": self.num_directions,
            "min_lambda_min": float(np.min(self.lambda_min_blocks)),
            "is_socp_numerically": self.is_socp_numerically,
        }


def sample_socp_test(problem: SyncProblem, S: StiefelTuple, num_directions: int = 100,
                     seed=0, grad_tol: float = 1e-5, quad_tol: float = 1e-8) -> SocpReport:
    """Sampled second-order check at ``S``.

    Directions are unit-norm Gaussian tangent vectors plus, when ``p > d``, the
    family ``Phi (I - S_i^T S_i)``. ``lambda_min(Lambda_ii)`` is reported per block.
    """
    rng = np.random.default_rng(seed)
    lam = cert.compute_lambda(problem, S)
    grad = riemannian_gradient(problem, S)
    best = -math.inf
    count = 0
    for _ in range(num_directions):
        candidates = [tangent_project(S.blocks, rng.standard_normal(S.blocks.shape))]
        if S.p > S.d:
            candidates.append(_orthogonal_complement_directions(S, rng))
        for Y in candidates:
            norm = np.linalg.norm(Y)
            if norm == 0:
                continue
            best = max(best, hessian_quadform(problem, S, TangentTuple(Y / norm), lam))
            count += 1
    return SocpReport(
        grad_norm=grad.norm(),
        max_hessian_quadform=best,
        num_directions=count,
        lambda_min_blocks=lam.min_eigenvalues(),
        grad_tol=grad_tol,
        quad_tol=quad_tol,
    )


@dataclass(frozen=True)
class AuditReport:
    """Both sides of the second-order and first-order inequalities at a critical point."""

    second_order_lhs: float
    second_order_rhs: float
    first_order_lhs: float
    first_order_rhs: float
    distance: float
    proximity_rhs: float | None

    @property
    def second_order_margin(self) -> float:
        return self.second_order_lhs - self.second_order_rhs

    @property
    def first_order_margin(self) -> float:
        return self.first_order_lhs - self.first_order_rhs

    @property
    def proximity_margin(self) -> float | None:
        return None if self.proximity_rhs is None else self.proximity_rhs - self.distance

    def to_dict(self) -> dict:
        return {
            "second_order_margin": self.second_order_margin,
            "first_order_margin": self.first_order_margin,
            "distance": self.distance,
            "proximity_rhs": self.proximity_rhs,
            "proximity_margin": self.proximity_margin,
        }


def bm_inequality_audit(problem: SyncProblem, S: StiefelTuple, critical_tol: float = 1e-8) -> AuditReport:
    """Evaluate the alignment inequalities every (second-order) critical point obeys.

    second order: (p-d)||Z^T S||_F^2 >= (p-2d) n^2 d + d ||S S^T||_F^2
                   + sum_ij (||S_i S_j^T||_F^2 - d) Tr(Delta_ij) + (p-d) <Delta, Z Z^T - S S^T>
    first order:  ||S S^T||_F^2 >= ||Z^T S||_F^2 - ||Delta S||_F^2 / n

    When ``p >= 2d + 1`` the distance bound for the rank-p factorization is
    evaluated as well.
    """
    if not problem.is_canonical:
        raise ValueError("audit needs a canonical problem (ground truth Z)")
    res = cert.residual(problem, S)
    if not res < critical_tol:
        raise ValueError(f"S is not a critical point: residual {res:.3e} >= {critical_tol:.1e}")
    n, d, p = S.n, S.d, S.p
    Delta = problem.noise()
    X = S.stacked
    gram = X @ X.T
    ZtS = S.block_sum()
    zts2 = float(np.sum(ZtS ** 2))
    gram2 = float(np.sum(gram ** 2))
    pair_norms = np.sum(gram.reshape(n, d, n, d) ** 2, axis=(1, 3))
    traces = np.trace(Delta.blocks, axis1=2, axis2=3)
    ZZt = sync_state(n, d).gram()
    second_rhs = ((p - 2 * d) * n * n * d + d * gram2 + float(np.sum((pair_norms - d) * traces))
                  + (p - d) * float(np.sum(Delta.data * (ZZt - gram))))
    DS = Delta.data @ X
    Z = sync_state(n, d)
    prox = None
    if p > 2 * d:
        delta = cert.delta_bm(p, d, cert.anisotropy(Delta))
        prox = delta * math.sqrt(d / n) * cert.operator_norm(Delta)
    return AuditReport(
        second_order_lhs=(p - d) * zts2,
        second_order_rhs=second_rhs,
        first_order_lhs=gram2,
        first_order_rhs=zts2 - float(np.sum(DS ** 2)) / n,
        distance=distance_to_sync(S, Z),
        proximity_rhs=prox,
    )
