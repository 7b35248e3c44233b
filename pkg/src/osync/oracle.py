"""Brute-force references for small instances, independent of the solver path."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .manifold import StiefelTuple
from .model import SyncProblem

MAX_ENUM_N = 20
_CHUNK = 1 << 14


@dataclass(frozen=True)
class EnumResult:
    signs: np.ndarray
    best: float
    second_best: float
    ties: bool


def _sign_vectors(start: int, stop: int, n: int) -> np.ndarray:
    # Bit k of the code flips element k + 1; element 0 stays +1 (global sign quotiented out).
    codes = np.arange(start, stop, dtype=np.int64)
    bits = (codes[:, None] >> np.arange(n - 1)) & 1
    signs = np.ones((codes.size, n))
    signs[:, 1:] = 1 - 2 * bits
    return signs


def brute_force_z2(problem: SyncProblem, tie_tol: float = 1e-9) -> EnumResult:
    """Exhaustive maximizer of ``s^T A s`` over ``s in {+1, -1}^n`` with ``s_1 = +1``."""
    if problem.d != 1:
        raise ValueError(f"enumeration only exists for d = 1, got d = {problem.d}")
    n = problem.n
    if n > MAX_ENUM_N:
        raise ValueError(f"n = {n} exceeds enumeration limit {MAX_ENUM_N}")
    A = problem.A.data
    total = 1 << (n - 1)
    best, second, best_code, n_best = -math.inf, -math.inf, 0, 0
    for start in range(0, total, _CHUNK):
        stop = min(start + _CHUNK, total)
        s = _sign_vectors(start, stop, n)
        vals = np.einsum("ki,ij,kj->k", s, A, s)
        for k in np.argsort(-vals, kind="stable")[:2]:
            v = float(vals[k])
            if v > best + tie_tol:
                second, best, best_code, n_best = best, v, start + int(k), 1
            elif v >= best - tie_tol:
                n_best += 1
                second = max(second, v)
            else:
                second = max(second, v)
    signs = _sign_vectors(best_code, best_code + 1, n)[0]
    return EnumResult(signs=signs, best=best, second_best=second, ties=n_best > 1)


def jacobi_singular_values(M: np.ndarray, tol: float = 1e-15, max_sweeps: int = 100) -> np.ndarray:
    """Singular values by one-sided (Hestenes) Jacobi rotations, descending."""
    W = np.array(M, dtype=float).T.copy()  # orthogonalize the columns of M^T
    k = W.shape[1]
    for _ in range(max_sweeps):
        rotated = False
        for a in range(k - 1):
            for b in range(a + 1, k):
                alpha = W[:, a] @ W[:, a]
                beta = W[:, b] @ W[:, b]
                gamma = W[:, a] @ W[:, b]
                if abs(gamma) <= tol * math.sqrt(alpha * beta) or gamma == 0.0:
                    continue
                rotated = True
                # tan of the rotation angle, written to avoid overflow when gamma is tiny
                diff = float(beta - alpha)
                t = math.copysign(2 * abs(gamma), diff * gamma) / (abs(diff) + math.hypot(diff, 2 * gamma))
                c = 1 / math.sqrt(1 + t * t)
                s = c * t
                wa = W[:, a].copy()
                W[:, a] = c * wa - s * W[:, b]
                W[:, b] = s * wa + c * W[:, b]
        if not rotated:
            break
    return np.sort(np.sqrt(np.sum(W * W, axis=0)))[::-1]


def brute_force_nuclear_distance(S: StiefelTuple, Z: StiefelTuple | None = None) -> float:
    """Distance to the synchronized state via ``sqrt(2 (nd - ||Z^T S||_*))``."""
    n, d = S.n, S.d
    ZtS = S.blocks.sum(axis=0)
    nuclear = float(np.sum(jacobi_singular_values(ZtS)))
    return math.sqrt(max(2 * (n * d - nuclear), 0.0))
