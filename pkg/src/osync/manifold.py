"""Points and tangent vectors on the product of Stiefel manifolds St(d, p)^n.

Row convention throughout: a Stiefel point is a ``d x p`` matrix with
orthonormal rows, ``S_i S_i^T = I_d``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

STIEFEL_TOL = 1e-10
RANK_RTOL = 1e-12


class RankDeficient(ValueError):
    """Polar projection of a matrix without full row rank."""

    def __init__(self, ratio: float, index: int | None = None):
        self.ratio = float(ratio)
        self.index = index
        where = "" if index is None else f" (block {index})"
        super().__init__(f"matrix is rank deficient{where}: sigma_d/sigma_1 = {self.ratio:.3e}")


@dataclass(frozen=True, eq=False)
class StiefelTuple:
    """``n`` stacked ``d x p`` partial-orthogonal blocks."""

    blocks: np.ndarray
    check: bool = True

    def __post_init__(self):
        blocks = np.array(self.blocks, dtype=float)
        if blocks.ndim != 3:
            raise ValueError(f"blocks must have shape (n, d, p), got {blocks.shape}")
        _, d, p = blocks.shape
        if p < d:
            raise ValueError(f"need p >= d, got d={d}, p={p}")
        if self.check:
            err = orthonormality_error(blocks)
            if err > STIEFEL_TOL:
                raise ValueError(f"blocks are not on St({d},{p}): max ||S_i S_i^T - I||_F = {err:.3e}")
        blocks.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    @property
    def n(self) -> int:
        return self.blocks.shape[0]

    @property
    def d(self) -> int:
        return self.blocks.shape[1]

    @property
    def p(self) -> int:
        return self.blocks.shape[2]

    @property
    def stacked(self) -> np.ndarray:
        """The ``nd x p`` matrix ``S`` with ``S_i`` as its i-th row block."""
        return self.blocks.reshape(self.n * self.d, self.p)

    def block_sum(self) -> np.ndarray:
        """``Z^T S``, the sum of all blocks."""
        return self.blocks.sum(axis=0)

    def gram(self) -> np.ndarray:
        """``S S^T`` as a dense ``nd x nd`` array."""
        X = self.stacked
        return X @ X.T

    def right_multiply(self, Q: np.ndarray) -> "StiefelTuple":
        return StiefelTuple(self.blocks @ np.asarray(Q, dtype=float))


@dataclass(frozen=True, eq=False)
class TangentTuple:
    """Tangent vector at a Stiefel tuple: ``n`` blocks ``Y_i`` with ``S_i Y_i^T`` skew."""

    blocks: np.ndarray

    def __post_init__(self):
        blocks = np.array(self.blocks, dtype=float)
        blocks.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    @property
    def stacked(self) -> np.ndarray:
        n, d, p = self.blocks.shape
        return self.blocks.reshape(n * d, p)

    def norm(self) -> float:
        return float(np.linalg.norm(self.blocks))

    def tangency_error(self, base: StiefelTuple) -> float:
        """Largest ``||S_i Y_i^T + Y_i S_i^T||_F`` over blocks."""
        M = base.blocks @ self.blocks.transpose(0, 2, 1)
        return float(np.max(np.linalg.norm(M + M.transpose(0, 2, 1), axis=(1, 2)), initial=0.0))


def orthonormality_error(blocks: np.ndarray) -> float:
    blocks = np.asarray(blocks, dtype=float)
    d = blocks.shape[1]
    G = blocks @ blocks.transpose(0, 2, 1) - np.eye(d)
    return float(np.max(np.linalg.norm(G, axis=(1, 2)), initial=0.0))


def sync_state(n: int, d: int, p: int | None = None) -> StiefelTuple:
    """The fully synchronized tuple ``Z`` (every block ``[I_d | 0]``)."""
    p = d if p is None else p
    block = np.eye(d, p)
    return StiefelTuple(np.broadcast_to(block, (n, d, p)))


def _fix_signs(U: np.ndarray, Vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Each column of U gets a nonnegative largest-magnitude entry.
    idx = np.argmax(np.abs(U), axis=-2)
    pivots = np.take_along_axis(U, idx[..., None, :], axis=-2)
    signs = np.where(pivots < 0, -1.0, 1.0)
    return U * signs, Vt * np.swapaxes(signs, -1, -2)


def polar_batch(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Polar factors ``U V^T`` of a stack of ``d x p`` matrices.

    Returns ``(factors, ratios)`` where ``ratios`` holds ``sigma_d / sigma_1``
    for each matrix; callers decide what to do with rank-deficient entries.
    """
    M = np.asarray(M, dtype=float)
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    U, Vt = _fix_signs(U, Vt)
    top = s[..., 0]
    ratios = np.divide(s[..., -1], top, out=np.zeros_like(top), where=top > 0)
    return U @ Vt, ratios


def polar_project(M: np.ndarray) -> np.ndarray:
    """Closest partial-orthogonal matrix to ``M``: ``U V^T`` from its thin SVD.

    Raises :class:`RankDeficient` when ``sigma_d(M) <= 1e-12 sigma_1(M)``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[1] < M.shape[0]:
        raise ValueError(f"polar_project expects a d x p matrix with p >= d, got {M.shape}")
    factor, ratio = polar_batch(M)
    if not ratio > RANK_RTOL:
        raise RankDeficient(ratio)
    return factor


def tangent_project(S_i: np.ndarray, Pi: np.ndarray) -> np.ndarray:
    """Orthogonal projection of ``Pi`` onto the tangent space of St(d, p) at ``S_i``.

    Works on single blocks or on stacks of blocks.
    """
    S_i = np.asarray(S_i, dtype=float)
    Pi = np.asarray(Pi, dtype=float)
    if S_i.shape != Pi.shape:
        raise ValueError(f"dimension mismatch: {S_i.shape} vs {Pi.shape}")
    G = Pi @ np.swapaxes(S_i, -1, -2)
    return Pi - 0.5 * (G + np.swapaxes(G, -1, -2)) @ S_i


def retract(S: StiefelTuple, Y: np.ndarray | TangentTuple, t: float = 1.0) -> StiefelTuple:
    """Polar retraction ``P(S_i + t Y_i)`` applied blockwise."""
    Yb = Y.blocks if isinstance(Y, TangentTuple) else np.asarray(Y, dtype=float)
    factors, ratios = polar_batch(S.blocks + t * Yb)
    bad = np.flatnonzero(~(ratios > RANK_RTOL))
    if bad.size:
        raise RankDeficient(ratios[bad[0]], int(bad[0]))
    return StiefelTuple(factors, check=False)


def align(S: StiefelTuple, Z: StiefelTuple) -> np.ndarray:
    """Best global ``d x p`` alignment ``Q = P(Z^T S)`` minimizing ``||S - Z Q||_F``.

    ``Z`` is the fully synchronized tuple with square identity blocks.
    """
    _check_pair(S, Z)
    return polar_project(S.block_sum())


def distance_to_sync(S: StiefelTuple, Z: StiefelTuple) -> float:
    """Distance ``min_Q ||S - Z Q||_F`` to the fully synchronized state."""
    Q = align(S, Z)
    return float(np.linalg.norm(S.blocks - Q[None, :, :]))


def _check_pair(S: StiefelTuple, Z: StiefelTuple) -> None:
    if Z.n != S.n or Z.d != S.d:
        raise ValueError(f"tuples differ in (n, d): {(S.n, S.d)} vs {(Z.n, Z.d)}")
    if Z.p != Z.d or not np.allclose(Z.blocks, np.eye(Z.d), atol=STIEFEL_TOL):
        raise ValueError("Z must be the synchronized tuple with identity blocks")


def random_stiefel(n: int, d: int, p: int, seed=None) -> StiefelTuple:
    """``n`` independent uniformly random points of St(d, p).

    Each block is the orthonormalized row space of a ``d x p`` standard
    Gaussian matrix (QR with the sign of ``R``'s diagonal fixed positive).
    """
    if p < d:
        raise ValueError(f"need p >= d, got d={d}, p={p}")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, p, d))
    Q, R = np.linalg.qr(G)
    signs = np.sign(np.diagonal(R, axis1=1, axis2=2))
    signs[signs == 0] = 1.0
    Q = Q * signs[:, None, :]
    return StiefelTuple(Q.transpose(0, 2, 1), check=False)


def random_tangent(S: StiefelTuple, seed=None) -> TangentTuple:
    """Gaussian direction projected onto the tangent space at ``S``."""
    rng = np.random.default_rng(seed)
    return TangentTuple(tangent_project(S.blocks, rng.standard_normal(S.blocks.shape)))


# Same row-per-entry CSV convention as block matrices: ``i,k,l,value`` = block i, entry (k, l).
TUPLE_CSV_HEADER = ("i", "k", "l", "value")


def write_tuple_csv(S: StiefelTuple, path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TUPLE_CSV_HEADER)
        for idx in np.ndindex(S.blocks.shape):
            writer.writerow([*idx, repr(float(S.blocks[idx]))])


def read_tuple_csv(path) -> StiefelTuple:
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if raw.shape[1] != 4:
        raise ValueError(f"{path}: expected 4 columns {TUPLE_CSV_HEADER}, found {raw.shape[1]}")
    idx = raw[:, :3].astype(int)
    blocks = np.zeros(tuple(idx.max(axis=0) + 1))
    blocks[idx[:, 0], idx[:, 1], idx[:, 2]] = raw[:, 3]
    return StiefelTuple(blocks)
