"""Block-structured symmetric matrices and the spectral primitives built on them.

An ``nd x nd`` matrix is addressed as an ``n x n`` grid of ``d x d`` blocks.
Storage is a single dense array; block views are reshapes of it.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

# Below these side lengths dense LAPACK routines are used.
DENSE_NORM_LIMIT = 512
DENSE_EIGEN_LIMIT = 2048


@dataclass(frozen=True, eq=False)
class BlockMatrix:
    """Symmetric ``nd x nd`` matrix viewed as ``n x n`` blocks of size ``d``."""

    n: int
    d: int
    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        side = self.n * self.d
        if data.shape != (side, side):
            raise ValueError(f"expected a {side}x{side} array, got shape {data.shape}")
        data = 0.5 * (data + data.T)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @classmethod
    def from_blocks(cls, blocks: np.ndarray) -> "BlockMatrix":
        """Build from an ``(n, n, d, d)`` array of blocks."""
        blocks = np.asarray(blocks, dtype=float)
        n, n2, d, d2 = blocks.shape
        if n != n2 or d != d2:
            raise ValueError(f"blocks must have shape (n, n, d, d), got {blocks.shape}")
        return cls(n, d, blocks.transpose(0, 2, 1, 3).reshape(n * d, n * d))

    @property
    def side(self) -> int:
        return self.n * self.d

    @property
    def blocks(self) -> np.ndarray:
        """Read-only ``(n, n, d, d)`` view; ``blocks[i, j]`` is block ``(i, j)``."""
        return self.data.reshape(self.n, self.d, self.n, self.d).transpose(0, 2, 1, 3)

    def block(self, i: int, j: int) -> np.ndarray:
        d = self.d
        return self.data[i * d:(i + 1) * d, j * d:(j + 1) * d]

    def __add__(self, other: "BlockMatrix") -> "BlockMatrix":
        _check_conformable(self, other)
        return BlockMatrix(self.n, self.d, self.data + other.data)

    def __sub__(self, other: "BlockMatrix") -> "BlockMatrix":
        _check_conformable(self, other)
        return BlockMatrix(self.n, self.d, self.data - other.data)

    def __mul__(self, scalar: float) -> "BlockMatrix":
        return BlockMatrix(self.n, self.d, float(scalar) * self.data)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class BlockDiagonal:
    """Block-diagonal matrix with ``n`` symmetric ``d x d`` blocks."""

    n: int
    d: int
    blocks: np.ndarray

    def __post_init__(self):
        blocks = np.asarray(self.blocks, dtype=float)
        if blocks.shape != (self.n, self.d, self.d):
            raise ValueError(
                f"expected blocks of shape {(self.n, self.d, self.d)}, got {blocks.shape}"
            )
        blocks = 0.5 * (blocks + blocks.transpose(0, 2, 1))
        blocks.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)

    def to_dense(self) -> np.ndarray:
        return scipy.linalg.block_diag(*self.blocks)

    def to_block_matrix(self) -> BlockMatrix:
        return BlockMatrix(self.n, self.d, self.to_dense())

    def min_eigenvalues(self) -> np.ndarray:
        """Smallest eigenvalue of every block."""
        return np.linalg.eigvalsh(self.blocks)[:, 0]


def _check_conformable(a: BlockMatrix, b: BlockMatrix) -> None:
    if (a.n, a.d) != (b.n, b.d):
        raise ValueError(f"block shapes differ: {(a.n, a.d)} vs {(b.n, b.d)}")


def _as_array(M) -> np.ndarray:
    return M.data if isinstance(M, BlockMatrix) else np.asarray(M, dtype=float)


def identity(n: int, d: int) -> BlockMatrix:
    return BlockMatrix(n, d, np.eye(n * d))


def partial_trace(M: BlockMatrix) -> np.ndarray:
    """``n x n`` matrix whose ``(i, j)`` entry is the trace of block ``(i, j)``."""
    return np.trace(M.blocks, axis1=2, axis2=3)


def _start_vector(size: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(size)


def operator_norm(M) -> float:
    """Largest singular value of a block matrix or any 2-D array."""
    X = _as_array(M)
    if X.ndim != 2:
        raise ValueError(f"operator_norm expects a 2-D array, got ndim={X.ndim}")
    if not np.all(np.isfinite(X)):
        raise ValueError("operator_norm: input has non-finite entries")
    if X.size == 0:
        return 0.0
    if min(X.shape) < DENSE_NORM_LIMIT:
        return float(np.linalg.norm(X, 2))
    if X.shape[0] == X.shape[1] and np.array_equal(X, X.T):
        vals = scipy.sparse.linalg.eigsh(
            X, k=1, which="LM", tol=1e-12, v0=_start_vector(X.shape[0]),
            return_eigenvectors=False,
        )
        return float(abs(vals[0]))
    vals = scipy.sparse.linalg.svds(
        X, k=1, tol=1e-12, v0=_start_vector(min(X.shape)), return_singular_vectors=False,
    )
    return float(vals[0])


def eigen_low(M, k: int) -> np.ndarray:
    """The ``k`` smallest eigenvalues of a symmetric matrix, ascending."""
    X = _as_array(M)
    side = X.shape[0]
    if k < 1 or k > side:
        raise ValueError(f"eigen_low: need 1 <= k <= {side}, got k={k}")
    if side < DENSE_EIGEN_LIMIT or k >= side - 1:
        return scipy.linalg.eigh(X, eigvals_only=True, subset_by_index=[0, k - 1])
    vals = scipy.sparse.linalg.eigsh(
        X, k=k, which="SA", tol=1e-9, v0=_start_vector(side), return_eigenvectors=False,
    )
    return np.sort(vals)


def hadamard_with_gram(X: BlockMatrix, S) -> BlockMatrix:
    """Entrywise product of ``X`` with the Gram matrix ``S S^T`` of a Stiefel tuple."""
    stacked = S.stacked
    if stacked.shape[0] != X.side:
        raise ValueError(
            f"dimension mismatch: X has side {X.side}, S stacks to {stacked.shape[0]} rows"
        )
    return BlockMatrix(X.n, X.d, X.data * (stacked @ stacked.T))


# CSV layout: one row per entry, ``i,j,k,l,value`` = block (i, j), in-block entry (k, l).
CSV_HEADER = ("i", "j", "k", "l", "value")


def write_csv(M: BlockMatrix, path) -> None:
    path = Path(path)
    blocks = M.blocks
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for idx in np.ndindex(blocks.shape):
            writer.writerow([*idx, repr(float(blocks[idx]))])


def read_csv(path, n: int | None = None, d: int | None = None) -> BlockMatrix:
    path = Path(path)
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if raw.shape[1] != 5:
        raise ValueError(f"{path}: expected 5 columns {CSV_HEADER}, found {raw.shape[1]}")
    idx = raw[:, :4].astype(int)
    n = n if n is not None else int(idx[:, 0].max()) + 1
    d = d if d is not None else int(idx[:, 2].max()) + 1
    blocks = np.zeros((n, n, d, d))
    blocks[idx[:, 0], idx[:, 1], idx[:, 2], idx[:, 3]] = raw[:, 4]
    return BlockMatrix.from_blocks(blocks)
