"""Synchronization instances ``A = G G^T + Delta`` and the least-squares objective."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .blockmat import BlockMatrix, read_csv, write_csv
from .manifold import StiefelTuple, sync_state


class NoiseKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    NONE = "none"
    CUSTOM = "custom"


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """PCG64 generator for the stream identified by ``(seed, *keys)``.

    Streams with different keys are statistically independent, so grid cells
    and trials can be generated in any order or in parallel.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=keys)))


@dataclass(frozen=True, eq=False)
class SyncProblem:
    """Observed pairwise data for ``n`` elements of O(d)."""

    n: int
    d: int
    A: BlockMatrix
    sigma: float = 0.0
    ground_truth: StiefelTuple | None = None
    seed: int | None = None
    noise_kind: NoiseKind = NoiseKind.CUSTOM

    def __post_init__(self):
        if (self.A.n, self.A.d) != (self.n, self.d):
            raise ValueError(f"A has block shape {(self.A.n, self.A.d)}, expected {(self.n, self.d)}")
        diag = self.A.blocks[np.arange(self.n), np.arange(self.n)]
        if not np.array_equal(diag, np.broadcast_to(np.eye(self.d), diag.shape)):
            raise ValueError("diagonal blocks of A must be exactly I_d")
        G = self.ground_truth
        if G is not None and (G.n, G.d, G.p) != (self.n, self.d, self.d):
            raise ValueError("ground truth must be n square d x d orthogonal blocks")

    @property
    def is_canonical(self) -> bool:
        G = self.ground_truth
        return G is not None and np.array_equal(G.blocks, np.broadcast_to(np.eye(self.d), G.blocks.shape))

    def signal(self) -> BlockMatrix:
        if self.ground_truth is None:
            raise ValueError("problem has no ground truth")
        return BlockMatrix(self.n, self.d, self.ground_truth.gram())

    def noise(self) -> BlockMatrix:
        """``Delta = A - G G^T`` (zero diagonal blocks)."""
        return self.A - self.signal()

    def metadata(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "sigma": self.sigma,
            "seed": self.seed,
            "noise_kind": self.noise_kind.value,
            "canonical": self.is_canonical,
        }


def _assemble(signal: np.ndarray, noise: np.ndarray, n: int, d: int) -> BlockMatrix:
    data = signal + noise
    data = 0.5 * (data + data.T)
    for i in range(n):
        data[i * d:(i + 1) * d, i * d:(i + 1) * d] = np.eye(d)
    return BlockMatrix(n, d, data)


def gaussian_noise(n: int, d: int, rng: np.random.Generator) -> BlockMatrix:
    """Symmetric block Gaussian ``W``: i.i.d. N(0,1) blocks above the diagonal, zero diagonal blocks."""
    side = n * d
    raw = rng.standard_normal((side, side))
    owner = np.arange(side) // d
    upper = np.where(owner[:, None] < owner[None, :], raw, 0.0)
    return BlockMatrix(n, d, upper + upper.T)


def generate_gaussian(n: int, d: int, sigma: float, seed=0) -> SyncProblem:
    """Canonical instance ``A = Z Z^T + sigma W`` with ground truth ``Z``.

    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    if n < 2 or d < 1:
        raise ValueError(f"need n >= 2 and d >= 1, got n={n}, d={d}")
    if not sigma >= 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if isinstance(seed, np.random.Generator):
        rng, seed_value = seed, None
    else:
        rng, seed_value = make_rng(int(seed)), int(seed)
    Z = sync_state(n, d)
    noise = np.zeros((n * d, n * d))
    kind = NoiseKind.NONE
    if sigma > 0:
        noise = sigma * gaussian_noise(n, d, rng).data
        kind = NoiseKind.GAUSSIAN
    A = _assemble(Z.gram(), noise, n, d)
    return SyncProblem(n, d, A, float(sigma), Z, seed_value, kind)


def sigma_from_kappa(kappa: float, n: int, d: int) -> float:
    """Noise level ``kappa * sqrt(n / d)``."""
    return float(kappa) * np.sqrt(n / d)


def from_noise(Delta: BlockMatrix, ground_truth: StiefelTuple | None = None,
               sigma: float = 0.0) -> SyncProblem:
    """Instance ``A = G G^T + Delta`` for a caller-supplied noise matrix."""
    n, d = Delta.n, Delta.d
    diag = Delta.blocks[np.arange(n), np.arange(n)]
    if np.max(np.abs(diag), initial=0.0) > 1e-12:
        raise ValueError("noise must have zero diagonal blocks")
    G = ground_truth if ground_truth is not None else sync_state(n, d)
    A = _assemble(G.gram(), Delta.data, n, d)
    return SyncProblem(n, d, A, float(sigma), G, None, NoiseKind.CUSTOM)


def reduce_to_canonical(problem: SyncProblem) -> SyncProblem:
    """Change variables so the ground truth becomes ``Z``.

    ``Delta_ij <- G_i^T Delta_ij G_j``; a candidate ``R`` of the original
    problem maps to ``{G_i^T R_i}`` with the same objective value.
    """
    G = problem.ground_truth
    if G is None:
        raise ValueError("reduce_to_canonical needs a ground truth")
    D = problem.noise().blocks
    Gb = G.blocks
    rotated = np.einsum("iab,ijac,jcd->ijbd", Gb, D, Gb)
    n, d = problem.n, problem.d
    Z = sync_state(n, d)
    A = _assemble(Z.gram(), BlockMatrix.from_blocks(rotated).data, n, d)
    return SyncProblem(n, d, A, problem.sigma, Z, problem.seed, problem.noise_kind)


def to_canonical_candidate(problem: SyncProblem, R: StiefelTuple) -> StiefelTuple:
    """Image ``{G_i^T R_i}`` of a candidate under the canonical change of variables."""
    G = problem.ground_truth
    if G is None:
        raise ValueError("problem has no ground truth")
    return StiefelTuple(G.blocks.transpose(0, 2, 1) @ R.blocks)


def objective(problem: SyncProblem, S: StiefelTuple) -> float:
    """``f(S) = <A, S S^T> = sum_ij <A_ij, S_i S_j^T>``."""
    if (S.n, S.d) != (problem.n, problem.d):
        raise ValueError(f"candidate has (n, d) = {(S.n, S.d)}, problem has {(problem.n, problem.d)}")
    X = S.stacked
    return float(np.sum((problem.A.data @ X) * X))


def save_problem(problem: SyncProblem, path) -> tuple[Path, Path]:
    """Write ``A`` in block CSV layout plus a JSON metadata sidecar."""
    path = Path(path)
    write_csv(problem.A, path)
    meta = path.with_suffix(".json")
    meta.write_text(json.dumps(problem.metadata(), indent=2, sort_keys=True) + "\n")
    return path, meta


def load_problem(path) -> SyncProblem:
    """Read a problem written by :func:`save_problem`; the ground truth is assumed canonical."""
    path = Path(path)
    meta_path = path.with_suffix(".json")
    meta = json.loads(meta_path.read_text()) if meta_path.exists() else {}
    A = read_csv(path, meta.get("n"), meta.get("d"))
    if not meta.get("canonical", True):
        raise ValueError(f"{path}: only canonical problems can be reloaded")
    return SyncProblem(
        A.n, A.d, A,
        sigma=float(meta.get("sigma") or 0.0),
        ground_truth=sync_state(A.n, A.d),
        seed=meta.get("seed"),
        noise_kind=NoiseKind(meta.get("noise_kind", "custom")),
    )
