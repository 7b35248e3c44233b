import numpy as np
import pytest
from hypothesis import given, strategies as st

from osync.blockmat import (
    BlockDiagonal,
    BlockMatrix,
    eigen_low,
    hadamard_with_gram,
    identity,
    operator_norm,
    partial_trace,
    read_csv,
    write_csv,
)
from osync.manifold import random_stiefel, sync_state


def test_symmetrized_on_construction(rng):
    X = rng.standard_normal((6, 6))
    M = BlockMatrix(3, 2, X)
    assert np.array_equal(M.data, M.data.T)
    assert np.array_equal(M.blocks[1, 2], M.blocks[2, 1].T)
    with pytest.raises(ValueError):
        BlockMatrix(3, 2, np.zeros((5, 5)))


def test_block_accessors_agree(rng):
    X = rng.standard_normal((4, 4, 3, 3))
    M = BlockMatrix.from_blocks(X + X.transpose(1, 0, 3, 2))
    for i in range(4):
        for j in range(4):
            assert np.array_equal(M.block(i, j), M.blocks[i, j])


def test_block_diagonal_symmetrizes(rng):
    B = rng.standard_normal((3, 2, 2))
    L = BlockDiagonal(3, 2, B)
    assert np.allclose(L.blocks, L.blocks.transpose(0, 2, 1), rtol=1e-12)
    assert L.to_dense().shape == (6, 6)


def test_partial_trace_of_sync_gram():
    Z = sync_state(5, 3)
    T = partial_trace(BlockMatrix(5, 3, Z.gram()))
    assert np.array_equal(T, 3 * np.ones((5, 5)))


def test_partial_trace_of_identity():
    assert np.array_equal(partial_trace(identity(4, 3)), 3 * np.eye(4))


def test_partial_trace_matches_scalar_loop(rng):
    n, d = 4, 3
    X = rng.standard_normal((n * d, n * d))
    M = BlockMatrix(n, d, X + X.T)
    expected = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            for k in range(d):
                expected[i, j] += M.data[i * d + k, j * d + k]
    T = partial_trace(M)
    assert np.allclose(T, expected, rtol=1e-14, atol=1e-14)
    assert np.array_equal(T, T.T)


@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**32 - 1))
def test_partial_trace_linear(a, b, seed):
    rng = np.random.default_rng(seed)
    M = BlockMatrix(3, 2, rng.standard_normal((6, 6)))
    N = BlockMatrix(3, 2, rng.standard_normal((6, 6)))
    lhs = partial_trace(a * M + b * N)
    rhs = a * partial_trace(M) + b * partial_trace(N)
    scale = max(1.0, np.abs(lhs).max())
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


def test_operator_norm_trivial():
    assert operator_norm(np.eye(6)) == pytest.approx(1.0, rel=1e-12)
    Z = sync_state(5, 2)
    assert operator_norm(BlockMatrix(5, 2, Z.gram())) == pytest.approx(5.0, rel=1e-12)


def test_operator_norm_matches_eigendecomposition(rng):
    X = rng.standard_normal((8, 8))
    X = X + X.T
    expected = np.max(np.abs(np.linalg.eigvalsh(X)))
    assert operator_norm(X) == pytest.approx(expected, rel=1e-9)


def test_operator_norm_large_path(rng):
    X = rng.standard_normal((600, 600))
    X = X + X.T
    expected = np.max(np.abs(np.linalg.eigvalsh(X)))
    assert operator_norm(X) == pytest.approx(expected, rel=1e-9)
    R = rng.standard_normal((700, 520))
    assert operator_norm(R) == pytest.approx(np.linalg.norm(R, 2), rel=1e-9)


def test_operator_norm_rejects_nonfinite():
    X = np.eye(3)
    X[0, 1] = np.nan
    with pytest.raises(ValueError):
        operator_norm(X)


def test_eigen_low_certificate_spectrum():
    n, d = 5, 2
    C = BlockMatrix(n, d, n * np.eye(n * d) - sync_state(n, d).gram())
    assert np.allclose(eigen_low(C, d + 1), [0, 0, 5], atol=1e-12)


def test_eigen_low_diagonal():
    assert np.allclose(eigen_low(np.diag(np.arange(1.0, 7.0)), 2), [1, 2])


def test_eigen_low_matches_dense(rng):
    X = rng.standard_normal((12, 12))
    X = X + X.T
    vals = eigen_low(BlockMatrix(4, 3, X), 5)
    ref = np.linalg.eigvalsh(X)[:5]
    assert np.allclose(vals, ref, atol=1e-9 * (1 + np.abs(ref).max()))
    with pytest.raises(ValueError):
        eigen_low(X, 13)


def test_eigen_low_large_path(rng):
    X = rng.standard_normal((2100, 2100)) / 50
    X = X + X.T
    vals = eigen_low(X, 4)
    ref = np.linalg.eigvalsh(X)[:4]
    assert np.allclose(vals, ref, atol=1e-9 * (1 + operator_norm(X)))


def test_hadamard_all_ones_gives_gram(rng):
    S = random_stiefel(3, 2, 4, rng)
    J = BlockMatrix(3, 2, np.ones((6, 6)))
    assert np.allclose(hadamard_with_gram(J, S).data, S.gram(), atol=1e-15)


def test_hadamard_with_sync_matches_entrywise_loop(rng):
    n, d = 3, 2
    X = BlockMatrix(n, d, rng.standard_normal((6, 6)))
    Z = sync_state(n, d)
    out = hadamard_with_gram(X, Z).data
    G = Z.gram()
    for a in range(6):
        for b in range(6):
            assert out[a, b] == X.data[a, b] * G[a, b]
            # every block of ZZ^T is I_d: off-diagonal in-block entries vanish
            if a % d != b % d:
                assert out[a, b] == 0


@given(st.integers(0, 2**32 - 1))
def test_hadamard_bound(seed):
    rng = np.random.default_rng(seed)
    n, d, p = 3, 2, 4
    X = BlockMatrix(n, d, rng.standard_normal((6, 6)))
    S = random_stiefel(n, d, p, rng)
    assert operator_norm(hadamard_with_gram(X, S)) <= operator_norm(X) + 1e-10


def test_hadamard_dimension_mismatch(rng):
    with pytest.raises(ValueError):
        hadamard_with_gram(identity(3, 2), random_stiefel(4, 2, 3, rng))


def test_csv_roundtrip(tmp_path, rng):
    M = BlockMatrix(3, 2, rng.standard_normal((6, 6)))
    path = tmp_path / "m.csv"
    write_csv(M, path)
    assert path.read_text().splitlines()[0] == "i,j,k,l,value"
    back = read_csv(path)
    assert (back.n, back.d) == (3, 2)
    assert np.array_equal(back.data, M.data)
