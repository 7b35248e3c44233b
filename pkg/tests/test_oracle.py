import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from osync.blockmat import BlockMatrix
from osync.manifold import StiefelTuple, random_stiefel
from osync.model import from_noise, generate_gaussian
from osync.oracle import brute_force_nuclear_distance, brute_force_z2, jacobi_singular_values


def test_two_elements():
    P = generate_gaussian(2, 1, 0.0)
    r = brute_force_z2(P)
    assert r.best == 4.0
    assert np.array_equal(r.signs, [1, 1])


def test_noiseless_all_ones():
    n = 9
    r = brute_force_z2(generate_gaussian(n, 1, 0.0))
    assert np.array_equal(r.signs, np.ones(n))
    assert r.best == n * n
    assert not r.ties


def test_anti_aligned_pair():
    P = from_noise(BlockMatrix(2, 1, np.array([[0.0, -2.0], [-2.0, 0.0]])))
    r = brute_force_z2(P)
    assert np.array_equal(r.signs, [1, -1])
    assert r.best == 4.0


@pytest.mark.parametrize("seed", range(5))
def test_matches_itertools_enumeration(seed):
    n = 7
    P = generate_gaussian(n, 1, 1.0, seed=seed)
    A = P.A.data
    vals = sorted((float(np.array(s) @ A @ np.array(s)), s)
                  for s in itertools.product([1.0, -1.0], repeat=n) if s[0] == 1.0)
    r = brute_force_z2(P)
    assert r.best == pytest.approx(vals[-1][0], rel=1e-12)
    assert r.second_best == pytest.approx(vals[-2][0], rel=1e-12)
    assert np.array_equal(r.signs, vals[-1][1])


def test_chunked_enumeration_large_n():
    # more than one chunk of sign vectors
    r = brute_force_z2(generate_gaussian(16, 1, 0.0))
    assert r.best == 256.0


def test_rejects_out_of_scope():
    with pytest.raises(ValueError):
        brute_force_z2(generate_gaussian(4, 2, 0.0))
    with pytest.raises(ValueError):
        brute_force_z2(generate_gaussian(21, 1, 0.0))


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(1, 6))
def test_jacobi_matches_lapack(seed, rows, cols):
    M = np.random.default_rng(seed).standard_normal((rows, cols))
    ref = np.linalg.svd(M, compute_uv=False)
    got = jacobi_singular_values(M)[: len(ref)]
    assert np.allclose(got, ref, rtol=1e-12, atol=1e-12)


def test_nuclear_distance_zero_at_rotated_sync():
    S = random_stiefel(1, 3, 3, 2)
    blocks = np.broadcast_to(S.blocks[0], (5, 3, 3))
    assert brute_force_nuclear_distance(StiefelTuple(blocks)) == pytest.approx(0.0, abs=1e-7)
