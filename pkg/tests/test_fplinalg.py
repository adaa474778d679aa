import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact.errors import NoSolution, NotASubspace
from artifact.fplinalg import (FpMatrix, kernel_basis, kernel_matrix, rank, rref, solve,
                               subquotient, RowSpace)


def brute_rank(A, p):
    """Size of the row space by enumerating all combinations of rows."""
    A = np.asarray(A) % p
    m = A.shape[0]
    span = {tuple((np.array(c) @ A) % p) for c in itertools.product(range(p), repeat=m)}
    return int(round(np.log(len(span)) / np.log(p)))


def test_rank_identity_and_zero():
    assert rank(FpMatrix.from_dense(np.eye(5, dtype=int), 3)) == 5
    assert rank(FpMatrix.from_dense(np.zeros((4, 7), dtype=int), 3)) == 0


def test_rank_small_dependent():
    M = FpMatrix.from_dense([[1, 2], [2, 1]], 3)
    assert rank(M) == 1 == brute_rank([[1, 2], [2, 1]], 3)


def test_kernel_examples():
    assert len(kernel_basis(FpMatrix.from_dense(np.zeros((3, 3), dtype=int), 3))) == 3
    assert kernel_basis(FpMatrix.from_dense(np.eye(3, dtype=int), 3)) == []
    K = kernel_basis(FpMatrix.from_dense([[1, 1, 1]], 3))
    assert len(K) == 2
    # oracle: all 27 vectors, the annihilated ones form a space of size 9
    sols = [v for v in itertools.product(range(3), repeat=3) if sum(v) % 3 == 0]
    assert len(sols) == 3 ** len(K)
    for v in K:
        assert v.sum() % 3 == 0


def test_subquotient_examples():
    Q = subquotient(np.eye(2, dtype=int), [[1, 0]], 3)
    assert Q.dim == 1
    Z = [[1, 1, 0], [0, 1, 1]]
    assert subquotient(Z, Z, 3).dim == 0
    # brute force over all 9 combinations: (1,2,2) is not in span Z, (1,0,2) is
    combos = {tuple(int(x) for x in (a * np.array(Z[0]) + b * np.array(Z[1])) % 3)
              for a in range(3) for b in range(3)}
    assert (1, 2, 2) not in combos
    with pytest.raises(NotASubspace):
        subquotient(Z, [[1, 2, 2]], 3)
    assert (1, 0, 2) in combos
    assert subquotient(Z, [[1, 0, 2]], 3).dim == 1


def test_subquotient_rejects_non_subspace():
    with pytest.raises(NotASubspace):
        subquotient([[1, 0, 0]], [[0, 1, 0]], 3)


def test_solve_examples():
    b = np.array([2, 0, 1])
    assert np.array_equal(solve(FpMatrix.from_dense(np.eye(3, dtype=int), 3), b), b)
    with pytest.raises(NoSolution):
        solve(FpMatrix.from_dense(np.zeros((2, 2), dtype=int), 3), [1, 0])
    x = solve(FpMatrix.from_dense([[1, 1], [2, 2]], 3), [1, 2])
    cands = [v for v in itertools.product(range(3), repeat=2) if (v[0] + v[1]) % 3 == 1]
    assert tuple(int(t) for t in x) in cands


def test_solve_sparse_path():
    rng = np.random.default_rng(3)
    A = rng.integers(0, 5, (40, 30)) * (rng.random((40, 30)) < 0.2)
    x0 = rng.integers(0, 5, 30)
    b = (A @ x0) % 5
    x = solve(FpMatrix.from_dense(A, 5, sparse=True), b, method="sparse")
    assert not ((A @ x - b) % 5).any()


def test_sparse_dense_rank_agree_1000():
    rng = np.random.default_rng(2024)
    for k in range(1000):
        p = (3, 5)[k % 2]
        m, n = rng.integers(1, 51, size=2)
        density = rng.choice([0.05, 0.2, 0.6])
        A = rng.integers(0, p, (m, n)) * (rng.random((m, n)) < density)
        M = FpMatrix.from_dense(A, p)
        assert rank(M, method="sparse") == rank(M, method="dense")


def test_rank_matches_brute_force_small():
    rng = np.random.default_rng(5)
    for _ in range(100):
        m, n = rng.integers(1, 5, size=2)
        A = rng.integers(0, 3, (m, n))
        assert rank(FpMatrix.from_dense(A, 3)) == brute_rank(A, 3)


def test_rowspace_coords():
    gens = np.array([[1, 0, 2], [0, 1, 1]])
    S = RowSpace(gens, 3)
    v = (2 * gens[0] + gens[1]) % 3
    assert np.array_equal(S.coords(v), [2, 1])
    assert not S.contains([0, 0, 1])


matrices = st.tuples(st.integers(1, 12), st.integers(1, 12), st.sampled_from([2, 3, 5, 7]),
                     st.integers(0, 2 ** 31))


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_rank_nullity(args):
    m, n, p, seed = args
    A = np.random.default_rng(seed).integers(0, p, (m, n)) * (np.random.default_rng(seed + 1).random((m, n)) < 0.5)
    M = FpMatrix.from_dense(A, p)
    K = kernel_matrix(M)
    assert rank(M) + K.shape[1] == n
    assert not ((A @ K) % p).any()
    for method in ("sparse", "dense"):
        K2 = kernel_matrix(M, method=method)
        assert K2.shape[1] == K.shape[1]
        assert not ((A @ K2) % p).any()


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_solve_substitution(args):
    m, n, p, seed = args
    rng = np.random.default_rng(seed)
    A = rng.integers(0, p, (m, n))
    b = rng.integers(0, p, m) if rng.random() < 0.5 else (A @ rng.integers(0, p, n)) % p
    for method in ("dense", "sparse"):
        try:
            x = solve(FpMatrix.from_dense(A, p), b, method=method)
        except NoSolution:
            # then b is genuinely outside the column space
            R, piv = rref(np.concatenate([A, b.reshape(-1, 1)], axis=1), p)
            assert n in piv
            continue
        assert not ((A @ x - b) % p).any()
