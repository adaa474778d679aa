import numpy as np
from hypothesis import given, settings, strategies as st

from artifact import groups as G
from artifact.fplinalg import FpMatrix, rank
from artifact.homalg import DoubleComplex, semidirect_reduction
from artifact.lattices import companion_matrix
from artifact.spectra import (antidiagonal_sums, bigraded_iso_search, check_pages, einfty_bigraded_algebra,
                              filtered_from_double, filtered_from_reduction, random_double_complex,
                              spectral_sequence)


def _rk(M):
    return rank(M) if M.shape[0] and M.shape[1] else 0


def column_cohomology(D, n, m):
    """E_1 oracle: vertical cohomology of column n at height m."""
    out = _rk(D.dv(n, m))
    inn = _rk(D.dv(n, m - 1)) if m > 0 else 0
    return D.dim(n, m) - out - inn


def staircase(p=3):
    """x0 at (0,1), x1 at (1,0), y1 at (1,1), y2 at (2,0): a single nonzero d_2."""
    dims = {(0, 1): 1, (1, 0): 1, (1, 1): 1, (2, 0): 1}
    H = {(0, 1): 1, (1, 0): 1}
    V = {(1, 0): p - 1}

    def dim(n, m):
        return dims.get((n, m), 0)

    def mat(src, tgt, val):
        M = np.zeros((dim(*tgt), dim(*src)), dtype=np.int64)
        if M.size and val is not None:
            M[0, 0] = val
        return FpMatrix.from_dense(M, p)

    return DoubleComplex(p, dim, lambda n, m: mat((n, m), (n + 1, m), H.get((n, m))),
                         lambda n, m: mat((n, m), (n, m + 1), V.get((n, m))), 3, name="staircase")


def test_staircase_has_one_d2():
    D = staircase()
    F = filtered_from_double(D)
    pages = spectral_sequence(F)
    E1, E2, E3 = pages[0], pages[1], pages[2]
    nz = lambda pg: {k: v for k, v in pg.dims.items() if v}
    assert nz(E1) == {(0, 1): 1, (2, 0): 1}
    assert nz(E2) == {(0, 1): 1, (2, 0): 1}
    assert E2.differentials[(0, 1)].tolist() != [[0]]
    assert nz(E3) == {} and nz(pages[-1]) == {}
    assert check_pages(pages, 3, 3)
    assert [F.cohomology_dim(t) for t in range(4)] == [0, 0, 0, 0]


def test_e1_is_column_cohomology():
    rng = np.random.default_rng(21)
    for _ in range(10):
        D = random_double_complex(rng, 3, size=3)
        pages = spectral_sequence(filtered_from_double(D))
        for (n, m), d in pages[0].dims.items():
            if n >= 0 and m >= 0:
                assert d == column_cohomology(D, n, m)


def test_collapse_without_horizontal_differential():
    rng = np.random.default_rng(5)
    for _ in range(5):
        R = random_double_complex(rng, 3, size=3)
        zero = lambda n, m: FpMatrix.from_dense(np.zeros((R.dim(n + 1, m), R.dim(n, m)), dtype=np.int64), 3)
        D = DoubleComplex(3, R.dim, zero, R.dv, R.Ntot)
        pages = spectral_sequence(filtered_from_double(D))
        for pg in pages[1:]:
            assert pg.dims == {k: v for k, v in pages[0].dims.items() if k in pg.dims}
        for pg in pages[:-1]:
            assert all(not M.any() for M in pg.differentials.values())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([3, 5]))
def test_antidiagonals_and_page_homology(seed, p):
    D = random_double_complex(np.random.default_rng(seed), p, size=3)
    F = filtered_from_double(D)
    assert F.check_filtered()
    pages = spectral_sequence(F)
    assert check_pages(pages, p, F.top)
    assert antidiagonal_sums(pages[-1], F.top) == [F.cohomology_dim(t) for t in range(F.top + 1)]
    # pages only shrink
    for a, b in zip(pages, pages[1:]):
        for k, v in b.dims.items():
            assert v <= a.dims.get(k, v)


def _sd(action):
    K = G.build_abelian([3, 3])
    P = G.cyclic(3)
    act = G.ActionHom.from_matrices(P, K, {1: companion_matrix(3)}) if action else G.ActionHom.trivial(P, K)
    return filtered_from_reduction(semidirect_reduction(K, P, act), 3)


def test_bigraded_algebra_self_and_mismatch():
    F1, F0 = _sd(True), _sd(False)
    B1 = einfty_bigraded_algebra(F1, 3)
    B0 = einfty_bigraded_algebra(F0, 3)
    assert B1.check_associativity() and B1.check_commutativity()
    assert bigraded_iso_search(B1, B1, 3) == "ISO"
    assert bigraded_iso_search(B0, B0, 3) == "ISO"
    v = bigraded_iso_search(B1, B0, 3)
    assert v == "NONISO" and bigraded_iso_search(B0, B1, 3) == "NONISO"
    # trivial action: E_infinity is the tensor product, so column sums are C3^3 dims
    assert antidiagonal_sums(spectral_sequence(F0)[-1], 3) == [1, 3, 6, 10]
