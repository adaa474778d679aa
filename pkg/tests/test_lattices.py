import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from artifact import groups as G
from artifact.errors import DivisibilityViolated, NotUniserial, PrecisionExceeded
from artifact.lattices import (IntegralLifting, LatticeQuotient, check_integral_lifting, companion_matrix,
                               hillar_rhea_reduce, int_det, matrix_order, maximal_invariant_sublattices,
                               standard_action, uniserial_chain, uniserial_filtration)


def test_companion_matrix_p3():
    (M,) = standard_action(3, 1)
    assert np.array_equal(M, [[0, -1], [1, -1]])
    I = np.eye(2, dtype=int)
    assert np.array_equal(np.linalg.matrix_power(M, 3), I)
    assert not (I + M + M @ M).any()


def test_standard_action_x2_generates_wreath():
    gens = standard_action(3, 2)
    assert len(gens) == 2 and all(g.shape == (6, 6) for g in gens)
    W = G.matrix_group(gens, 9)
    assert W.order == 81
    M = companion_matrix(3)
    diag = np.kron(np.eye(3, dtype=int), M) % 9
    labels = {tuple(np.asarray(m).ravel() % 9) for m in W.info["matrices"]}
    assert tuple(diag.ravel()) in labels


@pytest.mark.parametrize("x", [1, 2])
def test_generators_unimodular_order_p(x):
    for A in standard_action(3, x):
        assert int_det(A) in (1, -1)
        assert matrix_order(A, 3 ** 4) in (1, 3)
    assert any(matrix_order(A, 81) == 3 for A in standard_action(3, x))


def test_filtration_endpoints():
    mats = standard_action(3, 1)
    assert uniserial_filtration(mats, 4, 0, p=3) == LatticeQuotient.full(3, 2, 4)
    assert uniserial_filtration(mats, 4, 2, p=3) == LatticeQuotient.scaled(3, 2, 4, 1)
    with pytest.raises(PrecisionExceeded):
        uniserial_filtration(mats, 2, 5, p=3)


def test_index3_sublattice_unique_by_enumeration():
    (M,) = standard_action(3, 1)
    # index-3 sublattices of (Z/9)^2 containing 3 T_0 are lines of F_3^2
    lines = {}
    for v in itertools.product(range(3), repeat=2):
        if any(v):
            L = LatticeQuotient(3, 2, 2, [list(v), [3, 0], [0, 3]])
            lines[tuple(map(tuple, L.H))] = L
    assert len(lines) == 4
    inv = [L for L in lines.values() if L.is_invariant([M])]
    assert len(inv) == 1
    assert inv[0] == uniserial_filtration([M], 2, 1, p=3)
    assert inv[0].index == 3


def test_all_invariant_sublattices_form_a_chain():
    """Every M-invariant L with 27 T_0 <= L (brute force over generators) is in the chain."""
    (M,) = standard_action(3, 1)
    chain = uniserial_chain([M], 3, 3)
    found = set()
    vecs = list(itertools.product(range(27), repeat=2))
    rng = np.random.default_rng(0)
    for _ in range(400):
        a, b = (vecs[i] for i in rng.integers(len(vecs), size=2))
        L = LatticeQuotient(3, 2, 3, [list(a), list(b)])
        # smallest invariant lattice containing L: add images until stable
        while True:
            L2 = LatticeQuotient(3, 2, 3, L.H + [list((M @ np.array(h)) % 27) for h in L.H])
            if L2 == L:
                break
            L = L2
        found.add(tuple(map(tuple, L.H)))
    assert found <= {tuple(map(tuple, C.H)) for C in chain}


def test_not_uniserial_detected():
    with pytest.raises(NotUniserial):
        uniserial_filtration([np.eye(2, dtype=int)], 2, 1, p=3)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([1, 2]), st.integers(0, 4), st.integers(1, 2))
def test_periodicity(x, i, s):
    mats = standard_action(3, x)
    d = mats[0].shape[0]
    a = 3 if x == 1 else 2
    if i + s * d > a * d:
        return
    Ti = uniserial_filtration(mats, a, i, p=3)
    assert uniserial_filtration(mats, a, i + s * d, p=3) == Ti.scale(s)


def test_hillar_rhea_examples():
    K = G.build_abelian([3, 9])
    w = hillar_rhea_reduce(np.eye(2, dtype=int), [3, 9])
    assert np.array_equal(w.permutation(K), np.arange(27))
    A = np.array([[1, 0], [3, 1]])
    w = hillar_rhea_reduce(A, [3, 9])
    assert np.array_equal(w.apply([1, 0]), [1, 3])
    with pytest.raises(DivisibilityViolated):
        hillar_rhea_reduce(np.array([[1, 0], [1, 1]]), [3, 9])
    # equal exponents: plain reduction mod p^s
    B = np.array([[4, 7], [11, -2]])
    w = hillar_rhea_reduce(B, [9, 9])
    for c in itertools.product(range(9), repeat=2):
        assert np.array_equal(w.apply(c), (B @ np.array(c)) % 9)


def _constrained(rng, mod):
    d = len(mod)
    A = np.zeros((d, d), dtype=np.int64)
    for n in range(d):
        for m in range(d):
            need = max(mod[n] // mod[m], 1)
            A[n, m] = need * rng.integers(-20, 20)
    return A


def test_hillar_rhea_ring_homomorphism_200_pairs():
    rng = np.random.default_rng(8)
    for k in range(200):
        exps = rng.integers(1, 4, size=int(rng.integers(1, 4)))
        if exps.sum() > 6:
            exps = exps[:2]
        mod = sorted(int(3 ** e) for e in exps)
        K = G.build_abelian(mod)
        A, B = _constrained(rng, mod), _constrained(rng, mod)
        wa, wb = hillar_rhea_reduce(A, mod), hillar_rhea_reduce(B, mod)
        comp = wa.permutation(K)[wb.permutation(K)]
        assert np.array_equal(hillar_rhea_reduce(A @ B, mod).permutation(K), comp)
        s = K.table[wa.permutation(K), wb.permutation(K)]
        assert np.array_equal(hillar_rhea_reduce(A + B, mod).permutation(K), s)


def test_integral_liftings():
    P = G.cyclic(3)
    K = G.build_abelian([9, 3])
    assert check_integral_lifting(G.ActionHom.trivial(P, K), IntegralLifting({1: np.eye(2, dtype=int)}))
    M = companion_matrix(3)
    for s in (1, 2, 3):
        Ks = G.build_abelian([3 ** s] * 2)
        act = G.ActionHom.from_matrices(P, Ks, {1: M})
        assert check_integral_lifting(act, IntegralLifting({1: M}))
        assert not check_integral_lifting(act, IntegralLifting({1: -M}))


def test_maximal_invariant_sublattices_unique_in_chain():
    mats = standard_action(3, 2)
    chain = uniserial_chain(mats, 2, 3, upto=8)
    for L in chain[:-1]:
        assert maximal_invariant_sublattices(L, mats).shape[1] == 1
