import itertools

import numpy as np
import pytest

from artifact import groups as G
from artifact.errors import NoLifting, RankTooLarge
from artifact.homalg import bar_cochains
from artifact.lattices import IntegralLifting, companion_matrix
from artifact.rings import weigel_dims
from artifact.zigzag import (Carry, UniversalModel, build_universal, build_universal_unbounded, materialize,
                             phi, phi_e, phi_o, prufer_truncation_invariant, verify_class_invariance,
                             verify_invariance, verify_unbounded_invariance, zigzag_report)

M = companion_matrix(3)


def count_monomials(d, t):
    """Brute force: exponent vectors a and subsets S with 2|a| + |S| = t."""
    c = 0
    for S in itertools.product((0, 1), repeat=d):
        rest = t - sum(S)
        if rest >= 0 and rest % 2 == 0:
            c += sum(1 for a in itertools.product(range(rest // 2 + 1), repeat=d) if sum(a) == rest // 2)
    return c


def test_model_dims():
    for d in (1, 2):
        U = UniversalModel(3, d, 5)
        assert U.dims == [count_monomials(d, t) for t in range(6)] == weigel_dims(d, 5)
    assert UniversalModel(5, 3, 3).dims == [count_monomials(3, t) for t in range(4)]


def test_model_rank_must_be_below_p():
    with pytest.raises(RankTooLarge):
        UniversalModel(3, 3, 2)
    with pytest.raises(RankTooLarge):
        phi(G.build_abelian([3, 3, 3]), 2)


def test_model_ring_axioms():
    R = UniversalModel(3, 2, 4).ring()
    assert R.check_associativity() and R.check_commutativity()


def test_phi_o_degree_two_is_antisymmetrized_cup():
    K = G.build_abelian([3, 9])
    f = phi_o(K, 2)
    B = bar_cochains(K, 3)
    Y = [K.coords[:, i] % 3 for i in range(2)]
    want = (2 * (B.cup(Y[0], 1, Y[1], 1) - B.cup(Y[1], 1, Y[0], 1))) % 3   # 1/2 = 2 mod 3
    (img,) = f.images[2]
    assert np.array_equal(materialize([img], K.order, 2)[:, 0] % 3, want)
    assert not B.coboundary(want, 2).any()


def test_polynomial_part_lands_in_cocycles():
    f = phi_e(G.build_abelian([3, 9]), 3)
    assert f.source.dims == [1, 0, 2, 0]
    assert all(f.is_cochain_map(3).values())


def test_carry_cocycle_is_not_a_coboundary():
    K = G.cyclic(9)
    K.coords = np.arange(9)[:, None]
    K.moduli = np.array([9])
    B = bar_cochains(K, 3)
    x = materialize([Carry(K, 0)], 9, 2)[:, 0]
    assert not B.coboundary(x, 2).any()
    assert np.asarray(B.class_coords(x, 2)).any()


def test_phi_on_c9_to_degree_six():
    K = G.cyclic(9)
    K.coords = np.arange(9)[:, None]
    K.moduli = np.array([9])
    f = phi(K, 6)
    assert all(f.is_cochain_map(6).values())
    assert all(v["ok"] for v in f.quasi_iso_report(6).values())
    assert f.ring_report(6)["ok"]


def test_zigzag_report_small():
    r = zigzag_report(G.build_abelian([3, 3]), G.build_abelian([3, 9]), 3)
    assert r["ok"] and r["dims"] == [1, 2, 3, 4]


def test_invariance_trivial_action():
    K = G.build_abelian([9, 9])
    P = G.cyclic(3)
    f = phi(K, 3)
    assert verify_invariance(f, P, G.ActionHom.trivial(P, K))
    with pytest.raises(NoLifting):
        verify_invariance(f, P, G.ActionHom.from_matrices(P, K, {1: M}))


@pytest.fixture(scope="module")
def lifted():
    K = G.build_abelian([9, 9])
    P = G.cyclic(3)
    act = G.ActionHom.from_matrices(P, K, {1: M})
    lift = IntegralLifting({1: M})
    U = build_universal(3, 2, 3, lift, P)
    return K, P, act, lift, U


def test_exterior_part_is_invariant(lifted):
    K, P, act, lift, U = lifted
    assert U.check_action()
    assert verify_invariance(phi_o(K, 3, U), P, act, lift)
    # dropping the antisymmetrization breaks it
    assert not verify_invariance(phi_o(K, 3, U, antisymmetrize=False), P, act, lift)


def test_invariance_on_cohomology(lifted):
    K, P, act, lift, U = lifted
    assert verify_class_invariance(phi(K, 3, U), P, act)[0]
    assert prufer_truncation_invariant(K, act, lift)


def test_wrong_lifting_rejected(lifted):
    K, P, act, lift, U = lifted
    with pytest.raises(NoLifting):
        verify_invariance(phi_o(K, 2, U), P, act, IntegralLifting({1: -M}))


def test_unbounded_rank_invariance():
    K = G.build_abelian([3, 9])
    U, f = build_universal_unbounded(3, 2, 3, 2, K, slot_perms={"c": (1, 2, 0)})
    assert U.dims == weigel_dims(6, 2)
    assert verify_unbounded_invariance(U, f)[0]
    # without the Koszul sign on the slot permutation the check fails
    orig = U.action_matrix
    U.action_matrix = lambda key, t: np.abs((orig(key, t) + 1) % 3 - 1)
    assert not verify_unbounded_invariance(U, f)[0]
