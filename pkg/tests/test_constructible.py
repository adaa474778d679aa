import numpy as np
import pytest

from artifact import groups as G
from artifact.constructible import (ConstructibleDatum, build_constructible, metacyclic_group,
                                    omega_ep_cover_from_lattices, verify_omega_ep_cover)
from artifact.errors import InvalidForm, NotEquivariant, PreconditionFail
from artifact.lattices import LatticeQuotient, companion_matrix

M = companion_matrix(3)


def datum(gamma, a=3, v=1, u=3):
    return ConstructibleDatum(3, [M], LatticeQuotient.scaled(3, 2, a, v), LatticeQuotient.scaled(3, 2, a, u), gamma)


def test_gamma_zero_gives_lattice_semidirect():
    pair = build_constructible(datum({}, a=2, v=1, u=2))
    # |T_0 / 9 T_0| |P| = 81 * 3
    assert pair.via_baer.order == 81 * 3
    K = G.build_abelian([9, 9])
    P = G.cyclic(3)
    sd = G.build_semidirect(K, P, G.ActionHom.from_matrices(P, K, {1: M}))
    assert pair.verify_bijection()
    assert G.brute_force_isomorphic(pair.via_twist, sd)
    assert G.brute_force_isomorphic(pair.via_baer, sd)


def test_equivariant_gamma_bijection():
    pair = build_constructible(datum({(0, 1): [-9, 9]}))
    assert pair.via_baer.order == 729 * 3
    assert pair.verify_bijection()
    assert pair.via_twist.check_axioms()


def test_stated_gamma_is_not_equivariant():
    # M sends gamma(e1, e2) = 9 e1 to 9 e2, but det M = 1 keeps gamma(M e1, M e2) = 9 e1
    with pytest.raises(NotEquivariant):
        build_constructible(datum({(0, 1): [9, 0]}))


def test_fixed_points_of_m_on_v_mod_u():
    """Brute force: the M-fixed vectors of V/U = 3T_0/27T_0 that are multiples of 9."""
    fixed = []
    for a in range(0, 27, 3):
        for b in range(0, 27, 3):
            v = np.array([a, b])
            if not ((M @ v - v) % 27).any():
                fixed.append((a, b))
    assert sorted(fixed) == [(0, 0), (9, 18), (18, 9)]


def test_gamma_must_vanish_on_v():
    with pytest.raises(InvalidForm):
        build_constructible(datum({(0, 1): [3, 0]}))


def test_omega_cover_lattice_construction():
    # V = 3T_0, W = 9T_0, U = 27T_0 <= pW; gamma with values in V, vanishing on V x T_0 mod U
    cov = omega_ep_cover_from_lattices(3, [M], LatticeQuotient.scaled(3, 2, 4, 1),
                                       LatticeQuotient.scaled(3, 2, 4, 2), {(0, 1): [-9, 9]})
    assert cov.ok
    assert cov.report["A_powerful"] and cov.report["A_pcentral"] and cov.report["H_powerful"]
    with pytest.raises(PreconditionFail):
        omega_ep_cover_from_lattices(3, [M], LatticeQuotient.scaled(3, 2, 4, 1),
                                     LatticeQuotient.scaled(3, 2, 4, 1), {})


def test_metacyclic_cover_of_twisted_group():
    A = G.build_abelian([9, 9])
    Al = G.build_twisted(A, G.AlternatingForm([9, 9], [9, 9], {(0, 1): [3, 0]}))
    H = metacyclic_group(27, 27, 4)
    assert H.order == 729 and H.check_axioms()
    cov = verify_omega_ep_cover(Al, H)
    assert cov.ok
    # not a cover: C_9 x C_9 itself is abelian, the quotient is not A_lambda
    assert not verify_omega_ep_cover(Al, G.build_abelian([27, 27])).ok
