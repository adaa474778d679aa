import numpy as np
import pytest

from artifact import groups as G
from artifact.errors import PredicateFail
from artifact.homalg import bar_cochains
from artifact.rings import (Verdict, graded_iso_search, ring_truncation, verify_witness, weigel_dims,
                            weigel_pattern_check)


@pytest.fixture(scope="module")
def rings():
    return {name: ring_truncation(Gr, 4) for name, Gr in [
        ("C3", G.cyclic(3)), ("C9", G.cyclic(9)), ("C3xC3", G.build_abelian([3, 3])),
        ("C9xC9", G.build_abelian([9, 9])), ("C3xC9", G.build_abelian([3, 9]))]}


def test_cyclic_ring_products(rings):
    R = rings["C3"]
    assert R.dim_list == [1] * 5
    assert not R.table[(1, 1)].any()      # y^2 = 0
    assert R.table[(1, 2)].any()          # x y != 0
    assert R.table[(2, 2)].any()          # x^2 != 0
    assert R.check_commutativity() and R.check_associativity()


def test_cyclic_ring_against_bar_cochains():
    """Same products computed with explicit bar cochains: y the identity map, x the carry cocycle."""
    B = bar_cochains(G.cyclic(3), 4)
    y = np.arange(3) % 3
    a = np.arange(3)
    x = ((a[:, None] + a[None, :]) // 3).ravel()
    assert not B.coboundary(x, 2).any()
    coords = lambda f, n: np.asarray(B.class_coords(f, n)).ravel() % 3
    assert coords(x, 2).any() and coords(y, 1).any()
    assert not coords(B.cup(y, 1, y, 1), 2).any()
    assert coords(B.cup(x, 2, y, 1), 3).any()
    assert coords(B.cup(x, 2, x, 2), 4).any()


def test_known_dims(rings):
    assert rings["C9xC9"].dim_list == [1, 2, 3, 4, 5] == weigel_dims(2, 4)
    assert rings["C3xC3"].dim_list == [1, 2, 3, 4, 5]
    assert rings["C3xC9"].dim_list == [1, 2, 3, 4, 5]


def test_iso_verdicts(rings):
    for R in rings.values():
        assert graded_iso_search(R, R) == Verdict.ISO
    assert graded_iso_search(rings["C3"], rings["C9"]) == "ISO"
    assert graded_iso_search(rings["C3xC3"], rings["C9xC9"]) == "ISO"
    v = graded_iso_search(rings["C3xC3"], rings["C9"])
    assert v == "NONISO" and v.invariant
    names = list(rings)
    for a in names:
        for b in names:
            assert graded_iso_search(rings[a], rings[b]).kind == graded_iso_search(rings[b], rings[a]).kind


def test_witness_reproduces_table(rings):
    A, B = rings["C3xC3"], rings["C9xC9"]
    v = graded_iso_search(A, B)
    assert verify_witness(A, B, v.witness)
    # doubling one degree-one image doubles y1 y2 without touching degree 2
    bad = {k: M.copy() for k, M in v.witness.items()}
    bad[1][0] = (2 * bad[1][0]) % 3
    assert not verify_witness(A, B, bad)
    js = v.to_json()
    assert js["verdict"] == "ISO" and len(js["witness"]) == 5


def test_invariants_are_deterministic(rings):
    R = rings["C9xC9"]
    assert R.invariants() == ring_truncation(G.build_abelian([9, 9]), 4).invariants()
    assert "dim 5" in R.presentation()


def test_weigel_pattern():
    A = G.build_abelian([9, 9])
    Al = G.build_twisted(A, G.AlternatingForm([9, 9], [9, 9], {(0, 1): [3, 0]}))
    rep = weigel_pattern_check(Al, 3)
    assert rep.ok and rep.d == 2 and rep.expected == [1, 2, 3, 4]
    W = G.build_wreath(G.cyclic(3), 3, [(1, 2, 0)])
    with pytest.raises(PredicateFail):
        weigel_pattern_check(W, 2)
