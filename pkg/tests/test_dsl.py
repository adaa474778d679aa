import numpy as np
import pytest

from artifact import groups as G
from artifact.dsl import parse_group
from artifact.errors import ParseError
from artifact.lattices import companion_matrix


def test_basic_constructors():
    assert parse_group("ab(9,9)").order == 81
    assert np.array_equal(parse_group("cyc(9)").table, G.cyclic(9).table)
    W = parse_group("wr(cyc(3), 3, [[1,2,0]])")
    assert W.order == 81 and not W.is_abelian()


def test_semidirect_matches_builder():
    S = parse_group("sd(ab(3,3), cyc(3), [[[0,-1],[1,-1]]])")
    K, P = G.build_abelian([3, 3]), G.cyclic(3)
    ref = G.build_semidirect(K, P, G.ActionHom.from_matrices(P, K, {1: companion_matrix(3)}))
    assert np.array_equal(S.table, ref.table)


def test_twist_and_names():
    prog = """
    # the twisted square of C9
    A = ab(9,9)
    tw(A, {(1,2): [3,0]})
    """
    T = parse_group(prog)
    assert T.order == 81 and not T.is_abelian() and G.is_powerful(T)


def test_extension_carry_is_cyclic():
    E = parse_group("ext(cyc(3), cyc(3), triv, carry(3))")
    assert G.brute_force_isomorphic(E, G.cyclic(9))
    assert parse_group("ext(cyc(3), cyc(3), triv, zero)").is_abelian()


@pytest.mark.parametrize("text, line, col", [
    ("ab(9,", 1, 6),
    ("foo(3)", 1, 1),
    ("A = ab(9)\nsd(A, cyc(3), [[[1]], [[1]]])", 2, 1),
    ("tw(ab(9,9), {(1,2): [1,0]})", 1, 1),
])
def test_parse_errors_carry_positions(text, line, col):
    with pytest.raises(ParseError) as ei:
        parse_group(text)
    assert ei.value.line == line
    assert ei.value.column >= col
