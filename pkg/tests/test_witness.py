import json

import numpy as np
import pytest

from artifact.errors import MalformedWitness
from artifact.witness import ConjectureWitness, ZigEdge, identity_witness, search_witness, verify_conjecture_witness


def test_identity_witness_passes():
    rep = verify_conjecture_witness(identity_witness([3, 3], 2), 2)
    assert rep["ok"] and rep["einfty_agree"]
    assert all(e["ok"] for e in rep["edges"])


@pytest.fixture(scope="module")
def found():
    w, rep = search_witness([9, 9], {(0, 1): [3, 0]}, N=2)
    return w, rep


def test_search_for_twisted_group(found):
    w, rep = found
    assert rep["ok"]
    assert rep["hypotheses"]["powerful"] and rep["hypotheses"]["p_central"]


def test_json_round_trip(found):
    w, _ = found
    s = w.dumps()
    w2 = ConjectureWitness.from_json(s)
    assert w2.dumps() == s
    assert verify_conjecture_witness(w2, 2)["ok"]


def test_perturbed_witness_fails(found):
    w, _ = found
    data = json.loads(w.dumps())
    # flip one entry of the degree-one matrix on the A_lambda side
    m = data["maps"][1]["matrices"]["1"]
    i, j, v = m["entries"][0]
    m["entries"][0] = [i, j, (v + 1) % 3]
    rep = verify_conjecture_witness(ConjectureWitness.from_json(data), 2)
    assert not rep["ok"]
    assert not rep["edges"][1]["ok"]


def test_malformed_witnesses():
    w = identity_witness([3, 3], 2)
    data = w.to_json()
    with pytest.raises(MalformedWitness):
        ConjectureWitness.from_json(dict(data, schema="other/1"))
    bad = dict(data)
    del bad["maps"]
    with pytest.raises(MalformedWitness):
        ConjectureWitness.from_json(bad)
    # ends in the wrong order
    rev = ConjectureWitness(3, [3, 3], {}, [("bar", "A_lambda"), ("bar", "A")], [ZigEdge(0, 1, None, identity=True)])
    with pytest.raises(MalformedWitness):
        verify_conjecture_witness(rev, 2)
    # wrong number of maps
    short = ConjectureWitness(3, [3, 3], {}, [("bar", "A"), ("bar", "A_lambda")], [])
    with pytest.raises(MalformedWitness):
        verify_conjecture_witness(short, 2)
    # a matrix of the wrong shape
    odd = ConjectureWitness(3, [3, 3], {}, [("bar", "A"), ("bar", "A_lambda")],
                            [ZigEdge(0, 1, {0: np.eye(2, dtype=int), 1: np.eye(2, dtype=int), 2: np.eye(2, dtype=int)})])
    with pytest.raises(MalformedWitness):
        verify_conjecture_witness(odd, 2)
