import pytest

from bergman_calculus.chern import (
    _canonical_rotation, _p6_chain, brute_force_survivors, chern_word_survey, verify_trace_chain,
)
from bergman_calculus.relations import get_preset


def test_p6_survey_counts():
    r = chern_word_survey(6, get_preset("is1v3"))
    assert (r.total, len(r.survivors), r.killed) == (130, 65, 65)
    assert r.max_count("F02") == 3
    assert [" ".join(w) for w in r.with_counts(F02=3)] == ["F02 F20 F02 F20 F02 F20"]


@pytest.mark.parametrize("p", [3, 4, 5])
def test_survey_agrees_with_substring_search(p):
    # sqv1:1 kills exactly the cyclic words containing F02 F02
    r = chern_word_survey(p, get_preset("sqv1:1"))
    assert set(r.survivors) == brute_force_survivors(p, [("F02", "F02")])


@pytest.mark.parametrize("q", [1, 2, 3])
def test_sqv1_bounds_antiholomorphic_count(q):
    assert chern_word_survey(q + 2, get_preset(f"sqv1:{q}")).max_count("F02") == q


def test_mirror_is_symmetric():
    r = chern_word_survey(4, get_preset("sqv1:1"), mirror=True)
    swap = {"F02": "F20", "F20": "F02", "F11": "F11"}
    conj = {_canonical_rotation(tuple(swap[x] for x in w)) for w in r.survivors}
    assert conj == set(r.survivors)
    assert set(r.survivors) == brute_force_survivors(4, [("F02", "F02"), ("F20", "F20")])


def test_canonical_rotation_is_cyclic_invariant():
    w = ("F11", "F02", "F20", "F02")
    assert {_canonical_rotation(w[i:] + w[:i]) for i in range(4)} == {_canonical_rotation(w)}


def test_p_out_of_range():
    with pytest.raises(ValueError):
        chern_word_survey(0, get_preset("sqv1:1"))
    with pytest.raises(ValueError):
        chern_word_survey(9, get_preset("sqv1:1"))


def test_p6_chain_passes():
    rep = verify_trace_chain("p6")
    assert rep.ok and rep.to_json()["pass"]


def test_p6_chain_needs_derived_identity():
    steps = {s.name: s for s in _p6_chain(derived=False)}
    assert not steps["E3 = E4 (dbar-exact)"].ok


def test_unknown_chain():
    with pytest.raises(KeyError):
        verify_trace_chain("p8")
