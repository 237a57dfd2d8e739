import pytest
from hypothesis import given, settings, strategies as st

from bergman_calculus.expansion import compute_u
from bergman_calculus.hamiltonian import build_H, flat_reduction
from bergman_calculus.relations import get_preset, measure
from bergman_calculus.terms import atom, canonicalize, h, hb, project_degrees, term, weight_of

FREE = ["a", "b", "c"]


@st.composite
def terms(draw):
    """Random terms whose bound labels each occur exactly twice."""
    z, zb, words = list(draw(st.lists(st.sampled_from(FREE), max_size=2))), [], []
    zb += draw(st.lists(st.sampled_from(FREE), max_size=2))
    derivs: list = []
    for lab in range(1, draw(st.integers(0, 3)) + 1):
        kind = draw(st.sampled_from(["zz", "zd", "dd"]))
        if kind == "zz":
            z.append(lab)
            zb.append(lab)
        elif kind == "zd":
            z.append(lab)
            derivs.append(hb(lab))
        else:
            derivs += [h(lab), hb(lab)]
    derivs = draw(st.permutations(derivs))
    cut = draw(st.integers(0, len(derivs)))
    words = [atom("F02", derivs=derivs[:cut]), atom("F02", derivs=derivs[cut:])]
    return term(draw(st.integers(1, 5)), kpow=draw(st.integers(-2, 1)), z=tuple(z), zb=tuple(zb),
                word=tuple(words))


@settings(max_examples=60, deadline=None)
@given(terms())
def test_canonicalize_is_idempotent(t):
    c = canonicalize(t)
    assert c is None or canonicalize(c) == c


@settings(max_examples=60, deadline=None)
@given(terms(), st.permutations(range(1, 4)))
def test_canonicalize_ignores_dummy_names(t, perm):
    mapping = {i + 1: p + 10 for i, p in enumerate(perm)}
    assert canonicalize(t.relabel(mapping)) == canonicalize(t)


@settings(max_examples=40, deadline=None)
@given(terms(), st.randoms(use_true_random=False))
def test_canonicalize_ignores_monomial_order(t, rnd):
    z, zb = list(t.z), list(t.zb)
    rnd.shuffle(z)
    rnd.shuffle(zb)
    assert canonicalize(t.__class__(**{**t.__dict__, "z": tuple(z), "zb": tuple(zb)})) == canonicalize(t)


@pytest.mark.parametrize("spec", ["sqv1:1", "sqv1:3", "sqv2:1", "sqv2:2", "is1v2", "is1v3"])
def test_every_rule_decreases_the_measure(spec):
    for r in get_preset(spec).rules:
        assert all(measure(w) < measure(r.lhs) for _, w in r.rhs)


def _structure_ok(rep, qin):
    for j, u in enumerate(rep.levels):
        assert all(weight_of(t) <= -2 * j for t in u.terms)
        for q in range(4):
            if j < abs(q - qin):
                assert project_degrees(u, qin, q).is_zero(), (j, q)


@pytest.mark.parametrize("qin", [0, 1, 2, 3])
def test_structural_invariants_flat(qin):
    H = flat_reduction(build_H(2, 0), keep={"F02"})
    _structure_ok(compute_u(5, H, -10, qin=qin, strict=False), qin)


def test_structural_invariants_full():
    _structure_ok(compute_u(2, build_H(2, 0), -5, qin=0, strict=False), 0)
