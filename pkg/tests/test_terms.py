from fractions import Fraction

import pytest

from bergman_calculus.terms import (
    IDENTITY, CurvAtom, OperatorExpr, StructureError, Term, apply_to_function, atom,
    canonicalize, charge_of, compose_terms, h, hb, normal_order_compose, project_degrees,
    term, to_latex, to_text, weight_of, word_degree_path,
)

F = CurvAtom("F02")
Fs = CurvAtom("F02", adjoint=True)


def test_weight_and_charge():
    t = term(1, kpow=1, z=("a",), zb=("a", "b"), dzb=("b",))
    assert weight_of(t) == 2 - 3 + 1
    assert charge_of(t) == 1 - (2 - 1)
    assert weight_of(term(1, tpow=1)) == -2


def test_bound_label_must_appear_twice():
    with pytest.raises(StructureError):
        canonicalize(term(1, z=(1,)))
    with pytest.raises(StructureError):
        canonicalize(term(1, z=(1, 1), zb=(1,)))


def test_dummy_renaming_is_alpha_equivalence():
    a = term(1, z=(5,), word=(atom("F02", derivs=(h(5),)),))
    b = term(1, z=(2,), word=(atom("F02", derivs=(h(2),)),))
    assert (OperatorExpr([a]) - OperatorExpr([b])).is_zero()


def test_antisymmetric_slots_change_sign():
    x = OperatorExpr([term(1, z=(1,), zb=(2,), word=(atom("FE", slots=(hb(2), h(1))),)),
                      term(1, z=(1,), zb=(2,), word=(atom("FE", slots=(h(1), hb(2))),))])
    assert x.is_zero()


def test_zero_coefficient_vanishes():
    assert canonicalize(term(0, word=(F,))) is None
    assert OperatorExpr([term(0)]).is_zero()


def test_json_round_trip():
    x = OperatorExpr([term(Fraction(3, 7), kpow=-2, expd=2, z=("a",), zb=("a",),
                           word=(F, atom("F02", derivs=(hb("a"),))))])
    assert OperatorExpr.from_json(x.to_json()) == x


def test_compose_derivative_hits_monomial():
    d = term(1, dz=("a",))
    f = term(1, z=("b",))
    out = OperatorExpr(compose_terms(d, f))
    # d/dz^a z^b = delta_ab + z^b d/dz^a
    assert out.coefficient(term(1, z=("b",), dz=("a",))) == 1
    assert len(out) == 1  # distinct free labels: the delta vanishes
    same = OperatorExpr(compose_terms(term(1, dz=("a",)), term(1, z=("a",))))
    assert same.coefficient(term(1)) == 1


def test_apply_to_function_drops_trailing_derivatives():
    x = OperatorExpr([term(1, dz=("a",))])
    assert apply_to_function(x, IDENTITY).is_zero()


def test_normal_order_identity():
    x = OperatorExpr([term(2, z=("a",), word=(F,))])
    assert normal_order_compose(IDENTITY, x) == x


def test_degree_path():
    assert word_degree_path((F, F), 0) == 4
    assert word_degree_path((Fs,), 2) == 0
    assert word_degree_path((Fs,), 0) is None


def test_project_degrees():
    x = OperatorExpr([term(1, word=(F,)), term(1)])
    assert to_text(project_degrees(x, 0, 1)) == "1 F"


def test_printing():
    x = OperatorExpr([term(Fraction(-1, 144), kpow=-2, expd=2, zb=(1, 2),
                           word=(atom("F02", derivs=(hb(1),)), atom("F02", derivs=(hb(2),))))])
    assert to_text(x) == "-1/144 k^-2 e^8kt zba zbb F_;a~ F_;b~"
    assert "\\frac{1}{144k^{2}}" in to_latex(x)


def test_term_is_hashable_and_frozen():
    t = term(1)
    assert isinstance(hash(t), int)
    with pytest.raises(Exception):
        t.kpow = 3  # type: ignore[misc]
    assert isinstance(t, Term)
