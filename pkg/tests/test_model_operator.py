from fractions import Fraction

import pytest

from bergman_calculus.model_operator import (
    RegimeError, apply_L, classify_decay, double_factorial, linv_asymptotic, lpowera_coefficient,
    lpowera_engine, wick_moment,
)
from bergman_calculus.terms import OperatorExpr, term, to_text


def test_linv_pure_exponential():
    out = linv_asymptotic(OperatorExpr([term(1, expd=1)]))
    assert to_text(out) == "1/4 k^-1 e^4kt"


def test_linv_first_contraction_heat_kernel():
    out = linv_asymptotic(OperatorExpr([term(1, z=("a",), zb=("a",))]))
    assert out.coefficient(term(1, kpow=-1, z=("a",), zb=("a",))) == Fraction(1, 2)
    assert out.coefficient(term(1, kpow=-2)) == 1


def test_linv_exact_mode_inverts_L():
    x = OperatorExpr([term(1, expd=1, z=("a", "b"), zb=("a", "b"))])
    y = linv_asymptotic(x, mode="exact")
    assert apply_L(y) == x


def test_heat_kernel_mode_differs_from_exact_below_top():
    x = OperatorExpr([term(1, expd=1, z=("a",), zb=("a",))])
    hk = linv_asymptotic(x)
    ex = linv_asymptotic(x, mode="exact")
    assert hk.coefficient(term(1, kpow=-1, expd=1, z=("a",), zb=("a",))) == \
        ex.coefficient(term(1, kpow=-1, expd=1, z=("a",), zb=("a",)))
    assert hk != ex


def test_constant_has_exact_primitive():
    assert to_text(linv_asymptotic(OperatorExpr([term(1)]))) == "1 t^1"


def test_boundary_class_raises_or_records():
    x = OperatorExpr([term(1, expd=-1, zb=("a",), z=("a",))])
    assert classify_decay(x.terms[0]) == "boundary"
    with pytest.raises(RegimeError):
        linv_asymptotic(x)
    rec = []
    assert linv_asymptotic(x, boundary=rec).is_zero() and len(rec) == 1


def test_decaying_class():
    assert classify_decay(term(1, expd=-1, zb=("a", "b", "c"))) == "decaying"


def test_double_factorial():
    assert [double_factorial(n) for n in range(8)] == [1, 1, 2, 3, 8, 15, 48, 105]


def test_wick_moments():
    assert wick_moment([1], [1]) == (1, -1)
    assert wick_moment([1, 1], [1, 1]) == (2, -2)
    assert wick_moment([1, 2], [2, 1]) == (1, -2)
    assert wick_moment([1], []) == (0, 0)


@pytest.mark.parametrize("a,p,nk,expected", [
    (1, 0, 0, Fraction(-1, 2)), (1, 1, 0, Fraction(-1, 4)), (2, 0, 1, Fraction(1, 15)),
])
def test_lpowera_closed_form(a, p, nk, expected):
    assert lpowera_coefficient(a, p, nk) == expected


def test_lpowera_engine_matches_closed_form():
    assert lpowera_engine(3, 1, ["a", "b"], ["a"]) == lpowera_coefficient(3, 1, 1)
