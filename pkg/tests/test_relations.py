from fractions import Fraction

import pytest

from bergman_calculus.relations import (
    F0, COMMUTE, F11, Fd, NonOrientable, derive_relation, get_preset, is1v3, kills,
    leibniz_derive, measure, normalize, orient, rule, sqv1, sqv1_array, sqv2, word_expr,
)
from bergman_calculus.terms import atom, h, hb, term, to_text


def test_rules_decrease_measure():
    for name in ("sqv1:1", "sqv1:2", "sqv2:1", "is1v2", "is1v3"):
        for r in get_preset(name).rules:
            assert all(measure(w) < measure(r.lhs) for _, w in r.rhs)


def test_non_orientable_rule_rejected():
    with pytest.raises(NonOrientable):
        rule([F0, Fd(hb("?x"))], [(1, [Fd(hb("?x")), F0])])


def test_metavariables_must_be_bound():
    with pytest.raises(ValueError):
        rule([F0, F0], [(1, [Fd(hb("?x")), F0])])


def test_leibniz_of_square():
    d = derive_relation([(Fraction(1), (F0, F0))], h("a"))
    assert sorted(str(c) for c, _ in d) == ["1", "1"]
    rules = leibniz_derive([(Fraction(1), (F0, F0))], h("?z"))
    assert len(rules) == 1 and len(rules[0].rhs) == 1


def test_sqv1_kills_power():
    assert kills((F0, F0), sqv1(1))
    assert kills((F0,) * 3, sqv1(2))
    assert not kills((F0, F0), sqv1(2))


def test_sqv1_array_values():
    assert sqv1_array(1) == [Fraction(2, 5), Fraction(4, 15)]
    assert sqv1_array(2) == [Fraction(1, 7), Fraction(4, 35), Fraction(8, 105)]


def test_sqv2_derived_rule_reproduced():
    # F_{;a} F_{;b~} = -F F_{;b~a}
    w = word_expr((Fd(h("a")), Fd(hb("b"))))
    out = normalize(w, sqv2(1))
    assert to_text(out) == "-1 F F_;b~a"


def test_commute_rule_introduces_curvature():
    out = normalize(word_expr((Fd(h("a"), hb("b")),)), [COMMUTE])
    assert len(out) == 5


def test_normalize_is_idempotent():
    p = is1v3()
    x = word_expr((F0, F11, F0), (Fd(hb("a")), F0, Fd(h("a"))), (Fd(hb("a")), Fd(hb("a"))))
    once = normalize(x, p)
    assert normalize(once, p) == once


def test_trace_records_steps():
    tr = []
    normalize(word_expr((F0, F0)), sqv1(1), trace=tr)
    assert tr and tr[0][0].lhs == (F0, F0)


def test_unknown_preset():
    with pytest.raises(ValueError):
        get_preset("sqv7")


def test_orient_consistent_system():
    rules = orient([[(Fraction(1), (F0, Fd(h("?x")))), (Fraction(1), (Fd(h("?x")), F0))]])
    assert len(rules) == 1


def test_scalar_term_survives():
    assert normalize(word_expr(()), sqv2(1)) == word_expr(())
    assert term(1).word == ()
    assert atom("F02") == F0
