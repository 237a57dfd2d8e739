import time
from fractions import Fraction

from bergman_calculus.linear import (
    COMMUTATOR, P1EXP, PRODUCT, comp, instances, linear_consequence,
)


def test_commutator_is_a_consequence():
    t0 = time.perf_counter()
    res = linear_consequence(COMMUTATOR, P1EXP, 4)
    assert res.member and res.rank == 16
    assert time.perf_counter() - t0 < 10


def test_product_is_not_a_consequence():
    res = linear_consequence(PRODUCT, P1EXP, 4)
    assert not res.member
    # the certificate kills every hypothesis instance but not the failing target
    for v in instances(P1EXP, 4):
        assert sum(c * res.certificate.get(k, 0) for k, c in v.items()) == 0
    assert sum(c * res.certificate.get(k, 0) for k, c in res.failing.items()) != 0


def test_empty_target_is_trivially_member():
    assert linear_consequence([], P1EXP, 3).member


def test_polarization_adds_nothing():
    plain = linear_consequence(COMMUTATOR, P1EXP, 4)
    pol = linear_consequence(COMMUTATOR, P1EXP, 4, polarize=True)
    assert pol.member and pol.rank == plain.rank


def test_diagonal_components_vanish():
    fam = [(Fraction(1), (comp("?a", "?a"), comp("?b", "?c")))]
    assert instances(fam, 3) == []


def test_json_shape():
    d = linear_consequence(PRODUCT, P1EXP, 3).to_json()
    assert set(d) >= {"member", "rank", "certificate", "failingInstance"}
