from fractions import Fraction

import pytest

from bergman_calculus.expansion import (
    composition_ledger, compute_u, creation, displayed_coefficient, gaussian_pairing,
    hs_leading, lchain, nu0, order_estimate, trace_decomposition,
)
from bergman_calculus.model_operator import RegimeError
from bergman_calculus.relations import InconsistentRelations, get_preset
from bergman_calculus.terms import IDENTITY, term, to_text, weight_of


def test_level_zero_is_identity():
    assert compute_u(0).u(0) == IDENTITY


def test_first_level_creation_leading():
    r = compute_u(1, cutoff=-2, qout=1)
    assert to_text(r.block(1)) == "-1/2 k^-1 e^4kt F"


def test_negative_level_rejected():
    with pytest.raises(ValueError):
        compute_u(-1)


def test_strict_mode_raises_on_boundary():
    with pytest.raises(RegimeError):
        compute_u(2, cutoff=-5)
    r = compute_u(2, cutoff=-5, strict=False)
    assert r.boundary and any(b.reaches for b in r.boundary)


def test_charge0_aggregate(charge0_report):
    agg = nu0(charge0_report.block(2, 0, 0), get_preset("sqv2:1"))
    assert sorted({str(t.coeff) for t in agg.terms}) == ["1/16", "1/18", "1/24"]
    assert all(t.kpow == -3 and t.expd == 2 for t in agg.terms)


def test_charge0_zzbar_terms_cancel(charge0_report):
    agg = nu0(charge0_report.block(2, 0, 0), get_preset("sqv2:1"))
    assert all(not t.z for t in agg.terms)


def test_charge_pm1_blocks_vanish_at_weight_minus5(charge0_report):
    p = get_preset("sqv2:1")
    for c in (1, -1):
        blk = charge0_report.block(2, 0, c)
        top = blk.filter(lambda t: weight_of(t) == -5)
        assert not top.is_zero()
        assert nu0(top, p).is_zero()
        # the first surviving odd-charge terms sit at weight -7
        assert max(weight_of(t) for t in nu0(blk, p).terms) == -7


def test_charge_minus2_aggregate(charge_minus2_report):
    agg = nu0(charge_minus2_report.block(2, 0, -2), get_preset("sqv2:1"))
    assert to_text(agg) == "-1/144 k^-2 e^8kt zba zbb F_;a~ F_;b~"


def test_composition_ledgers():
    shown = {k: [str(displayed_coefficient(t)) for t in x.terms]
             for k, (_, x) in composition_ledger(0).items()}
    assert shown["c0.c2"] == ["1/30", "1/30", "37/900", "37/900"]
    assert shown["c0.X.c0"][-1] == "-1/32"
    with pytest.raises(ValueError):
        composition_ledger(1)


def test_lchain_single_creation():
    assert to_text(lchain(creation(0))) == "1/2 k^-1 e^4kt F"


def test_gaussian_pairing():
    s = term(1, zb=("a",))
    assert gaussian_pairing(s, s) == (1, 1)
    assert gaussian_pairing(term(1, z=("a",)), s) == (0, 0)


def test_hs_leading_coefficients():
    assert [hs_leading(a).coefficient for a in (1, 2, 3)] == [
        Fraction(1, 4), Fraction(1, 64), Fraction(1, 2304)]
    assert hs_leading(2).kExponent == "m-4"
    assert hs_leading(0).localFunctional == "Vol(M) rk(E)"


def test_hs_leading_flags_convention():
    assert any("not resolved" in f for f in hs_leading(1).flags)


def test_hs_rejects_nonzero_input_degree():
    with pytest.raises(NotImplementedError):
        hs_leading(1, qin=1)


def test_hs_inconsistent_relations_raise(monkeypatch):
    from bergman_calculus import expansion
    monkeypatch.setattr(expansion, "kills", lambda w, p: True)
    with pytest.raises(InconsistentRelations):
        hs_leading(1, relations=get_preset("sqv1:1"))


def test_order_estimates():
    assert order_estimate(0, 0) == 0
    assert order_estimate(2, 1) == -6
    assert order_estimate(2, 1, get_preset("sqv1:1")) == -7
    assert trace_decomposition(2) == (-4, -6)


def test_weights_respect_filtration(charge_minus2_report):
    for j, u in enumerate(charge_minus2_report.levels):
        assert all(weight_of(t) <= -2 * j for t in u.terms)
    assert "2:2" in charge_minus2_report.order_table()
