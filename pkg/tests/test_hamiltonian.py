import pytest

from bergman_calculus.hamiltonian import (
    UnsupportedOrder, build_H, charge_split, flat_reduction, load_data,
)
from bergman_calculus.terms import charge_of, weight_of


def test_weights_are_nonpositive():
    H = build_H(2, 0)
    assert all(weight_of(t) <= 0 for t in H.terms)


def test_cutoff_drops_low_weight_terms():
    assert len(build_H(2, -1).terms) < len(build_H(2, -3, include_delta=True).terms)


def test_unsupported_taylor_order():
    with pytest.raises(UnsupportedOrder):
        build_H(3)


def test_charge_split_keys():
    parts = charge_split(build_H(2, 0))
    assert set(parts) <= {-2, -1, 0, 1, 2}
    assert all(charge_of(t) == c for c, x in parts.items() for t in x.terms)


def test_creation_family_grows_with_taylor_order():
    sizes = [len(build_H(o, 0).terms) for o in range(3)]
    assert sizes == sorted(sizes) and sizes[0] < sizes[2]


def test_flat_reduction_keeps_degree_changing_part():
    H = flat_reduction(build_H(0, 0), keep={"F02"})
    assert {a.kind for t in H.terms for a in t.word} == {"F02"}


def test_data_groups():
    d = load_data()
    assert d.charge0Terms and d.deltaHTerms
    assert all(charge_of(t) == 2 for t in d.chargePlus2Terms)
