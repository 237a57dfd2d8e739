from fractions import Fraction

import numpy as np
import pytest

from bergman_calculus.oracle import (
    QuadratureTask, UnsupportedSampler, check_identity, eval_expr, generic_model, leibniz_check,
    lpowera_quadrature, nilpotency_check, p1exp_generic_residual, quad_linv, square_zero_model,
    trial_rngs, wick_check,
)
from bergman_calculus.relations import F0, Fd
from bergman_calculus.terms import CurvAtom, OperatorExpr, h, hb, term

F = CurvAtom("F02")


def test_trial_rngs_are_reproducible():
    a = [g.normal() for g in trial_rngs(7, 3)]
    b = [g.normal() for g in trial_rngs(7, 3)]
    assert a == b and len(set(a)) == 3


def test_ff_vanishes_on_square_zero_model():
    x = OperatorExpr([term(1, word=(F, F))])
    assert np.abs(eval_expr(x, square_zero_model(4, 3, np.random.default_rng(1)))).max() < 1e-12
    assert np.abs(eval_expr(x, generic_model(4, 3, np.random.default_rng(1)))).max() > 1e-3


def test_identity_trivial_and_unknown_sampler():
    x = OperatorExpr([term(1, word=(F,))])
    assert check_identity(x, x, trials=3).maxResidual == 0
    with pytest.raises(UnsupportedSampler):
        check_identity(x, x, sampler="bogus")


def test_coordinate_relation_fails_generically():
    assert p1exp_generic_residual() > 1


@pytest.mark.parametrize("J,K,p", [((), (), 1), ((0,), (0,), 1), ((0, 1), (1,), 2), ((), (0, 0), 0)])
def test_quadrature_matches_symbolic_linv(J, K, p):
    rep = quad_linv(QuadratureTask(J, K, p))
    assert rep.passed, rep.to_json()


def test_quadrature_refuses_boundary():
    with pytest.raises(ValueError):
        quad_linv(QuadratureTask((0,), (), 0))
    with pytest.raises(ValueError):
        quad_linv(QuadratureTask((), (), -1))


@pytest.mark.parametrize("a,p,J,K", [(1, 0, (), ()), (2, 1, (0,), (1,)), (4, 3, (0, 1), (0, 1, 2, 3))])
def test_lpowera_quadrature(a, p, J, K):
    assert lpowera_quadrature(a, p, J, K) < 1e-9


def test_wick_moments():
    rep = wick_check(4)
    assert rep.passed and rep.trials > 50


def test_leibniz_oracle():
    rel = [(Fraction(1), (F0, Fd(hb("?x"))))]
    rep = leibniz_check(rel, h("a"), trials=2)
    assert rep.passed, rep.maxResidual


def test_nilpotency_oracle():
    rep = nilpotency_check(trials=5)
    assert rep.passed and rep.to_json()["pass"]
