"""The model operator L, its asymptotic inverse, and Wick moments.

In the regime t < 1, tk >> 1 the operator acts on ``a(t) z^J zbar^K W`` as

    L = d/dt + Delta_E + 2k|K|          (k/tanh(tk) -> 1)

with ``Delta_E = -4 sum_a d_{z^a} d_{zbar^a}``.  Two inverses are provided.

``heat-kernel`` (default) is the Gaussian-convolution formula with the
mu_{JK} weight of the *input* monomial held fixed across the Wick expansion.
A j-fold contraction then carries ``4^j j! / (k c)^{j+1}`` with
``c = 4p + 2|K|``.  This is the rule behind the displayed coefficients
(37/900 and friends) but it only inverts L on the top monomial.

``exact`` solves the triangular ODE system level by level and gives
``4^j j! / (k^{j+1} prod_{i<=j} (c - 2i))``; L(L^{-1} x) = x holds exactly.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import replace
from fractions import Fraction
from typing import Iterable, Sequence

from .terms import (
    OperatorExpr, RemainderClass, Term, _identify, term, weight_of,
)

MODES = ("heat-kernel", "exact")


class RegimeError(RuntimeError):
    """A boundary-class term would have to be integrated."""

    def __init__(self, msg: str, term: Term | None = None):
        super().__init__(msg)
        self.term = term


def decay_exponent(t: Term) -> int:
    """Net exponent c of the s-integral, in units of k."""
    return 4 * t.expd + 2 * len(t.zb)


def classify_decay(t: Term) -> str:
    c = decay_exponent(t)
    if c <= 0:
        return "boundary"
    return "decaying" if t.expd < 0 else "neutral"


def _matchings(t: Term, j: int):
    """All j-element partial matchings between z and zbar positions."""
    for zs in itertools.combinations(range(len(t.z)), j):
        for zbs in itertools.permutations(range(len(t.zb)), j):
            yield list(zip(zs, zbs))


def contract(t: Term, pairs) -> Term | None:
    """Remove the paired z/zbar factors, imposing delta on their labels."""
    zi = {i for i, _ in pairs}
    zbi = {i for _, i in pairs}
    out = replace(
        t,
        z=tuple(x for i, x in enumerate(t.z) if i not in zi),
        zb=tuple(x for i, x in enumerate(t.zb) if i not in zbi),
    )
    for i, k in pairs:
        a, b = t.z[i], t.zb[k]
        if a == b:
            if isinstance(a, int):
                out = replace(out, mpow=out.mpow + 1)
            continue
        out = _identify(out, a, b)
        if out is None:
            return None
    return out


def exp_small(t: Term) -> RemainderClass:
    return RemainderClass(weight_of(t) - 2, t.expd, "exp-small")


def _linv_term(t: Term, mode: str, boundary: list | None) -> list[Term]:
    if t.has_derivatives:
        raise ValueError("L^{-1} acts on functions; term carries derivatives")
    c = decay_exponent(t)
    if c <= 0:
        if c == 0 and not t.z and not t.zb:
            # exact primitive of t^n
            return [replace(t, coeff=t.coeff / (t.tpow + 1), tpow=t.tpow + 1)]
        if boundary is None:
            raise RegimeError(f"boundary-class term in L^-1: c={c}", t)
        boundary.append(t)
        return []
    out = []
    n = t.tpow
    if mode == "exact" and n:
        raise ValueError("exact mode handles tPow = 0 only")
    for j in range(min(len(t.z), len(t.zb)) + 1):
        if mode == "exact":
            den = math.prod(c - 2 * i for i in range(j + 1))
            if den <= 0:
                if boundary is None:
                    raise RegimeError("exact inverse hits a boundary level", t)
                boundary.append(t)
                break
            coeffs = [(0, Fraction(4 ** j * math.factorial(j), den))]
        else:
            coeffs = [
                (i, Fraction(math.comb(n, i) * (-1) ** i * 4 ** j * math.factorial(i + j),
                             c ** (i + j + 1)))
                for i in range(n + 1)
            ]
        for pairs in _matchings(t, j):
            base = contract(t, pairs)
            if base is None:
                continue
            for i, cf in coeffs:
                out.append(replace(base, coeff=base.coeff * cf, kpow=base.kpow - 1 - i - j,
                                   tpow=n - i))
    return out


def linv_asymptotic(x: OperatorExpr, cutoff: int | None = None, mode: str = "heat-kernel",
                    boundary: list | None = None) -> OperatorExpr:
    """Term-wise L^{-1} in the tk >> 1 regime.

    Boundary-class terms raise :class:`RegimeError` unless a ``boundary`` list
    is supplied, in which case they are appended to it and skipped.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    out: list[Term] = []
    rem = set(x.remainder)
    for t in x.terms:
        res = _linv_term(t, mode, boundary)
        if res and classify_decay(t) != "boundary":
            rem.add(exp_small(t))
        for r in res:
            if cutoff is not None and weight_of(r) < cutoff:
                rem.add(RemainderClass(cutoff - 1, None, "truncate"))
                continue
            out.append(r)
    return OperatorExpr(out, rem)


def apply_L(x: OperatorExpr) -> OperatorExpr:
    out: list[Term] = []
    rem = set(x.remainder)
    for t in x.terms:
        if t.has_derivatives:
            raise ValueError("apply_L acts on functions")
        if t.tpow:
            out.append(replace(t, coeff=t.coeff * t.tpow, tpow=t.tpow - 1))
        lam = 4 * t.expd + 2 * len(t.zb)
        if lam:
            out.append(replace(t, coeff=t.coeff * lam, kpow=t.kpow + 1))
        if t.z or t.zb:
            rem.add(RemainderClass(weight_of(t), t.expd, "exp-small"))
        for pairs in _matchings(t, 1):
            ct = contract(t, pairs)
            if ct is not None:
                out.append(replace(ct, coeff=ct.coeff * -4))
    return OperatorExpr(out, rem)


def wick_moment(J: Iterable[int], K: Iterable[int]) -> tuple[Fraction, int]:
    """E[y^J ybar^K] under e^{-pi|y|^2} dy as ``(rational, power of pi)``.

    J and K are sequences of coordinate numbers; the value is
    ``rational * pi**power``.
    """
    J, K = list(J), list(K)
    if len(J) != len(K):
        return Fraction(0), 0
    count = sum(all(a == K[p] for a, p in zip(J, perm))
                for perm in itertools.permutations(range(len(K))))
    return Fraction(count), -len(J)


def double_factorial(n: int) -> int:
    if n <= 0:
        return 1
    return math.prod(range(n, 0, -2))


def lpowera_coefficient(a: int, p: int, nK: int) -> Fraction:
    """Closed-form leading coefficient of (-L^{-1} 2 e^{4kt})^a on e^{4pkt} z^J zbar^K
    (times k^{-a})."""
    return Fraction((-1) ** a * double_factorial(2 * p + nK), double_factorial(2 * p + nK + 2 * a))


def lpowera_engine(a: int, p: int, J: Sequence, K: Sequence) -> Fraction:
    """Leading coefficient of (-L^{-1} 2e^{4kt})^a on e^{4pkt} z^J zbar^K, by iteration.

    Returns the coefficient of the uncontracted monomial at k^{-a}.
    """
    start = term(1, expd=p, z=tuple(J), zb=tuple(K))
    x = OperatorExpr([start])
    for _ in range(a):
        x = -linv_asymptotic(OperatorExpr([replace(t, coeff=2 * t.coeff, expd=t.expd + 1)
                                           for t in x.terms]))
    lead = [t for t in x.terms if t.kpow == -a and t.expd == p + a]
    if len(lead) != 1 or (lead[0].z, lead[0].zb) != (start.z, start.zb):
        raise AssertionError(f"unexpected leading part: {lead}")
    return lead[0].coeff
