"""Exact linear-consequence search over index instances.

A component family is a list of ``(coeff, word)`` where every atom is an
``F02`` with two antiholomorphic metavariable slots, i.e. a component
``F_{a~b~}``.  Instantiating the metavariables over ``{1..m}`` turns each
family member into a noncommutative polynomial in the antisymmetric
variables ``x_{ij}`` (i < j).  Membership of every target instance in the
span of the hypothesis instances is then a rational rank question.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import sympy

from .relations import LinComb, RewriteRule, is_meta
from .terms import CurvAtom, atom, hb

Monomial = tuple[tuple[int, int], ...]


def comp(a: str, b: str) -> CurvAtom:
    """The component F_{a~b~} with metavariable labels."""
    return atom("F02", slots=(hb(a), hb(b)))


def _metas(fam: LinComb) -> list[str]:
    seen: dict[str, None] = {}
    for _, w in fam:
        for a in w:
            for s in a.slots:
                if is_meta(s.label):
                    seen.setdefault(s.label, None)
    return list(seen)


def _monomial(pairs: Sequence[tuple[int, int]]) -> tuple[int, Monomial] | None:
    sign = 1
    mono = []
    for i, j in pairs:
        if i == j:
            return None
        if i > j:
            i, j = j, i
            sign = -sign
        mono.append((i, j))
    return sign, tuple(mono)


def _check(fam: LinComb) -> None:
    for _, w in fam:
        for a in w:
            if a.kind != "F02" or len(a.slots) != 2 or a.derivs:
                raise ValueError(f"atom {a} is not a two-slot F component")


def _instance(fam: LinComb, assign: dict[str, tuple[int, ...]]) -> dict[Monomial, Fraction]:
    """Evaluate with each metavariable a formal sum of basis indices."""
    vec: dict[Monomial, Fraction] = {}
    for c, w in fam:
        slots = [s.label for a in w for s in a.slots]
        for pick in itertools.product(*(assign[x] for x in slots)):
            r = _monomial(list(zip(pick[::2], pick[1::2])))
            if r is None:
                continue
            sign, mono = r
            vec[mono] = vec.get(mono, Fraction(0)) + sign * Fraction(c)
    return {k: x for k, x in vec.items() if x}


def instances(fam: LinComb, m: int, polarize: bool = False) -> list[dict[Monomial, Fraction]]:
    """All index instances of a family as sparse vectors.

    With ``polarize`` every substitution a -> a + f of one metavariable is
    added as well; by multilinearity these are sums of plain instances.
    """
    _check(fam)
    metas = _metas(fam)
    out = []
    for vals in itertools.product(range(1, m + 1), repeat=len(metas)):
        base = {x: (v,) for x, v in zip(metas, vals)}
        out.append(_instance(fam, base))
        if polarize:
            for x in metas:
                for f in range(1, m + 1):
                    if f != base[x][0]:
                        out.append(_instance(fam, {**base, x: base[x] + (f,)}))
    return [v for v in out if v]


@dataclass
class LinearResult:
    member: bool
    hypothesisInstances: int
    targetInstances: int
    rank: int
    failing: dict | None = None
    certificate: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        fmt = lambda d: {_mono_text(k): str(v) for k, v in d.items()}  # noqa: E731
        return {
            "member": self.member,
            "hypothesisInstances": self.hypothesisInstances,
            "targetInstances": self.targetInstances,
            "rank": self.rank,
            "failingInstance": fmt(self.failing) if self.failing else None,
            "certificate": fmt(self.certificate),
        }


def _mono_text(m: Monomial) -> str:
    return " ".join(f"x{i}{j}" for i, j in m)


def linear_consequence(target: LinComb, hypothesis: RewriteRule | LinComb, m: int,
                       polarize: bool = False) -> LinearResult:
    """Is every instance of ``target`` a linear combination of hypothesis instances?

    On failure the certificate is a functional on monomials that vanishes on
    every hypothesis instance but not on the failing target instance.
    """
    hyp = hypothesis.relation() if isinstance(hypothesis, RewriteRule) else list(hypothesis)
    H = instances(hyp, m, polarize)
    T = instances(list(target), m) if target else []
    cols = sorted({k for v in H + T for k in v})
    idx = {k: i for i, k in enumerate(cols)}

    def mat(vs):
        M = sympy.zeros(len(vs), len(cols))
        for r, v in enumerate(vs):
            for k, x in v.items():
                M[r, idx[k]] = sympy.Rational(x.numerator, x.denominator)
        return M

    if not T:
        return LinearResult(True, len(H), 0, 0)
    HM = mat(H)
    rank = HM.rank()
    null = HM.nullspace()  # functionals killing every hypothesis row
    for t in T:
        tv = mat([t])
        for v in null:
            val = (tv * v)[0, 0]
            if val != 0:
                cert = {cols[i]: Fraction(int(sympy.fraction(x)[0]), int(sympy.fraction(x)[1]))
                        for i, x in enumerate(v) if x != 0}
                return LinearResult(False, len(H), len(T), rank, t, cert)
    return LinearResult(True, len(H), len(T), rank)


# the coordinate expansion of  dzbar^c ^ F_{a~c~} ^ F = 0
P1EXP: LinComb = [
    (Fraction(1), (comp("?a", "?c"), comp("?b", "?f"))),
    (Fraction(1), (comp("?a", "?b"), comp("?f", "?c"))),
    (Fraction(1), (comp("?a", "?f"), comp("?c", "?b"))),
]

COMMUTATOR: LinComb = [
    (Fraction(1), (comp("?a", "?b"), comp("?c", "?f"))),
    (Fraction(-1), (comp("?c", "?f"), comp("?a", "?b"))),
]

PRODUCT: LinComb = [(Fraction(1), (comp("?a", "?b"), comp("?c", "?f")))]
