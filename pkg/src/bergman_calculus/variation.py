"""First variation of curvature identities under a change of polarization.

The metric enters a word through two kinds of atoms:

* ``Ginv(a, b~)``: the inverse metric; its variation is ``GDotVar(a, b~)``.
* ``F02`` carrying one antiholomorphic covariant derivative ``F_{;a~}``: the
  Levi-Civita part of that derivative varies by
  ``-Hvar(a~, b~, c) dzbar^b ^ i_{d/dzbar^c} F``.

Holomorphic-frame components ``F``, ``F_{;a}``, ``i_c F``, ``F^E`` and the
wedge operators are inert.  Everything else is rejected.

Extraction turns a varied identity into pointwise consequences: at a point the
one-form ``Hvar(a~, b~, c) dzbar^b`` and the tensor ``GDotVar`` are arbitrary.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .relations import Fd, Preset, normalize, rule
from .terms import (
    CurvAtom, OperatorExpr, Term, atom, h, hb, term, to_text,
)


class VariationError(ValueError):
    pass


class ExtractionError(ValueError):
    pass


INERT = {"FE", "WedgeZbar", "CoWedgeZbar", "Fhat"}

VARIATION_TABLE = {
    "Ginv": "Ginv(a,b~) -> GDotVar(a,b~)",
    "F02;a~": "F_;a~ -> -Hvar(a~,b~,c) Wedge(b~) F(c~)",
    "F02": "inert (no derivative, holomorphic derivatives, interior slots)",
    "FE": "inert",
    "WedgeZbar": "inert",
    "CoWedgeZbar": "inert",
}


def _fresh(t: Term) -> int:
    return max(t.bound_labels() | {0}) + 1


def _vary_atom(a: CurvAtom, nxt: int) -> list[tuple[Fraction, tuple[CurvAtom, ...]]] | None:
    """Variation of one atom as a list of (coeff, replacement word); None if inert."""
    if a.kind == "Ginv":
        return [(Fraction(1), (replace(a, kind="GDotVar"),))]
    if a.kind in INERT:
        return None
    if a.kind == "F02":
        bars = [s for s in a.derivs if s.bar]
        if not bars:
            return None
        if len(a.derivs) == 1 and not a.slots and not a.adjoint:
            b, c = nxt, nxt + 1
            return [(Fraction(-1), (
                atom("Hvar", slots=(a.derivs[0], hb(b), h(c))),
                atom("WedgeZbar", slots=(hb(b),)),
                atom("F02", slots=(hb(c),)),
            ))]
    raise VariationError(f"no declared variation for atom {a}")


def metric_vary(identity: OperatorExpr) -> OperatorExpr:
    """Formal first variation (Leibniz over the atoms of each word)."""
    out: list[Term] = []
    for t in identity.terms:
        for i, a in enumerate(t.word):
            var = _vary_atom(a, _fresh(t))
            if var is None:
                continue
            for c, w in var:
                out.append(replace(t, coeff=t.coeff * c, word=t.word[:i] + w + t.word[i + 1:]))
    return OperatorExpr(out)


def _move_left(word: tuple[CurvAtom, ...], i: int) -> tuple[int, tuple[CurvAtom, ...]]:
    """Move the one-form word[i] to the front; returns (sign, word)."""
    sign = 1
    for a in word[:i]:
        if a.kind == "CoWedgeZbar":
            raise ExtractionError("cannot move a wedge past an interior product")
        if a.form_degree % 2:
            sign = -sign
    return sign, (word[i],) + word[:i] + word[i + 1:]


def _free_singletons(t: Term) -> Term:
    """Bound ids left with one occurrence become free labels."""
    counts: dict[int, int] = {}
    for x in t.labels():
        if isinstance(x, int):
            counts[x] = counts.get(x, 0) + 1
    used = {x for x in t.labels() if isinstance(x, str)}
    names = iter(n for n in "cefgpqrsuvw" if n not in used)
    mapping = {x: next(names) for x, n in sorted(counts.items()) if n == 1}
    return t.relabel(mapping) if mapping else t


def at_normal_point(x: OperatorExpr) -> OperatorExpr:
    """Ginv(a, b~) -> delta: identify the two labels."""
    out = []
    for t in x.terms:
        word = list(t.word)
        while True:
            idx = next((i for i, a in enumerate(word) if a.kind == "Ginv"), None)
            if idx is None:
                break
            g = word.pop(idx)
            s0, s1 = g.slots
            u = replace(t, word=tuple(word))
            if isinstance(s1.label, int):
                u = u.relabel({s1.label: s0.label})
            elif isinstance(s0.label, int):
                u = u.relabel({s0.label: s1.label})
            elif s0.label != s1.label:
                raise ExtractionError("Ginv between distinct free labels")
            t, word = u, list(u.word)
        out.append(replace(t, word=tuple(word)))
    return OperatorExpr(out)


def _strip_symbol(t: Term, symbol: str) -> Term | None:
    word = t.word
    idx = next((i for i, a in enumerate(word) if a.kind == symbol), None)
    if idx is None:
        return None
    s = word[idx]
    word = word[:idx] + word[idx + 1:]
    coeff = t.coeff
    if symbol == "Hvar":
        mid = s.slots[1].label
        w = next((i for i, a in enumerate(word)
                  if a.kind == "WedgeZbar" and a.slots[0].label == mid), None)
        if w is None:
            raise ExtractionError("Hvar without its paired wedge")
        sign, word = _move_left(word, w)
        coeff *= sign
        word = word[1:]
    return _free_singletons(replace(t, coeff=coeff, word=word))


def extract(x: OperatorExpr, symbol: str, m: int | None = None) -> OperatorExpr:
    """Coefficient of an arbitrary ``symbol`` (``Hvar`` or ``GDotVar``) at a point.

    For ``Hvar`` the one-form ``Hvar dzbar^b`` is arbitrary, so ``w ^ R = 0``
    for every (0,1)-form w gives ``R = 0`` only while deg R < m; pass the
    complex dimension ``m`` to enforce this.
    """
    if symbol not in ("Hvar", "GDotVar"):
        raise ValueError("symbol must be Hvar or GDotVar")
    x = at_normal_point(x) if symbol == "Hvar" else x
    out = []
    for t in x.terms:
        r = _strip_symbol(t, symbol)
        if r is None:
            continue
        if symbol == "Hvar":
            deg = sum(a.form_degree for a in r.word)
            if m is None or deg >= m:
                raise ExtractionError(
                    f"extracting from a degree {deg} form needs complex dimension > {deg}")
        if symbol == "GDotVar":
            r = at_normal_point(OperatorExpr([r])).terms[0] if any(
                a.kind == "Ginv" for a in r.word) else r
        out.append(r)
    return OperatorExpr(out)


# ---------------------------------------------------------------- derivations

@dataclass
class Step:
    name: str
    expr: OperatorExpr
    expected: OperatorExpr | None = None

    @property
    def ok(self) -> bool:
        return self.expected is None or (self.expr - self.expected).is_zero()

    def to_json(self) -> dict:
        return {"step": self.name, "expr": to_text(self.expr), "pass": self.ok}


def _w(*atoms: CurvAtom, c=1) -> Term:
    return term(c, word=tuple(atoms))


def Fslot(label) -> CurvAtom:
    return atom("F02", slots=(hb(label),))


def isv12_chain(m: int = 4) -> list[Step]:
    """F ^ F_{;a~} = 0  ==>  F ^ i_c F = 0."""
    ident = OperatorExpr([_w(CurvAtom("F02"), Fd(hb("a")))])
    varied = metric_vary(ident)
    res = extract(varied, "Hvar", m)
    want = OperatorExpr([_w(CurvAtom("F02"), Fslot("c"), c=-1)])
    return [Step("identity", ident), Step("variation", varied), Step("extract", res, want)]


def nu0_check_metric() -> OperatorExpr:
    """-144 k^3 e^{-8kt} times the reduced charge-0 aggregate, metric explicit."""
    return OperatorExpr([
        _w(atom("Ginv", slots=(h(1), hb(2))), Fd(h(1)), Fd(hb(2)), c=8),
        _w(atom("Ginv", slots=(h(1), hb(2))), CurvAtom("F02"),
           atom("FE", slots=(hb(2), h(1))), CurvAtom("F02"), c=6),
        _w(atom("Ginv", slots=(h(1), hb(2))), CurvAtom("F02"), atom("WedgeZbar", slots=(hb(3),)),
           atom("FE", slots=(hb(3), h(1))), Fslot(2), c=-9),
    ])


def nu0_check_chain(m: int = 4) -> list[Step]:
    ident = nu0_check_metric()
    varied = metric_vary(ident)
    hpart = extract(varied, "Hvar", m)
    gpart = extract(varied, "GDotVar")
    # freed labels are named c, e in order of their bound ids
    want_h = OperatorExpr([_w(Fd(h("c")), Fslot("e"), c=-8)])
    want_g = OperatorExpr([
        _w(Fd(h("c")), Fd(hb("e")), c=8),
        _w(CurvAtom("F02"), atom("FE", slots=(hb("e"), h("c"))), CurvAtom("F02"), c=6),
        _w(CurvAtom("F02"), atom("WedgeZbar", slots=(hb(1),)),
           atom("FE", slots=(hb(1), h("c"))), Fslot("e"), c=-9),
    ])
    return [Step("identity", ident), Step("variation", varied),
            Step("extract Hvar", hpart, want_h), Step("extract GDotVar", gpart, want_g)]


# commuting values: a one-form component of F moves past F_{;a~}
COMMUTING = rule([Fd(hb("?x")), Fslot("?y")], [(1, [Fslot("?y"), Fd(hb("?x"))])],
                 "values in a commutative subalgebra")


def charge_minus2_chain(m: int = 4) -> list[Step]:
    """Symmetrized charge -2 relation at b = a, varied twice."""
    Fa = Fd(hb("a"))
    diag = OperatorExpr([_w(Fa, Fa, c=2)])
    v1 = extract(metric_vary(diag), "Hvar", m)
    want1 = OperatorExpr([_w(Fslot("c"), Fa, c=-2), _w(Fa, Fslot("c"), c=-2)])
    comm = normalize(v1, Preset("commuting", (COMMUTING,)))
    want2 = OperatorExpr([_w(Fslot("c"), Fa, c=-4)])
    ifdbf = OperatorExpr([_w(Fslot("c"), Fa)])
    v2 = extract(metric_vary(ifdbf), "Hvar", m)
    want3 = OperatorExpr([_w(Fslot("c"), Fslot("e"))])
    return [Step("symmetrized diagonal", diag), Step("first variation", v1, want1),
            Step("commuting values", comm, want2), Step("second variation", v2, want3)]


CHAINS = {"isv12": isv12_chain, "nu0": nu0_check_chain, "charge-2": charge_minus2_chain}
