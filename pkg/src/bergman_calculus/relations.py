"""Oriented rewriting of curvature words under the filtration hypotheses.

Rules match contiguous subwords.  Index labels of the form ``"?x"`` in a
rule are metavariables; integer labels on a right-hand side are fresh bound
indices.  Each rule must strictly decrease :func:`measure`, which makes
normalization terminate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, Sequence

import sympy

from .terms import (
    CurvAtom, IndexSlot, OperatorExpr, Term, atom, h, hb, term,
)

Word = tuple[CurvAtom, ...]
LinComb = list[tuple[Fraction, Word]]


class NonOrientable(ValueError):
    pass


class InconsistentRelations(ValueError):
    pass


def is_meta(label) -> bool:
    return isinstance(label, str) and label.startswith("?")


def measure(word: Word) -> tuple:
    """Well-founded order used to orient relations.

    Components: Fhat letters, holomorphic-before-antiholomorphic derivative
    inversions, distance-weighted holomorphic derivatives, squared
    antiholomorphic derivative counts, distance-weighted antiholomorphic
    derivatives, then length.
    """
    n = len(word)
    fhat = sum(a.kind == "Fhat" for a in word)
    inv = hol = asq = alft = 0
    for i, a in enumerate(word):
        bars = [s.bar for s in a.derivs]
        inv += sum(1 for p in range(len(bars)) for q in range(p + 1, len(bars))
                   if not bars[p] and bars[q])
        nh = bars.count(False)
        na = bars.count(True)
        hol += nh * (n - 1 - i)
        asq += na * na
        alft += na * (n - 1 - i)
    return (fhat, inv, hol, asq, alft, n)


def _word_meta(word: Word) -> set[str]:
    return {s.label for a in word for s in a.indices() if is_meta(s.label)}


def _word_delta(word: Word) -> int:
    return sum(a.formDelta for a in word)


def _word_str(word: Word) -> str:
    from .terms import _atom_text
    return " ".join(_atom_text(a) for a in word) or "1"


@dataclass(frozen=True)
class RewriteRule:
    lhs: Word
    rhs: tuple[tuple[Fraction, Word], ...]
    provenance: str = ""

    def __post_init__(self):
        meta = _word_meta(self.lhs)
        for c, w in self.rhs:
            if w and _word_delta(w) != _word_delta(self.lhs):
                raise ValueError(f"formDelta mismatch in rule {self}")
            if not _word_meta(w) <= meta:
                raise ValueError(f"rhs metavariables not bound by lhs in {self}")
            if measure(w) >= measure(self.lhs):
                raise NonOrientable(f"rule does not decrease the order: {self}")

    def __str__(self) -> str:
        rhs = " + ".join(f"({c}) {_word_str(w)}" for c, w in self.rhs) or "0"
        return f"{_word_str(self.lhs)} -> {rhs}"

    def match(self, word: Word, pos: int) -> dict | None:
        n = len(self.lhs)
        if pos + n > len(word):
            return None
        bind: dict = {}
        for p, a in zip(self.lhs, word[pos:pos + n]):
            if (p.kind, p.adjoint, len(p.derivs), len(p.slots)) != (
                    a.kind, a.adjoint, len(a.derivs), len(a.slots)):
                return None
            for ps, s in zip(p.indices(), a.indices()):
                if ps.bar != s.bar:
                    return None
                if is_meta(ps.label):
                    if bind.setdefault(ps.label, s.label) != s.label:
                        return None
                elif ps.label != s.label:
                    return None
        return bind

    def instantiate(self, bind: dict, fresh: int) -> list[tuple[Fraction, Word]]:
        out = []
        for c, w in self.rhs:
            ints = sorted({s.label for a in w for s in a.indices() if isinstance(s.label, int)})
            mp = dict(bind)
            mp.update({x: fresh + i + 1 for i, x in enumerate(ints)})
            out.append((c, tuple(a.relabel(mp) for a in w)))
        return out

    def relation(self) -> LinComb:
        return [(Fraction(1), self.lhs)] + [(-c, w) for c, w in self.rhs]

    def to_json(self) -> dict:
        return {
            "lhs": [a.to_json() for a in self.lhs],
            "rhs": [{"coeff": str(c), "word": [a.to_json() for a in w]} for c, w in self.rhs],
            "provenance": self.provenance,
            "text": str(self),
        }


def rule(lhs: Sequence[CurvAtom], rhs: Iterable = (), provenance: str = "") -> RewriteRule:
    return RewriteRule(tuple(lhs), tuple((Fraction(c), tuple(w)) for c, w in rhs), provenance)


# ---------------------------------------------------------------- orientation

def _rref(rows: list[list[Fraction]]) -> list[list[Fraction]]:
    if not rows:
        return []
    M = sympy.Matrix([[sympy.Rational(x.numerator, x.denominator) for x in r] for r in rows])
    R, _ = M.rref()
    out = []
    for i in range(R.rows):
        r = [Fraction(int(sympy.fraction(v)[0]), int(sympy.fraction(v)[1])) for v in R.row(i)]
        if any(r):
            out.append(r)
    return out


def orient(relations: Sequence[LinComb], provenance: str = "") -> list[RewriteRule]:
    """Row-reduce word relations (each = 0) and orient every pivot row.

    Columns are ordered by decreasing :func:`measure`, so each pivot word
    is the largest word of its row.
    """
    words: dict[Word, None] = {}
    for rel in relations:
        for _, w in rel:
            words.setdefault(w, None)
    cols = sorted(words, key=lambda w: (measure(w), _word_str(w)), reverse=True)
    idx = {w: i for i, w in enumerate(cols)}
    rows = []
    for rel in relations:
        r = [Fraction(0)] * len(cols)
        for c, w in rel:
            r[idx[w]] += Fraction(c)
        rows.append(r)
    out = []
    for r in _rref(rows):
        p = next(i for i, x in enumerate(r) if x)
        if cols[p] == ():
            raise InconsistentRelations("relations imply 1 = 0")
        rhs = [(-r[j] / r[p], cols[j]) for j in range(p + 1, len(cols)) if r[j]]
        out.append(rule(cols[p], rhs, provenance))
    return out


def _derive_word(word: Word, idx: IndexSlot) -> LinComb:
    return [(Fraction(1), word[:i] + (replace(a, derivs=a.derivs + (idx,)),) + word[i + 1:])
            for i, a in enumerate(word)]


def derive_relation(rel: LinComb, idx: IndexSlot) -> LinComb:
    out: dict[Word, Fraction] = {}
    for c, w in rel:
        for d, w2 in _derive_word(w, idx):
            out[w2] = out.get(w2, Fraction(0)) + c * d
    return [(c, w) for w, c in out.items() if c]


def leibniz_derive(r: RewriteRule | LinComb, idx: IndexSlot) -> list[RewriteRule]:
    """Differentiate ``lhs - rhs = 0`` along ``idx`` and orient the result."""
    rel = r.relation() if isinstance(r, RewriteRule) else list(r)
    if not rel:
        return []
    used = set().union(*(_word_meta(w) for _, w in rel))
    if idx.label in used:
        raise ValueError(f"derivative index {idx.label} clashes with rule metavariables")
    d = derive_relation(rel, idx)
    if not d:
        return []
    prov = (r.provenance if isinstance(r, RewriteRule) else "relation") + f" d/{idx.label}"
    return orient([d], prov)


# ---------------------------------------------------------------- presets

X, Y, C = "?x", "?y", "?c"


def Fd(*derivs: IndexSlot, slots: Sequence[IndexSlot] = (), adjoint: bool = False) -> CurvAtom:
    return atom("F02", derivs, slots, adjoint)


F0 = Fd()
F11 = atom("F11")
F20 = atom("F20")

COMMUTE = rule(
    [Fd(h(X), hb(Y))],
    [(1, [Fd(hb(Y), h(X))]),
     (1, [atom("FE", slots=(hb(Y), h(X))), F0]), (-1, [F0, atom("FE", slots=(hb(Y), h(X)))]),
     (1, [atom("Riem", slots=(hb(Y), h(X))), F0]), (-1, [F0, atom("Riem", slots=(hb(Y), h(X)))])],
    "commutation of covariant derivatives on F",
)

FHAT_EXPAND = rule(
    [atom("Fhat")],
    [(-2, [atom("WedgeZbar", slots=(hb(1),)), atom("CoWedgeZbar", slots=(h(2),)),
           atom("FE", slots=(hb(1), h(2)))]),
     (-2, [atom("WedgeZbar", slots=(hb(1),)), atom("CoWedgeZbar", slots=(h(2),)),
           atom("Riem", slots=(hb(1), h(2)))])],
    "Fhat as -2 e(dzbar^j) e*(dzbar^l) X_{jbar l}; scalar trace term dropped",
)


def sqv1_array(q: int) -> list[Fraction]:
    from .model_operator import double_factorial as df
    return [Fraction(2 ** (b + 1) * df(2 * q - 2 * b + 1), df(2 * q + 3) * math.factorial(q - b))
            for b in range(q + 1)]


def _power(q: int) -> Word:
    return (F0,) * q


@dataclass(frozen=True)
class Preset:
    name: str
    rules: tuple[RewriteRule, ...] = ()
    letter_rules: tuple[RewriteRule, ...] = ()

    def all_rules(self) -> tuple[RewriteRule, ...]:
        return self.rules

    def extended(self, name: str, extra: Iterable[RewriteRule]) -> "Preset":
        return Preset(name, self.rules + tuple(extra))

    def with_display(self) -> "Preset":
        return self.extended(self.name + "+fhat", [FHAT_EXPAND])

    def includes(self, other: "Preset") -> bool:
        return set(other.rules) <= set(self.rules)

    def to_json(self) -> dict:
        return {"name": self.name, "rules": [r.to_json() for r in self.rules]}


def sqv1(q: int, antiholomorphic: bool = False) -> Preset:
    """(F)^{q+1} = 0 with its holomorphic Leibniz consequence.

    The antiholomorphic consequence is opt-in so that the z-bar block keeps
    the representative used for the coefficient array.
    """
    rels = [[(Fraction(1), _power(q + 1))]]
    rels.append([(Fraction(1), _power(b) + (Fd(h(X)),) + _power(q - b)) for b in range(q + 1)])
    if antiholomorphic:
        rels.append([(Fraction(1), _power(b) + (Fd(hb(X)),) + _power(q - b)) for b in range(q + 1)])
    rules = orient(rels, f"F^{q + 1} = 0 and its derivative")
    name = f"sqv1({q})" + ("+bar" if antiholomorphic else "")
    return Preset(name, tuple(rules) + (COMMUTE,))


def _zero_words(rules: Iterable[RewriteRule]) -> list[Word]:
    return [r.lhs for r in rules if not r.rhs]


def sqv2(q: int) -> Preset:
    base = sqv1(q)
    d = sqv1_array(q)
    leib = [(Fraction(1), _power(b) + (Fd(hb(X)),) + _power(q - b)) for b in range(q + 1)]
    arr = [(d[b], _power(b) + (Fd(hb(X)),) + _power(q - b)) for b in range(q + 1)]
    new = orient([leib, arr], "antiholomorphic Leibniz + coefficient-array relation")
    extra = list(new)
    have = {r.lhs for r in base.rules} | {r.lhs for r in new}
    for w in _zero_words(new):
        rel = [(Fraction(1), w)]
        for idx in (h(Y), hb(Y)):
            for r in leibniz_derive(rel, idx):
                if r.lhs not in have:
                    extra.append(replace(r, provenance=f"derivative of {_word_str(w)} = 0"))
                    have.add(r.lhs)
    return Preset(f"sqv2({q})", base.rules + tuple(extra))


def is1v2() -> Preset:
    p = sqv2(1)
    extra = [
        rule([F0, Fd(slots=(hb(C),))], [], "F ^ i_Z F = 0 (metric variation)"),
        rule([Fd(slots=(hb(C),)), F0], [], "i_Z F ^ F = 0 (contraction of F^F = 0)"),
    ]
    return p.extended("is1v2", extra)


def is1v3() -> Preset:
    p = is1v2()
    extra = [
        rule([F0, F11, F0], [], "F02 F11 F02 = 0"),
        rule([F0, Fd(h(X))], [], "F ^ dF = 0"),
        rule([Fd(h(X)), F0], [], "dF ^ F = 0 (with the holomorphic Leibniz rule)"),
        rule([Fd(h(X)), Fd(slots=(hb(C),))], [], "F_{;a} ^ i_Z F = 0 (metric variation)"),
    ]
    return p.extended("is1v3", extra)


def chern_generic() -> Preset:
    return Preset("chern-generic", ())


def mirrored(p: Preset) -> Preset:
    """Add the conjugate of every letter rule (F02 <-> F20)."""
    swap = {"F02": "F20", "F20": "F02"}
    extra = []
    for r in p.rules:
        if all(a.kind in ("F02", "F11", "F20") and not a.derivs and not a.slots and not a.adjoint
               for a in r.lhs) and not r.rhs:
            extra.append(rule([replace(a, kind=swap.get(a.kind, a.kind)) for a in r.lhs], [],
                              "conjugate of " + r.provenance))
    return p.extended(p.name + "+mirror", [r for r in extra if r not in p.rules])


def get_preset(spec: str | None) -> Preset:
    """Parse ``name[:q]`` (``sqv1:2``, ``sqv2:1``, ``is1v3``, ...)."""
    if not spec or spec in ("none", "chern-generic"):
        return chern_generic()
    name, _, arg = spec.partition(":")
    if name == "sqv1":
        return sqv1(int(arg or 1))
    if name == "sqv1bar":
        return sqv1(int(arg or 1), antiholomorphic=True)
    if name == "sqv2":
        return sqv2(int(arg or 1))
    if name == "is1v2":
        return is1v2()
    if name == "is1v3":
        return is1v3()
    raise ValueError(f"unknown preset {spec!r}")


# ---------------------------------------------------------------- normalization

def _rewrite_once(t: Term, rules: Sequence[RewriteRule]):
    for pos in range(len(t.word)):
        for r in rules:
            b = r.match(t.word, pos)
            if b is None:
                continue
            fresh = max(t.bound_labels() | {0})
            out = []
            for c, w in r.instantiate(b, fresh):
                out.append(replace(t, coeff=t.coeff * c,
                                   word=t.word[:pos] + w + t.word[pos + len(r.lhs):]))
            return r, out
    return None


def normalize(w: OperatorExpr, p: Preset | Sequence[RewriteRule], trace: list | None = None,
              max_rounds: int = 200) -> OperatorExpr:
    """Rewrite every term to a normal form; ``trace`` collects (rule, term) steps."""
    rules = p.rules if isinstance(p, Preset) else tuple(p)
    cur = w
    for _ in range(max_rounds):
        changed = False
        out: list[Term] = []
        for t in cur.terms:
            res = _rewrite_once(t, rules)
            if res is None:
                out.append(t)
                continue
            changed = True
            r, new = res
            if trace is not None:
                trace.append((r, t))
            out.extend(new)
        cur = OperatorExpr(out, cur.remainder)
        if not changed:
            return cur
    raise RuntimeError("normalization did not terminate")


def word_expr(*words: Word, coeffs: Sequence = ()) -> OperatorExpr:
    cs = list(coeffs) or [1] * len(words)
    return OperatorExpr([term(c, word=w) for c, w in zip(cs, words)])


def kills(word: Word, p: Preset) -> bool:
    return normalize(word_expr(word), p).is_zero()
