"""Graded algebra of monomial differential operators with curvature words.

A :class:`Term` is ``coeff * k^kpow * e^{4*expd*t*k} * t^tpow * m^mpow
* z^J zbar^K d_z^D d_zbar^E * W`` where ``W`` is a noncommutative word of
:class:`CurvAtom` letters acting on antiholomorphic forms with values in
End(E).  Index labels are ``int`` when bound (Einstein summed, each occurring
exactly twice in a term) and ``str`` when free.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Iterable, NamedTuple

Label = int | str


class StructureError(ValueError):
    """Malformed term: a bound index does not occur exactly twice."""


class IndexSlot(NamedTuple):
    label: Label
    bar: bool = False

    @property
    def bound(self) -> bool:
        return isinstance(self.label, int)

    def relabel(self, mapping: dict) -> "IndexSlot":
        return IndexSlot(mapping.get(self.label, self.label), self.bar)


def h(label: Label) -> IndexSlot:
    return IndexSlot(label, False)


def hb(label: Label) -> IndexSlot:
    return IndexSlot(label, True)


def lab_key(label: Label) -> tuple:
    return (0, label, "") if isinstance(label, int) else (1, 0, label)


def slot_key(s: IndexSlot) -> tuple:
    return lab_key(s.label) + (s.bar,)


KINDS = (
    "F02", "F20", "F11", "FE", "Ric", "Riem", "Fhat",
    "WedgeZbar", "CoWedgeZbar", "Hvar", "GDotVar", "Ginv",
)
_KIND_TAG = {k: i for i, k in enumerate(KINDS)}


@dataclass(frozen=True)
class CurvAtom:
    """One letter of a curvature word.

    ``F02`` is e(F^{0,2}) (``adjoint`` gives e*); interior slots on F02 mean
    i_{d/dzbar^c} F.  ``Riem`` with two slots is the curvature acting on forms
    as a derivation, with four slots a scalar.  ``FE`` is the End(E)-valued
    curvature component.  ``Ginv`` is the inverse metric (an addition used
    only by the variation calculus).
    """

    kind: str
    derivs: tuple[IndexSlot, ...] = ()
    slots: tuple[IndexSlot, ...] = ()
    adjoint: bool = False

    def __post_init__(self):
        if self.kind not in _KIND_TAG:
            raise ValueError(f"unknown atom kind {self.kind!r}")

    @property
    def form_degree(self) -> int:
        if self.kind == "F02":
            return 2 - len(self.slots)
        if self.kind in ("F20", "F11"):
            return 2
        if self.kind == "WedgeZbar":
            return 1
        return 0

    @property
    def formDelta(self) -> int:
        if self.kind == "F02":
            d = 2 - len(self.slots)
            return -d if self.adjoint else d
        if self.kind == "WedgeZbar":
            return 1
        if self.kind == "CoWedgeZbar":
            return -1
        return 0

    @property
    def is_scalar(self) -> bool:
        if self.kind == "Riem":
            return len(self.slots) == 4
        return self.kind in ("Ric", "Hvar", "GDotVar", "Ginv")

    def indices(self) -> tuple[IndexSlot, ...]:
        return self.derivs + self.slots

    def relabel(self, mapping: dict) -> "CurvAtom":
        if not mapping:
            return self
        return replace(
            self,
            derivs=tuple(s.relabel(mapping) for s in self.derivs),
            slots=tuple(s.relabel(mapping) for s in self.slots),
        )

    def sort_key(self) -> tuple:
        return (
            _KIND_TAG[self.kind],
            self.adjoint,
            tuple(slot_key(s) for s in self.derivs),
            tuple(slot_key(s) for s in self.slots),
        )

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "derivs": [[s.label, s.bar] for s in self.derivs],
            "slots": [[s.label, s.bar] for s in self.slots],
            "adjoint": self.adjoint,
            "formDelta": self.formDelta,
        }

    @classmethod
    def from_json(cls, d: dict) -> "CurvAtom":
        return cls(
            d["kind"],
            tuple(IndexSlot(a, bool(b)) for a, b in d.get("derivs", [])),
            tuple(IndexSlot(a, bool(b)) for a, b in d.get("slots", [])),
            bool(d.get("adjoint", False)),
        )


def atom(kind: str, derivs: Iterable[IndexSlot] = (), slots: Iterable[IndexSlot] = (),
         adjoint: bool = False) -> CurvAtom:
    return CurvAtom(kind, tuple(derivs), tuple(slots), adjoint)


F = CurvAtom("F02")
Fstar = CurvAtom("F02", adjoint=True)

# antisymmetric two-slot atoms: X_{ab} = -X_{ba}
_ANTISYM = ("FE",)


def _is_antisym(a: CurvAtom) -> bool:
    return len(a.slots) == 2 and (a.kind in _ANTISYM or a.kind == "Riem")


@dataclass(frozen=True)
class RemainderClass:
    weightBound: int
    expdBound: int | None = None
    note: str = ""

    def to_json(self) -> dict:
        return {"weightBound": self.weightBound, "expdBound": self.expdBound, "note": self.note}


@dataclass(frozen=True)
class Term:
    coeff: Fraction
    kpow: int = 0
    expd: int = 0
    tpow: int = 0
    mpow: int = 0
    z: tuple[Label, ...] = ()
    zb: tuple[Label, ...] = ()
    dz: tuple[Label, ...] = ()
    dzb: tuple[Label, ...] = ()
    word: tuple[CurvAtom, ...] = ()

    @property
    def key(self) -> tuple:
        return (self.kpow, self.expd, self.tpow, self.mpow, self.z, self.zb,
                self.dz, self.dzb, self.word)

    def sort_key(self) -> tuple:
        return (
            self.expd, -self.kpow, self.tpow, self.mpow,
            len(self.word), tuple(a.sort_key() for a in self.word),
            tuple(lab_key(x) for x in self.z), tuple(lab_key(x) for x in self.zb),
            tuple(lab_key(x) for x in self.dz), tuple(lab_key(x) for x in self.dzb),
        )

    @property
    def weight(self) -> int:
        return weight_of(self)

    @property
    def charge(self) -> int:
        return charge_of(self)

    @property
    def has_derivatives(self) -> bool:
        return bool(self.dz or self.dzb)

    def scaled(self, c) -> "Term":
        return replace(self, coeff=self.coeff * Fraction(c))

    def labels(self) -> list[Label]:
        out = list(self.z) + list(self.zb) + list(self.dz) + list(self.dzb)
        for a in self.word:
            out.extend(s.label for s in a.indices())
        return out

    def bound_labels(self) -> set[int]:
        return {x for x in self.labels() if isinstance(x, int)}

    def relabel(self, mapping: dict) -> "Term":
        if not mapping:
            return self
        g = lambda xs: tuple(mapping.get(x, x) for x in xs)  # noqa: E731
        return replace(
            self, z=g(self.z), zb=g(self.zb), dz=g(self.dz), dzb=g(self.dzb),
            word=tuple(a.relabel(mapping) for a in self.word),
        )

    def shifted_apart(self, offset: int) -> "Term":
        return self.relabel({b: b + offset for b in self.bound_labels()})

    def to_json(self) -> dict:
        return {
            "coeff": str(self.coeff),
            "kPow": self.kpow,
            "expd": self.expd,
            "tPow": self.tpow,
            "mPow": self.mpow,
            "zMono": list(self.z),
            "zbarMono": list(self.zb),
            "dz": list(self.dz),
            "dzbar": list(self.dzb),
            "word": [a.to_json() for a in self.word],
        }

    @classmethod
    def from_json(cls, d: dict) -> "Term":
        return cls(
            Fraction(d["coeff"]), d.get("kPow", 0), d.get("expd", 0), d.get("tPow", 0),
            d.get("mPow", 0), tuple(d.get("zMono", ())), tuple(d.get("zbarMono", ())),
            tuple(d.get("dz", ())), tuple(d.get("dzbar", ())),
            tuple(CurvAtom.from_json(a) for a in d.get("word", ())),
        )


def term(coeff=1, *, kpow=0, expd=0, tpow=0, mpow=0, z=(), zb=(), dz=(), dzb=(), word=()) -> Term:
    return Term(Fraction(coeff), kpow, expd, tpow, mpow, tuple(z), tuple(zb), tuple(dz),
                tuple(dzb), tuple(word))


def weight_of(t: Term) -> int:
    return 2 * t.kpow - len(t.z) - len(t.zb) + len(t.dz) + len(t.dzb) - 2 * t.tpow


def charge_of(t: Term) -> int:
    return (len(t.z) - len(t.dz)) - (len(t.zb) - len(t.dzb))


# ---------------------------------------------------------------- canonical form

def _check_binding(t: Term) -> None:
    counts: dict[int, int] = {}
    for x in t.labels():
        if isinstance(x, int):
            counts[x] = counts.get(x, 0) + 1
    bad = {x: n for x, n in counts.items() if n != 2}
    if bad:
        raise StructureError(f"bound ids with wrong multiplicity {bad} in {t}")


def _fix_slots(t: Term) -> Term | None:
    """Order antisymmetric slot pairs (antiholomorphic first) and wedge runs."""
    coeff = t.coeff
    word = list(t.word)
    for i, a in enumerate(word):
        if _is_antisym(a):
            s0, s1 = a.slots
            if (not s0.bar, slot_key(s0)) > (not s1.bar, slot_key(s1)):
                word[i] = replace(a, slots=(s1, s0))
                coeff = -coeff
            elif s0 == s1:
                return None
    # bubble-sort each maximal run of WedgeZbar atoms
    i = 0
    while i < len(word):
        if word[i].kind != "WedgeZbar":
            i += 1
            continue
        j = i
        while j < len(word) and word[j].kind == "WedgeZbar":
            j += 1
        run = word[i:j]
        swapped = True
        while swapped:
            swapped = False
            for r in range(len(run) - 1):
                ka, kb = slot_key(run[r].slots[0]), slot_key(run[r + 1].slots[0])
                if ka == kb:
                    return None
                if ka > kb:
                    run[r], run[r + 1] = run[r + 1], run[r]
                    coeff = -coeff
                    swapped = True
        word[i:j] = run
        i = j
    return replace(t, coeff=coeff, word=tuple(word))


def _rename(t: Term, extra_order: tuple = ()) -> tuple[Term, dict]:
    order: list[int] = []
    seen: set[int] = set()

    def visit(x):
        if isinstance(x, int) and x not in seen:
            seen.add(x)
            order.append(x)

    for a in t.word:
        for s in a.indices():
            visit(s.label)
    for x in extra_order:
        visit(x)
    for part in (t.dz, t.dzb, t.z, t.zb):
        for x in sorted(part, key=lab_key):
            visit(x)
    mapping = {old: new for new, old in enumerate(order, start=1)}
    return t.relabel(mapping), mapping


def _sorted_monos(t: Term) -> Term:
    s = lambda xs: tuple(sorted(xs, key=lab_key))  # noqa: E731
    return replace(t, z=s(t.z), zb=s(t.zb), dz=s(t.dz), dzb=s(t.dzb))


def _one_pass(t: Term, extra_order: tuple = ()) -> tuple[Term | None, tuple]:
    t, mapping = _rename(t, extra_order)
    # keep the loose-label order in the new names for the next pass
    extra_order = tuple(mapping.get(x, x) for x in extra_order)
    t2 = _fix_slots(t)
    if t2 is None:
        return None, extra_order
    return _sorted_monos(t2), extra_order


def _stable(t: Term, extra_order: tuple = ()) -> Term | None:
    for _ in range(8):
        n, extra_order = _one_pass(t, extra_order)
        if n is None or n == t:
            return n
        t = n
    return t


def canonicalize(t: Term) -> Term | None:
    """Canonical representative of ``t``; ``None`` when the term vanishes."""
    if t.coeff == 0:
        return None
    _check_binding(t)
    scal = [a for a in t.word if a.is_scalar]
    rest = tuple(a for a in t.word if not a.is_scalar)
    # bound ids that never reach the word are ordered by brute force
    in_word = {s.label for a in t.word for s in a.indices()}
    loose = sorted({x for x in t.bound_labels() if x not in in_word})
    scal_orders = (
        [tuple(scal)] if len(scal) < 2
        else {tuple(p) for p in itertools.permutations(scal)}
    )
    best = None
    for so in scal_orders:
        for lo in itertools.permutations(loose) if len(loose) > 1 else [tuple(loose)]:
            cand = _stable(replace(t, word=so + rest), lo)
            if cand is None:
                return None
            if best is None or _cmp_key(cand) < _cmp_key(best):
                best = cand
    return best


def _cmp_key(t: Term) -> tuple:
    return t.sort_key()


# ---------------------------------------------------------------- expressions

class OperatorExpr:
    """Canonical linear combination of Terms plus a remainder ledger."""

    __slots__ = ("_terms", "remainder")

    def __init__(self, terms: Iterable[Term] = (), remainder: Iterable[RemainderClass] = ()):
        acc: dict[tuple, Fraction] = {}
        for t in terms:
            c = canonicalize(t)
            if c is None:
                continue
            acc[c.key] = acc.get(c.key, Fraction(0)) + c.coeff
        self._terms = {k: v for k, v in acc.items() if v != 0}
        self.remainder = frozenset(remainder)

    @classmethod
    def _raw(cls, acc: dict, remainder) -> "OperatorExpr":
        e = cls.__new__(cls)
        e._terms = {k: v for k, v in acc.items() if v != 0}
        e.remainder = frozenset(remainder)
        return e

    @staticmethod
    def _mk(key: tuple, c: Fraction) -> Term:
        return Term(c, *key)

    @property
    def terms(self) -> list[Term]:
        return sorted((self._mk(k, c) for k, c in self._terms.items()), key=Term.sort_key)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, t: Term) -> Fraction:
        c = canonicalize(replace(t, coeff=Fraction(1)))
        if c is None:
            return Fraction(0)
        return self._terms.get(c.key, Fraction(0)) * c.coeff

    def __add__(self, other: "OperatorExpr") -> "OperatorExpr":
        acc = dict(self._terms)
        for k, v in other._terms.items():
            acc[k] = acc.get(k, Fraction(0)) + v
        return OperatorExpr._raw(acc, self.remainder | other.remainder)

    def __neg__(self) -> "OperatorExpr":
        return self.scale(-1)

    def __sub__(self, other: "OperatorExpr") -> "OperatorExpr":
        return self + (-other)

    def scale(self, c) -> "OperatorExpr":
        c = Fraction(c)
        return OperatorExpr._raw({k: v * c for k, v in self._terms.items()}, self.remainder)

    def filter(self, pred) -> "OperatorExpr":
        return OperatorExpr._raw(
            {t.key: t.coeff for t in self.terms if pred(t)}, self.remainder)

    def with_remainder(self, extra: Iterable[RemainderClass]) -> "OperatorExpr":
        return OperatorExpr._raw(self._terms, self.remainder | frozenset(extra))

    def same_terms(self, other: "OperatorExpr") -> bool:
        return self._terms == other._terms

    def __eq__(self, other) -> bool:
        return isinstance(other, OperatorExpr) and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        return f"OperatorExpr({len(self)} terms)"

    def __str__(self) -> str:
        return to_text(self)

    def to_json(self) -> dict:
        return {
            "terms": [t.to_json() for t in self.terms],
            "remainder": sorted((r.to_json() for r in self.remainder),
                                key=lambda d: (d["weightBound"], str(d["expdBound"]), d["note"])),
        }

    @classmethod
    def from_json(cls, d: dict) -> "OperatorExpr":
        rem = [RemainderClass(r["weightBound"], r.get("expdBound"), r.get("note", ""))
               for r in d.get("remainder", ())]
        return cls([Term.from_json(t) for t in d.get("terms", ())], rem)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=1)


def expr(*terms: Term) -> OperatorExpr:
    return OperatorExpr(terms)


IDENTITY = OperatorExpr([term(1)])


def sum_exprs(xs: Iterable[OperatorExpr]) -> OperatorExpr:
    acc: dict = {}
    rem: set = set()
    for x in xs:
        for k, v in x._terms.items():
            acc[k] = acc.get(k, Fraction(0)) + v
        rem |= x.remainder
    return OperatorExpr._raw(acc, rem)


# ---------------------------------------------------------------- composition

def _identify(t: Term, keep: Label, drop: Label) -> Term | None:
    """Impose delta(keep, drop); free labels only contract to themselves."""
    if isinstance(drop, int):
        return t.relabel({drop: keep})
    if isinstance(keep, int):
        return t.relabel({keep: drop})
    return t if keep == drop else None


def _hit(derivs: tuple, monos: tuple):
    """Leibniz: all ways derivatives hit monomial factors.

    Yields (passing derivs, remaining monos, list of (deriv, mono) pairs).
    """
    if not derivs:
        yield (), monos, []
        return
    d, rest = derivs[0], derivs[1:]
    for passing, left, pairs in _hit(rest, monos):
        yield (d,) + passing, left, pairs
        for i in range(len(left)):
            yield passing, left[:i] + left[i + 1:], pairs + [(d, left[i])]


def compose_terms(a: Term, b: Term) -> list[Term]:
    off = max(a.bound_labels() | {0})
    b = b.shifted_apart(off)
    out = []
    for pdz, zrest, pz in _hit(a.dz, b.z):
        for pdzb, zbrest, pzb in _hit(a.dzb, b.zb):
            t = Term(
                a.coeff * b.coeff, a.kpow + b.kpow, a.expd + b.expd, a.tpow + b.tpow,
                a.mpow + b.mpow, a.z + zrest, a.zb + zbrest, pdz + b.dz, pdzb + b.dzb,
                a.word + b.word,
            )
            for d, x in pz + pzb:
                t = _identify(t, d, x)
                if t is None:
                    break
            if t is not None:
                out.append(t)
    return out


def truncation_class(cutoff: int, note: str) -> RemainderClass:
    return RemainderClass(cutoff - 1, None, note)


def normal_order_compose(a: OperatorExpr, b: OperatorExpr, cutoff: int | None = None) -> OperatorExpr:
    out: list[Term] = []
    rem = set(a.remainder | b.remainder)
    dropped = False
    for ta in a.terms:
        for tb in b.terms:
            if cutoff is not None and weight_of(ta) + weight_of(tb) < cutoff:
                dropped = True
                continue
            for t in compose_terms(ta, tb):
                if cutoff is not None and weight_of(t) < cutoff:
                    dropped = True
                    continue
                out.append(t)
    if dropped:
        rem.add(truncation_class(cutoff, "truncate"))
    return OperatorExpr(out, rem)


def apply_to_function(a: OperatorExpr, u: OperatorExpr, cutoff: int | None = None) -> OperatorExpr:
    """The function a(u): compose, then drop derivatives acting on constants."""
    return normal_order_compose(a, u, cutoff).filter(lambda t: not t.has_derivatives)


# ---------------------------------------------------------------- form degree

def word_degree_path(word: tuple[CurvAtom, ...], din: int, m: int | None = None) -> int | None:
    """Output degree of the word applied to degree ``din`` (None if it vanishes)."""
    d = din
    for a in reversed(word):
        d += a.formDelta
        if d < 0 or (m is not None and d > m):
            return None
    return d


def project_degrees(x: OperatorExpr, qin: int, qout: int, m: int | None = None) -> OperatorExpr:
    return x.filter(lambda t: word_degree_path(t.word, 2 * qin, m) == 2 * qout)


def output_degree(t: Term, din: int) -> int | None:
    return word_degree_path(t.word, din)


# ---------------------------------------------------------------- printing

_LETTERS = "abcdefghijklmnopqrstuvwxyz"


def _name(x: Label) -> str:
    if isinstance(x, int):
        return _LETTERS[(x - 1) % 26] + ("" if x <= 26 else str((x - 1) // 26))
    return x


def _idx_text(s: IndexSlot) -> str:
    return _name(s.label) + ("~" if s.bar else "")


def _atom_text(a: CurvAtom) -> str:
    base = {"F02": "F", "F20": "F20", "F11": "F11", "FE": "FE", "Ric": "Ric", "Riem": "R",
            "Fhat": "Fhat", "WedgeZbar": "e", "CoWedgeZbar": "e*", "Hvar": "H",
            "GDotVar": "gdot", "Ginv": "ginv"}[a.kind]
    if a.adjoint:
        base += "*"
    s = base
    if a.slots:
        s += "(" + ",".join(_idx_text(x) for x in a.slots) + ")"
    if a.derivs:
        s += "_;" + "".join(_idx_text(x) for x in a.derivs)
    return s


def term_text(t: Term) -> str:
    parts = [str(t.coeff)]
    if t.kpow:
        parts.append(f"k^{t.kpow}")
    if t.expd:
        parts.append(f"e^{4 * t.expd}kt")
    if t.tpow:
        parts.append(f"t^{t.tpow}")
    if t.mpow:
        parts.append(f"m^{t.mpow}")
    parts += [f"z{_name(x)}" for x in t.z] + [f"zb{_name(x)}" for x in t.zb]
    parts += [f"dz{_name(x)}" for x in t.dz] + [f"dzb{_name(x)}" for x in t.dzb]
    parts += [_atom_text(a) for a in t.word]
    return " ".join(parts)


def to_text(x: OperatorExpr) -> str:
    if x.is_zero():
        return "0"
    return "\n".join(term_text(t) for t in x.terms)


def _latex_idx(s: IndexSlot) -> str:
    n = _name(s.label)
    return rf"\bar {n}" if s.bar else n


def _latex_atom(a: CurvAtom) -> str:
    d = "".join(_latex_idx(s) + " " for s in a.derivs).strip()
    sl = ", ".join(_latex_idx(s) for s in a.slots)
    if a.kind == "F02":
        core = "F_{A" + (";" + d if d else "") + "}^{0,2}"
        if a.slots:
            core = rf"i_{{\partial_{{{sl}}}}}" + core
        return rf"e^*({core})" if a.adjoint else rf"e({core})"
    if a.kind == "WedgeZbar":
        return rf"e(d\bar z^{{{_name(a.slots[0].label)}}})"
    if a.kind == "CoWedgeZbar":
        return rf"e^*(d\bar z^{{{_name(a.slots[0].label)}}})"
    sym = {"F20": "F_A^{2,0}", "F11": "F_A^{1,1}", "FE": "F^E", "Ric": r"\mathrm{Ric}",
           "Riem": "R", "Fhat": r"\mathcal{\hat F}", "Hvar": "H", "GDotVar": r"\dot g",
           "Ginv": "g^{-1}"}[a.kind]
    if d:
        sym += "_{;" + d + "}"
    return sym + (f"({sl})" if sl else "")


def term_latex(t: Term) -> str:
    c = t.coeff
    sign = "-" if c < 0 else "+"
    num, den = abs(c.numerator), c.denominator
    pieces = []
    if t.expd:
        pieces.append(f"e^{{{4 * t.expd}kt}}")
    if t.tpow:
        pieces.append(f"t^{{{t.tpow}}}" if t.tpow != 1 else "t")
    if t.mpow:
        pieces.append(f"m^{{{t.mpow}}}" if t.mpow != 1 else "m")
    pieces += [f"z^{{{_name(x)}}}" for x in t.z] + [rf"\bar z^{{{_name(x)}}}" for x in t.zb]
    pieces += [rf"\partial_{{z^{{{_name(x)}}}}}" for x in t.dz]
    pieces += [rf"\partial_{{\bar z^{{{_name(x)}}}}}" for x in t.dzb]
    pieces += [_latex_atom(a) for a in t.word]
    kden = -t.kpow if t.kpow < 0 else 0
    if t.kpow > 0:
        pieces.insert(0, f"k^{{{t.kpow}}}" if t.kpow != 1 else "k")
    dtex = str(den) + (f"k^{{{kden}}}" if kden > 1 else "k" if kden == 1 else "")
    frac = rf"\frac{{{num}}}{{{dtex}}}" if dtex != "1" else (str(num) if num != 1 or not pieces else "")
    return f"{sign} {frac}" + " ".join(pieces)


def to_latex(x: OperatorExpr) -> str:
    if x.is_zero():
        return "0"
    s = " ".join(term_latex(t) for t in x.terms)
    return s[2:] if s.startswith("+ ") else s
