"""The perturbation H as term data.

The transcription lives in ``data/hamiltonian.json``; every entry carries the
display-line tag it was read from.  ``tanh(tk)`` factors are normalized to 1
and the O(...) lines become remainder classes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from .terms import OperatorExpr, RemainderClass, Term, charge_of, weight_of

CURVATURE_KINDS = {"Riem", "Ric", "FE", "Fhat", "F02"}


class UnsupportedOrder(ValueError):
    pass


@dataclass(frozen=True)
class HEntry:
    group: str
    tag: str
    term: Term
    taylor_order: int | None = None


@dataclass(frozen=True)
class HamiltonianData:
    """Transcribed H plus the switches used when assembling it."""

    entries: tuple[HEntry, ...]
    remainders: tuple[dict, ...] = ()
    max_taylor: int = 2
    taylor_order: int = 2
    weight_cutoff: int = 0
    include_delta: bool = False
    include_creation: bool = True
    include_annihilation: bool = True

    def group(self, name: str) -> list[Term]:
        return [e.term for e in self.entries if e.group == name]

    @property
    def charge0Terms(self) -> list[Term]:
        return [t for t in self.group("Hh") if charge_of(t) == 0]

    @property
    def chargePlus2Terms(self) -> list[Term]:
        return [t for t in self.group("Hh") if charge_of(t) == 2]

    @property
    def chargeMinus2Terms(self) -> list[Term]:
        return [t for t in self.group("Hh") if charge_of(t) == -2]

    @property
    def deltaHTerms(self) -> list[Term]:
        return self.group("dH")

    def taylor(self, group: str, order: int) -> list[Term]:
        return [e.term for e in self.entries
                if e.group == group and e.taylor_order is not None and e.taylor_order <= order]

    def configured(self, **kw) -> "HamiltonianData":
        d = {k: getattr(self, k) for k in (
            "entries", "remainders", "max_taylor", "taylor_order", "weight_cutoff",
            "include_delta", "include_creation", "include_annihilation")}
        d.update(kw)
        return HamiltonianData(**d)

    def build(self) -> OperatorExpr:
        return build_H(self.taylor_order, self.weight_cutoff, data=self)


@lru_cache(maxsize=1)
def load_data() -> HamiltonianData:
    raw = json.loads(resources.files(__package__).joinpath("data/hamiltonian.json").read_text())
    entries = tuple(
        HEntry(e["group"], e["tag"], Term.from_json(e["term"]), e.get("taylorOrder"))
        for e in raw["entries"]
    )
    return HamiltonianData(entries, tuple(raw["remainders"]), raw["maxTaylorOrder"])


def build_H(taylor_order: int = 2, cutoff: int = 0, *, include_delta: bool | None = None,
            include_creation: bool | None = None, include_annihilation: bool | None = None,
            data: HamiltonianData | None = None) -> OperatorExpr:
    """H truncated to weight >= cutoff.

    The cutoff applies to the H_h and delta H displays.  The creation and
    annihilation family is Taylor expanded to ``taylor_order`` regardless of
    the cutoff; orders above the transcribed data raise
    :class:`UnsupportedOrder`.
    """
    data = data or load_data()
    if include_delta is None:
        include_delta = data.include_delta
    if include_creation is None:
        include_creation = data.include_creation
    if include_annihilation is None:
        include_annihilation = data.include_annihilation
    if taylor_order < 0:
        raise ValueError("taylor_order must be >= 0")
    if taylor_order > data.max_taylor:
        raise UnsupportedOrder(
            f"Taylor order {taylor_order} exceeds transcribed order {data.max_taylor}")
    if cutoff > 0:
        raise ValueError("cutoff must be <= 0")
    terms = list(data.group("Hh"))
    family: list[Term] = []
    rem = {RemainderClass(-1, None, "O(r^2 nabla) lines of H")}
    rem.add(RemainderClass(0, None, "exp-small"))
    if include_delta:
        terms += data.group("dH")
        rem.add(RemainderClass(-2, None, "O(r^2 + k r^4) lines of delta H"))
    else:
        rem.add(RemainderClass(-1, None, "delta H excluded"))
    if include_creation:
        family += data.taylor("creation", taylor_order)
    if include_annihilation:
        family += data.taylor("annihilation", taylor_order)
    if include_creation or include_annihilation:
        rem.add(RemainderClass(-(taylor_order + 1), None,
                               f"psi-conjugation Taylor terms of order > {taylor_order}"))
    kept = [t for t in terms if weight_of(t) >= cutoff]
    if len(kept) < len(terms):
        rem.add(RemainderClass(cutoff - 1, None, "truncate"))
    # the creation/annihilation family is governed by taylor_order alone
    return OperatorExpr(kept + family, rem)


def charge_split(h: OperatorExpr) -> dict[int, OperatorExpr]:
    """Partition by charge; checks that the weight-0 part outside the
    creation/annihilation family has charge 0 except the two F^E terms."""
    out: dict[int, list[Term]] = {}
    for t in h.terms:
        out.setdefault(charge_of(t), []).append(t)
    for c, ts in out.items():
        if abs(c) == 2:
            for t in ts:
                if weight_of(t) == 0 and not _is_creation(t):
                    assert [a.kind for a in t.word] == ["FE"], t
    return {c: OperatorExpr(ts, h.remainder) for c, ts in sorted(out.items())}


def _is_creation(t: Term) -> bool:
    return any(a.kind == "F02" for a in t.word)


def flat_reduction(h: OperatorExpr, keep: set[str] = frozenset()) -> OperatorExpr:
    """Drop every term containing a curvature atom not listed in ``keep``."""
    return h.filter(lambda t: all(a.kind in keep or a.kind not in CURVATURE_KINDS
                                  for a in t.word))
