"""Chern-character word combinatorics and the degree-6 exactness chain."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, NamedTuple

from .relations import Preset, mirrored, normalize
from .terms import CurvAtom, OperatorExpr, term

LETTERS = ("F20", "F11", "F02")
BIDEGREE = {"F20": (2, 0), "F11": (1, 1), "F02": (0, 2)}


# ---------------------------------------------------------------- survey

def _canonical_rotation(w: tuple[str, ...]) -> tuple[str, ...]:
    return min(w[i:] + w[:i] for i in range(len(w))) if w else w


def _atoms(w: tuple[str, ...]) -> tuple[CurvAtom, ...]:
    return tuple(CurvAtom(x) for x in w)


def _killed(w: tuple[str, ...], presets: list[Preset]) -> bool:
    # every letter is a 2-form, so rotations carry no sign
    for i in range(len(w)):
        rot = w[i:] + w[:i]
        x = OperatorExpr([term(1, word=_atoms(rot))])
        if any(normalize(x, p).is_zero() for p in presets):
            return True
    return False


@dataclass
class SurveyReport:
    p: int
    preset: str
    survivors: list[tuple[str, ...]]
    killed: int
    total: int

    def bidegree(self, w: tuple[str, ...]) -> tuple[int, int]:
        return (sum(BIDEGREE[x][0] for x in w), sum(BIDEGREE[x][1] for x in w))

    @property
    def maxAntiholomorphic(self) -> int | None:
        return max((self.bidegree(w)[1] for w in self.survivors), default=None)

    @property
    def minHolomorphic(self) -> int | None:
        """Largest s with every surviving trace in S_H^s."""
        return min((self.bidegree(w)[0] for w in self.survivors), default=None)

    def with_counts(self, **counts: int) -> list[tuple[str, ...]]:
        return [w for w in self.survivors if all(w.count(k) == n for k, n in counts.items())]

    def max_count(self, letter: str) -> int:
        return max((w.count(letter) for w in self.survivors), default=0)

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "preset": self.preset,
            "classes": self.total,
            "killed": self.killed,
            "survivors": [{"word": " ".join(w), "bidegree": list(self.bidegree(w))}
                          for w in self.survivors],
            "maxAntiholomorphicDegree": self.maxAntiholomorphic,
            "minHolomorphicDegree": self.minHolomorphic,
            "maxF02Count": self.max_count("F02"),
            "maxF02Classes": [" ".join(w) for w in self.with_counts(F02=self.max_count("F02"))],
        }


def chern_word_survey(p: int, preset: Preset, mirror: bool = False) -> SurveyReport:
    """Cyclic classes of length-p words in F20, F11, F02 that survive ``preset``.

    With ``mirror`` the conjugate preset is applied as well.
    """
    if p < 1 or p > 8:
        raise ValueError("p must be in 1..8")
    presets = [preset] + ([mirrored(preset)] if mirror else [])
    classes = sorted({_canonical_rotation(w) for w in itertools.product(LETTERS, repeat=p)})
    surv = [w for w in classes if not _killed(w, presets)]
    return SurveyReport(p, preset.name, surv, len(classes) - len(surv), len(classes))


def brute_force_survivors(p: int, zero_words: Iterable[tuple[str, ...]]) -> set[tuple[str, ...]]:
    """Independent check: cyclic substring search for the zero words."""
    zs = [tuple(z) for z in zero_words]
    out = set()
    for w in itertools.product(LETTERS, repeat=p):
        ww = w + w
        dead = any(ww[i:i + len(z)] == z for z in zs if len(z) <= p for i in range(p))
        if not dead:
            out.add(_canonical_rotation(w))
    return out


# ---------------------------------------------------------------- trace words

class Letter(NamedTuple):
    """A curvature component with derivative operators applied in order.

    ``ops`` holds "d" for the (1,0) part and "b" for the (0,1) part of the
    covariant exterior derivative.
    """

    base: str
    ops: tuple[str, ...] = ()

    @property
    def degree(self) -> int:
        return 2 + len(self.ops)

    @property
    def holomorphic(self) -> int:
        return BIDEGREE[self.base][0] + self.ops.count("d")

    def text(self) -> str:
        pre = "".join({"d": "d", "b": "db"}[o] + "." for o in reversed(self.ops))
        return pre + self.base


TWord = tuple[Letter, ...]
TExpr = dict[TWord, Fraction]


def _add(acc: TExpr, w: TWord, c) -> None:
    c = Fraction(c)
    if c:
        v = acc.get(w, Fraction(0)) + c
        if v:
            acc[w] = v
        else:
            acc.pop(w, None)


def lin(*pairs) -> TExpr:
    acc: TExpr = {}
    for c, w in pairs:
        _add(acc, tuple(w), c)
    return acc


def plus(*xs: TExpr, coeffs: Iterable = ()) -> TExpr:
    cs = list(coeffs) or [1] * len(xs)
    acc: TExpr = {}
    for c, x in zip(cs, xs):
        for w, v in x.items():
            _add(acc, w, Fraction(c) * v)
    return acc


def mul(*xs: TExpr) -> TExpr:
    acc: TExpr = {(): Fraction(1)}
    for x in xs:
        nxt: TExpr = {}
        for w1, c1 in acc.items():
            for w2, c2 in x.items():
                _add(nxt, w1 + w2, c1 * c2)
        acc = nxt
    return acc


def _deg(w: TWord) -> int:
    return sum(a.degree for a in w)


def commutator(base: str, y: TExpr) -> TExpr:
    """[F, Y] for an even curvature letter F."""
    f = lin((1, (Letter(base),)))
    return plus(mul(f, y), mul(y, f), coeffs=(1, -1))


def _apply_op(op: str, a: Letter) -> TExpr:
    if not a.ops:
        # Bianchi: d_A F = 0 split by bidegree
        if (a.base, op) in (("F02", "b"), ("F20", "d")):
            return {}
        if (a.base, op) == ("F11", "b"):
            return lin((-1, (Letter("F02", ("d",)),)))
        if (a.base, op) == ("F11", "d"):
            return lin((-1, (Letter("F20", ("b",)),)))
        return lin((1, (Letter(a.base, (op,)),)))
    last = a.ops[-1]
    inner = lin((1, (Letter(a.base, a.ops[:-1]),)))
    if (last, op) == ("d", "d"):
        return commutator("F20", inner)
    if (last, op) == ("b", "b"):
        return commutator("F02", inner)
    if (last, op) == ("d", "b"):
        # dbar d Y = -d dbar Y + [F11, Y]
        return plus(D("d", D("b", inner)), commutator("F11", inner), coeffs=(-1, 1))
    return lin((1, (Letter(a.base, a.ops + (op,)),)))


def D(op: str, x: TExpr) -> TExpr:
    """Graded Leibniz extension of d_A^{1,0} ("d") or d_A^{0,1} ("b")."""
    acc: TExpr = {}
    for w, c in x.items():
        for i, a in enumerate(w):
            s = -1 if _deg(w[:i]) % 2 else 1
            for w2, c2 in _apply_op(op, a).items():
                _add(acc, w[:i] + w2 + w[i + 1:], s * c * c2)
    return acc


def letter(base: str, ops: str = "") -> TExpr:
    x = lin((1, (Letter(base),)))
    for o in ops:
        x = D(o, x)
    return x


@dataclass
class TraceRules:
    zero: list[TWord] = field(default_factory=list)
    subst: list[tuple[TWord, TExpr]] = field(default_factory=list)


def _rotations(w: TWord):
    """(sign, rotation) with tr(w) = sign * tr(rotation)."""
    s = 1
    cur = w
    for _ in range(len(w)):
        yield s, cur
        first = cur[0]
        s *= -1 if (first.degree * (_deg(cur) - first.degree)) % 2 else 1
        cur = cur[1:] + (first,)


def _find(w: TWord, pat: TWord) -> int | None:
    for i in range(len(w) - len(pat) + 1):
        if w[i:i + len(pat)] == pat:
            return i
    return None


def _word_key(w: TWord) -> tuple:
    return tuple((a.base, a.ops) for a in w)


def word_reduce(x: TExpr, zero: list[TWord]) -> TExpr:
    """Drop words containing a zero subword (plain words, not traces)."""
    return {w: c for w, c in x.items() if all(_find(w, z) is None for z in zero)}


def tr_normalize(x: TExpr, rules: TraceRules, max_rounds: int = 50) -> TExpr:
    """Normal form of a sum of traces: cyclic canonical words, zero words
    removed (in any rotation), substitutions applied."""
    for _ in range(max_rounds):
        acc: TExpr = {}
        changed = False
        for w, c in x.items():
            rots = list(_rotations(w))
            if any(_find(r, z) is not None for _, r in rots for z in rules.zero):
                changed = True
                continue
            hit = None
            for s, r in rots:
                for lhs, rhs in rules.subst:
                    i = _find(r, lhs)
                    if i is not None:
                        hit = (s, r, i, lhs, rhs)
                        break
                if hit:
                    break
            if hit:
                s, r, i, lhs, rhs = hit
                for w2, c2 in rhs.items():
                    _add(acc, r[:i] + w2 + r[i + len(lhs):], s * c * c2)
                changed = True
                continue
            best = min(rots, key=lambda sr: _word_key(sr[1]))
            signs = {s for s, r in rots if r == best[1]}
            if len(signs) > 1:
                changed = True
                continue
            if best[1] != w:
                changed = True
            _add(acc, best[1], best[0] * c)
        x = acc
        if not changed:
            return x
    raise RuntimeError("trace normalization did not terminate")


def tr_text(x: TExpr) -> str:
    if not x:
        return "0"
    parts = []
    for w, c in sorted(x.items(), key=lambda kv: _word_key(kv[0])):
        parts.append(f"{c} tr(" + " ".join(a.text() for a in w) + ")")
    return " + ".join(parts)


@dataclass
class ChainStep:
    name: str
    ok: bool
    residual: str = "0"

    def to_json(self) -> dict:
        return {"step": self.name, "pass": self.ok, "residual": self.residual}


@dataclass
class ChainReport:
    chain: str
    steps: list[ChainStep]

    @property
    def ok(self) -> bool:
        return all(s.ok for s in self.steps)

    def to_json(self) -> dict:
        return {"chain": self.chain, "pass": self.ok, "steps": [s.to_json() for s in self.steps]}


def _eq(name: str, lhs: TExpr, rhs: TExpr, rules: TraceRules) -> ChainStep:
    r = tr_normalize(plus(lhs, rhs, coeffs=(1, -1)), rules)
    return ChainStep(name, not r, tr_text(r))


def _p6_chain(derived: bool = True) -> list[ChainStep]:
    """The degree-6 chain; ``derived=False`` withholds dF02 dF02 = -F02 F20 F02."""
    F02, F11, F20 = (letter(x) for x in ("F02", "F11", "F20"))
    dF02 = letter("F02", "d")
    L = lambda *xs: mul(*xs)  # noqa: E731
    steps: list[ChainStep] = []

    # S^1_{V,1}, the charge-0 relation, and the holomorphic derivative relation
    rules = TraceRules(zero=[
        (Letter("F02"), Letter("F02")),
        (Letter("F02"), Letter("F11"), Letter("F02")),
        (Letter("F02"), Letter("F02", ("d",))),
    ])

    # derived (as word identities, no cyclicity): d(F02 F02) = 0 gives dF02 F02 = 0
    d1 = word_reduce(D("d", L(F02, F02)), rules.zero)
    want1 = lin((1, (Letter("F02", ("d",)), Letter("F02"))))
    steps.append(ChainStep("derive dF02 F02 = 0", d1 == want1,
                           "0" if d1 == want1 else tr_text(d1)))
    rules.zero.append((Letter("F02", ("d",)), Letter("F02")))

    # derived: d(F02 dF02) = 0 gives dF02 dF02 = -F02 F20 F02
    d2 = D("d", L(F02, dF02))
    rhs2 = L(F02, F20, F02)
    lhs2 = L(dF02, dF02)
    resid = word_reduce(plus(d2, lhs2, rhs2, coeffs=(1, -1, -1)), rules.zero)
    steps.append(ChainStep("derive dF02 dF02 = -F02 F20 F02", not resid, tr_text(resid)))
    if derived:
        rules.subst.append(((Letter("F02", ("d",)), Letter("F02", ("d",))),
                            plus(rhs2, coeffs=(-1,))))

    X0 = L(F11, F11, F02, F11, F11, F02)
    E1 = L(F11, F11, F02, F11, letter("F02", "db"))
    steps.append(_eq("E0 = E1 (Bianchi)", X0, E1, rules))

    E2 = plus(L(F11, F11, D("b", L(F02, F11, dF02))),
              L(F11, F11, F02, letter("F11", "b"), dF02), coeffs=(1, -1))
    steps.append(_eq("E1 = E2 (Leibniz)", E1, E2, rules))

    Y = L(F11, F11, F02, F11, dF02)
    exact = D("b", Y)
    E3 = plus(exact,
              L(letter("F11", "b"), F11, F02, F11, dF02),
              L(F11, letter("F11", "b"), F02, F11, dF02),
              L(F11, F11, F02, dF02, dF02), coeffs=(1, -1, -1, 1))
    steps.append(_eq("E2 = E3 (Leibniz)", E2, E3, rules))
    steps.append(_eq("E3 = E4 (dbar-exact)", E3, exact, rules))

    # d tr Y - dbar tr Y = d^{1,0} tr Y lies in holomorphic degree >= 5
    dY = D("d", Y)
    low = [w for w in dY if sum(a.holomorphic for a in w) < 5]
    steps.append(ChainStep("E4 = d tr(Y) mod S_H^5", not low,
                           tr_text({w: dY[w] for w in low})))
    return steps


CHAINS = {"p6": _p6_chain, "": lambda: []}


def verify_trace_chain(chain: str = "p6") -> ChainReport:
    if chain not in CHAINS:
        raise KeyError(f"unknown chain {chain!r}; known: {sorted(CHAINS)}")
    return ChainReport(chain, CHAINS[chain]())
