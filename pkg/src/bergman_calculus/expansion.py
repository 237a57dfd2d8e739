"""The recursion u_{l+1} = -L^{-1} H u_l and the norm/trace extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .hamiltonian import HamiltonianData, build_H, load_data
from .model_operator import RegimeError, linv_asymptotic
from .relations import InconsistentRelations, Preset, kills, normalize
from .terms import (
    IDENTITY, CurvAtom, OperatorExpr, Term, apply_to_function, charge_of, project_degrees,
    sum_exprs, term, term_text, weight_of, word_degree_path,
)


@dataclass
class BoundaryRecord:
    level: int
    term: Term
    degree: int
    reaches: bool

    def to_json(self) -> dict:
        return {"level": self.level, "term": self.term.to_json(), "degree": self.degree,
                "reachesBlock": self.reaches}


@dataclass
class ExpansionReport:
    level: int
    cutoff: int
    qin: int
    qout: int | None
    mode: str
    levels: list[OperatorExpr]
    boundary: list[BoundaryRecord] = field(default_factory=list)

    @property
    def remainder(self) -> frozenset:
        return frozenset().union(*(u.remainder for u in self.levels))

    def u(self, j: int) -> OperatorExpr:
        return self.levels[j]

    def block(self, qout: int, qin: int | None = None, charge: int | None = None,
              level: int | None = None, expd: int | None = None) -> OperatorExpr:
        qin = self.qin if qin is None else qin
        if qin != self.qin:
            raise ValueError(f"report was computed for input degree {2 * self.qin}")
        us = [self.levels[level]] if level is not None else self.levels
        x = project_degrees(sum_exprs(us), qin, qout)
        if charge is not None:
            x = x.filter(lambda t: charge_of(t) == charge)
        if expd is not None:
            x = x.filter(lambda t: t.expd == expd)
        return x

    def order_table(self) -> dict:
        """Top weight (k-order bookkeeping) of every nonzero (level, qout) block."""
        out = {}
        for j, u in enumerate(self.levels):
            for t in u.terms:
                d = word_degree_path(t.word, 2 * self.qin)
                key = f"{j}:{d // 2}"
                out[key] = max(out.get(key, -10 ** 6), weight_of(t))
        return out

    def decay_flags(self) -> list[dict]:
        """Diagonal (trace-mode) terms carrying e^{-4kt}: exponentially small."""
        out = []
        for j, u in enumerate(self.levels):
            for t in project_degrees(u, self.qin, self.qin).terms:
                if t.expd < 0:
                    out.append({"level": j, "expd": t.expd, "term": term_text(t)})
        return out

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "cutoff": self.cutoff,
            "qin": self.qin,
            "qout": self.qout,
            "mode": self.mode,
            "levels": [u.to_json() for u in self.levels],
            "boundary": [b.to_json() for b in self.boundary],
            "orders": self.order_table(),
            "expDecaying": self.decay_flags(),
        }


class WeightViolation(AssertionError):
    pass


def _H(h) -> OperatorExpr:
    if h is None:
        return build_H(2, 0)
    if isinstance(h, HamiltonianData):
        return h.build()
    return h


def compute_u(l: int, h: HamiltonianData | OperatorExpr | None = None, cutoff: int = -7, *,
              qin: int = 0, qout: int | None = None, mode: str = "heat-kernel",
              strict: bool = True, prune: bool = True) -> ExpansionReport:
    """Iterate u_{j+1} = -L^{-1} H u_j on degree-2*qin input.

    Every level is truncated at ``cutoff`` (the blocks sum over levels).  With
    ``prune`` and ``qout`` given, terms whose form degree can no longer reach
    2*qout within the remaining levels are dropped.
    Boundary-class terms are collected; if one could reach the requested
    block and ``strict`` is set a :class:`RegimeError` is raised.
    """
    if l < 0:
        raise ValueError("level must be >= 0")
    H = _H(h)
    levels = [IDENTITY]
    boundary: list[BoundaryRecord] = []
    u = IDENTITY
    for j in range(1, l + 1):
        rest = l - j
        hu = apply_to_function(H, u, cutoff + 2)

        def keep(t: Term) -> bool:
            d = word_degree_path(t.word, 2 * qin)
            if d is None:
                return False
            if prune and qout is not None and abs(2 * qout - d) > 2 * rest:
                return False
            return True

        hu = hu.filter(keep)
        bnd: list[Term] = []
        u = -linv_asymptotic(hu, cutoff, mode=mode, boundary=bnd)
        for t in bnd:
            d = word_degree_path(t.word, 2 * qin)
            reaches = weight_of(t) - 2 >= cutoff and (
                qout is None or abs(2 * qout - d) <= 2 * rest)
            boundary.append(BoundaryRecord(j, t, d, reaches))
            if reaches and strict:
                raise RegimeError(f"regime violation at level {j}: {term_text(t)}", t)
        for t in u.terms:
            if weight_of(t) > -2 * j:
                raise WeightViolation(f"u_{j} term of weight {weight_of(t)}: {term_text(t)}")
        levels.append(u)
    return ExpansionReport(l, cutoff, qin, qout, mode, levels, boundary)


def charge_block(report: ExpansionReport, qout: int, qin: int, charge: int,
                 expd: int | None = None) -> OperatorExpr:
    return report.block(qout, qin, charge, expd=expd)


# ---------------------------------------------------------------- compositions

def creation(order: int = 0, adjoint: bool = False) -> OperatorExpr:
    """Taylor part of order ``order`` of 2e^{+-4kt} psi^{-1} e(F) psi."""
    group = "annihilation" if adjoint else "creation"
    return OperatorExpr([e.term for e in load_data().entries
                         if e.group == group and e.taylor_order == order])


def lchain(*ops: OperatorExpr, mode: str = "heat-kernel") -> OperatorExpr:
    """L^{-1}(x1 L^{-1}(x2 ... L^{-1}(xn)...)) applied to the identity."""
    u = IDENTITY
    for x in reversed(ops):
        u = linv_asymptotic(apply_to_function(x, u), mode=mode)
    return u


def _first_order_parts() -> tuple[OperatorExpr, OperatorExpr]:
    c1 = creation(1)
    return c1.filter(lambda t: bool(t.z)), c1.filter(lambda t: bool(t.zb))


def curvature_multiplier() -> OperatorExpr:
    """Fhat + k z^a zbar^b [F^E + R](a, b~): the weight-0, charge-0 multiplication part
    of H that enters the charge-0 block (scalar Ricci and quartic terms dropped)."""
    H = build_H(2, 0)
    return H.filter(lambda t: not t.dz and not t.dzb and weight_of(t) == 0
                    and charge_of(t) == 0 and len(t.word) == 1
                    and t.word[0].kind in ("Fhat", "FE", "Riem") and len(t.z) <= 1)


def composition_ledger(charge: int = 0) -> dict[str, tuple[str, OperatorExpr]]:
    """The two-step (and one three-step) compositions feeding P_4 u P_0 at a given charge."""
    c0, c2 = creation(0), creation(2)
    z1, zb1 = _first_order_parts()
    if charge == 0:
        c2n = c2.filter(lambda t: charge_of(t) == 0)
        return {
            "c0.c2": ("L^-1 2F e^4kt L^-1 (2nd order, charge 0)", lchain(c0, c2n)),
            "c2.c0": ("L^-1 (2nd order, charge 0) L^-1 2F e^4kt", lchain(c2n, c0)),
            "z.zbar": ("L^-1 2z F_;a e^4kt L^-1 2zbar F_;b~ e^4kt", lchain(z1, zb1)),
            "zbar.z": ("L^-1 2zbar F_;b~ e^4kt L^-1 2z F_;a e^4kt", lchain(zb1, z1)),
            "c0.X.c0": ("-L^-1 2F e^4kt L^-1 X L^-1 2F e^4kt",
                        -lchain(c0, curvature_multiplier(), c0)),
        }
    if charge == -2:
        c2m = c2.filter(lambda t: charge_of(t) == -2)
        return {
            "zbar.zbar": ("L^-1 2zbar F_;a~ e^4kt L^-1 2zbar F_;b~ e^4kt", lchain(zb1, zb1)),
            "c0.c2": ("L^-1 2F e^4kt L^-1 (2nd order, charge -2)", lchain(c0, c2m)),
            "c2.c0": ("L^-1 (2nd order, charge -2) L^-1 2F e^4kt", lchain(c2m, c0)),
        }
    raise ValueError("ledgers exist for charge 0 and -2")


def displayed_coefficient(t: Term) -> Fraction:
    """Coefficient with F^E and R read holomorphic index first: X(a~, b) = -X(b, a~)."""
    flips = sum(1 for a in t.word if a.kind in ("FE", "Riem") and len(a.slots) == 2
                and a.slots[0].bar and not a.slots[1].bar)
    return t.coeff * (-1) ** flips


def nu0(block: OperatorExpr, preset: Preset) -> OperatorExpr:
    """Charge-0 aggregate: expand Fhat, normalize under the preset, collect."""
    return normalize(block, preset.with_display())


# ---------------------------------------------------------------- norms

@dataclass
class NormCoefficient:
    """Leading coefficient of a squared HS norm (or trace).

    The value is ``prefactor * (2 pi)^{-m} * k^{m + kOffset}`` times the local
    functional ``sum_mu || sum_i amplitude_i * word_i ||^2`` integrated over M.
    ``coefficient`` is prefactor times the squared amplitude when there is a
    single word.
    """

    prefactor: Fraction
    kOffset: int
    amplitudes: list[tuple[Fraction, str]]
    localFunctional: str
    flags: list[str] = field(default_factory=list)
    monomial: str = ""

    @property
    def coefficient(self) -> Fraction:
        if len(self.amplitudes) == 1:
            return self.prefactor * self.amplitudes[0][0] ** 2
        return self.prefactor

    @property
    def kExponent(self) -> str:
        return f"m{self.kOffset:+d}" if self.kOffset else "m"

    def to_json(self) -> dict:
        return {
            "coefficient": str(self.coefficient),
            "prefactor": str(self.prefactor),
            "twoPiPower": "-m",
            "kExponent": self.kExponent,
            "amplitudes": [[str(c), w] for c, w in self.amplitudes],
            "localFunctional": self.localFunctional,
            "flags": self.flags,
        }


def gaussian_pairing(s: Term, t: Term) -> tuple[int, int]:
    """<s, t> of the monomial parts under e^{-k|z|^2/2} (k/2pi)^m dx.

    Returns ``(number of matchings, n)``; the value is count * (2/k)^n.
    Terms of different charge pair to exactly zero.
    """
    A = len(s.z) + len(t.zb)
    B = len(s.zb) + len(t.z)
    if A != B:
        return 0, 0
    return math.factorial(A), A


def _creation_block(a: int, taylor: int, preset: Preset | None) -> OperatorExpr:
    ops = sum_exprs(creation(o) for o in range(taylor + 1))
    u = IDENTITY
    for _ in range(a):
        u = -linv_asymptotic(apply_to_function(ops, u), cutoff=-2 * a - taylor)
    if preset is not None:
        u = normalize(u, preset)
    return u


def word_text(word) -> str:
    return term_text(term(1, word=word)).removeprefix("1 ")


def _deriv_position(t: Term) -> tuple:
    # F^b (dF) F^(q-b) ordered by b
    pos = [i for i, a in enumerate(t.word) if a.derivs]
    return (pos, word_text(t.word))


def hs_leading(qout: int, qin: int = 0, relations: Preset | None = None) -> NormCoefficient:
    """Leading term of ||Pi_{2qin}^{2qout}||_HS^2 (trace mode for qout = qin = 0).

    Here ``qout``/``qin`` are form degrees divided by two, t = k^{-1/2}.
    """
    if relations is not None and kills((), relations):
        raise InconsistentRelations(f"preset {relations.name} derives 1 = 0")
    if qin != 0:
        raise NotImplementedError("only blocks with input degree 0 are extracted")
    if qout == 0:
        return NormCoefficient(Fraction(1), 0, [(Fraction(1), "I")], "Vol(M) rk(E)",
                               ["trace mode: diagonal heat kernel (k/(4 pi sinh tk))^m e^{m tk}"])
    a = qout
    block = _creation_block(a, 1, relations)
    if block.is_zero():
        raise ValueError("block vanishes to the computed order")
    top = max(weight_of(t) for t in block.terms)
    lead = block.filter(lambda t: weight_of(t) == top)
    scale = Fraction((-1) ** a, 2 ** a)
    shapes = {(len(t.z), len(t.zb)) for t in lead.terms}
    flags = []
    if len(shapes) != 1:
        raise NotImplementedError("mixed monomial shapes in the leading block")
    nz, nzb = shapes.pop()
    count, n = gaussian_pairing(lead.terms[0], lead.terms[0])
    prefactor = Fraction(count * 2 ** n, 2 ** (2 * a))
    amps = []
    for t in sorted(lead.terms, key=_deriv_position):
        amps.append((t.coeff / scale, word_text(t.word)))
    kpow = lead.terms[0].kpow
    koff = 2 * kpow - n
    functional = "||" + " + ".join(f"({c}) {w}" for c, w in amps) + "||^2"
    if nz or nzb:
        functional = "sum_mu " + functional
    if nz == nzb == 0:
        ratio = Fraction(2 ** (4 * a))
        flags.append(f"norm convention: the trace-formula constant 1/(2^(m-2a) pi^m (a!)^2) "
                     f"is {ratio} times this value; not resolved")
    else:
        flags.append("prefactor includes the Gaussian moment 2/k of |zbar^mu|^2; the displayed "
                     "constant 2^(-2a)/(2 pi)^m is smaller by a factor 2")
    return NormCoefficient(prefactor, koff, amps, functional, flags,
                           f"z^{nz} zbar^{nzb}")


def order_estimate(qout: int, qin: int = 0, relations: Preset | None = None) -> int:
    """Exponent offset e with ||Pi_{2qin}^{2qout}||_HS^2 = O(k^{m+e}).

    The leading word is F^qout (F*)^qin; if the preset kills it, the first
    surviving block sits one weight lower.
    """
    if qout == 0 and qin == 0:
        return 0
    e = -2 * (qout + qin)
    word = (CurvAtom("F02"),) * qout + (CurvAtom("F02", adjoint=True),) * qin
    if relations is not None and kills(word, relations):
        e -= 1
    return e


def trace_decomposition(a: int) -> tuple[int, int]:
    """Tr Pi_{2a}^{2a} = ||Pi_0^{2a}||^2 + O(k^{m + second}): returns both offsets."""
    return -2 * a, -2 * a - 2
