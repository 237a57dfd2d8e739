"""Numeric oracles, independent of the symbolic pipeline.

* Matrix models: the antiholomorphic exterior algebra of C^m (Jordan-Wigner
  operators) tensored with r x r matrices.  Curvature components come from
  explicit polynomial families in (z, zbar), so derivative atoms are exact
  derivatives of the family at the origin.
* Quadrature: the s-integral of L^{-1} with the full sinh weight, and the
  Gaussian y-integral, compared with the asymptotic coefficients.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

from .model_operator import linv_asymptotic, wick_moment
from .relations import LinComb, derive_relation, is_meta
from .terms import CurvAtom, IndexSlot, OperatorExpr, Term, term


class UnsupportedSampler(ValueError):
    pass


@dataclass
class OracleReport:
    task: str
    seed: int | None
    trials: int
    maxResidual: float
    tol: float
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.maxResidual <= self.tol)

    def to_json(self) -> dict:
        out = {"task": self.task, "seed": self.seed, "trials": self.trials,
               "maxResidual": float(self.maxResidual), "pass": self.passed}
        out.update(self.details)
        return out


def trial_rngs(seed: int, trials: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


# ---------------------------------------------------------------- exterior algebra

class Exterior:
    """Operators e(dzbar^i), e*(dzbar^i) on Lambda(C^m) (x) C^r."""

    def __init__(self, m: int, r: int):
        self.m, self.r = m, r
        up = np.array([[0, 0], [1, 0]], dtype=complex)
        zz = np.diag([1, -1]).astype(complex)
        one = np.eye(2, dtype=complex)
        self.wedge = []
        for i in range(m):
            op = np.eye(1, dtype=complex)
            for j in range(m):
                op = np.kron(op, zz if j < i else up if j == i else one)
            self.wedge.append(np.kron(op, np.eye(r)))
        self.contract = [w.conj().T for w in self.wedge]
        self.dim = 2 ** m * r
        self.id = np.eye(self.dim, dtype=complex)

    def scalar(self, X: np.ndarray) -> np.ndarray:
        return np.kron(np.eye(2 ** self.m), X)

    def form1(self, v: np.ndarray) -> np.ndarray:
        """sum_f dzbar^f (x) v[f]."""
        return sum(self.wedge[f] @ self.scalar(v[f]) for f in range(self.m))

    def form2(self, M: np.ndarray) -> np.ndarray:
        """sum_{i<j} dzbar^i dzbar^j (x) M[i, j]."""
        out = np.zeros((self.dim, self.dim), dtype=complex)
        for i in range(self.m):
            for j in range(i + 1, self.m):
                out += self.wedge[i] @ self.wedge[j] @ self.scalar(M[i, j])
        return out


def _antisym(A: np.ndarray) -> np.ndarray:
    return A - A.transpose(1, 0, 2, 3)


# polynomial families: exponent tuple over (z_1..z_m, zbar_1..zbar_m) -> (m, m, r, r)
Poly = dict[tuple[int, ...], np.ndarray]


def poly_derivative(P: Poly, var: int) -> Poly:
    out: Poly = {}
    for e, c in P.items():
        if e[var]:
            e2 = list(e)
            e2[var] -= 1
            out[tuple(e2)] = out.get(tuple(e2), 0) + e[var] * c
    return out


def _var(m: int, s: IndexSlot, val: dict) -> int:
    a = val[s.label] - 1
    return a + m if s.bar else a


@dataclass
class MatrixModel:
    """A sampled instance of the curvature letters."""

    m: int
    r: int
    seed: int | None
    poly: Poly
    FE: np.ndarray | None = None
    name: str = "generic"
    ext: Exterior = field(init=False, repr=False)

    def __post_init__(self):
        self.ext = Exterior(self.m, self.r)

    def component(self, derivs: Sequence[IndexSlot], val: dict, at: Poly | None = None) -> np.ndarray:
        P = self.poly if at is None else at
        for s in derivs:
            P = poly_derivative(P, _var(self.m, s, val))
        return P.get((0,) * (2 * self.m), np.zeros((self.m, self.m, self.r, self.r), complex))

    def atom_value(self, a: CurvAtom, val: dict) -> np.ndarray:
        ext = self.ext
        if a.kind == "F02":
            C = self.component(a.derivs, val)
            if not a.slots:
                out = ext.form2(C)
            elif len(a.slots) == 1:
                c = val[a.slots[0].label] - 1
                out = ext.form1(C[c])
            else:
                i, j = (val[s.label] - 1 for s in a.slots)
                out = ext.scalar(C[i, j])
            return out.conj().T if a.adjoint else out
        if a.kind == "WedgeZbar":
            return ext.wedge[val[a.slots[0].label] - 1]
        if a.kind == "CoWedgeZbar":
            return ext.contract[val[a.slots[0].label] - 1]
        if a.kind == "FE" and self.FE is not None:
            i, j = (val[s.label] - 1 for s in a.slots)
            return ext.scalar(self.FE[i, j])
        if a.kind == "Ginv":
            s0, s1 = a.slots
            return ext.id * float(val[s0.label] == val[s1.label])
        raise UnsupportedSampler(f"model {self.name!r} has no value for {a.kind}")


def generic_model(m: int, r: int, rng: np.random.Generator, order: int = 2) -> MatrixModel:
    P: Poly = {}
    for e in itertools.product(range(order + 1), repeat=2 * m):
        if sum(e) <= order:
            A = rng.normal(size=(m, m, r, r)) + 1j * rng.normal(size=(m, m, r, r))
            P[e] = _antisym(A) / (1 + sum(e))
    FE = rng.normal(size=(m, m, r, r)) + 1j * rng.normal(size=(m, m, r, r))
    return MatrixModel(m, r, None, P, FE, "generic")


def square_zero_model(m: int, r: int, rng: np.random.Generator, rank: int = 2) -> MatrixModel:
    """Components in span{u_s v^T} with v^T u_s = 0: all products vanish."""
    if r < 2:
        raise UnsupportedSampler("square-zero sampler needs r >= 2")
    # v supported on one coordinate, every u_s vanishing there: v^T u_s = 0 exactly
    i0 = int(rng.integers(r))
    v = np.zeros(r, complex)
    v[i0] = rng.normal() + 1j * rng.normal()
    basis = []
    for _ in range(rank):
        u = rng.normal(size=r) + 1j * rng.normal(size=r)
        u[i0] = 0
        basis.append(np.outer(u, v))
    C = np.zeros((m, m, r, r), complex)
    for i in range(m):
        for j in range(i + 1, m):
            X = sum((rng.normal() + 1j * rng.normal()) * N for N in basis)
            C[i, j], C[j, i] = X, -X
    return MatrixModel(m, r, None, {(0,) * (2 * m): C}, None, "commuting-square-zero")


def decomposable_model(m: int, r: int, rng: np.random.Generator) -> MatrixModel:
    """F = dzbar^1 dzbar^2 (x) M(z, zbar): every product of two F letters vanishes."""
    P: Poly = {}
    for e in itertools.product(range(3), repeat=2 * m):
        if sum(e) <= 2:
            C = np.zeros((m, m, r, r), complex)
            X = rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r))
            C[0, 1], C[1, 0] = X, -X
            P[e] = C
    return MatrixModel(m, r, None, P, None, "decomposable")


SAMPLERS: dict[str, Callable] = {
    "generic": generic_model,
    "commuting-square-zero": square_zero_model,
    "decomposable": decomposable_model,
}


# ---------------------------------------------------------------- evaluation

def _labels(t: Term) -> tuple[list, list]:
    free, bound = [], []
    for x in t.labels():
        if isinstance(x, int):
            if x not in bound:
                bound.append(x)
        elif x not in free:
            free.append(x)
    return free, bound


def eval_expr(x: OperatorExpr, model: MatrixModel, point: Sequence[complex] | None = None,
              free: dict | None = None, k: float = 1.0, tk: float = 0.0) -> np.ndarray:
    """Literal value of a derivative-free expression at ``point``.

    Bound labels are summed over 1..m; free labels take values from ``free``.
    """
    m = model.m
    z = np.zeros(m, complex) if point is None else np.asarray(point, complex)
    free = free or {}
    out = np.zeros((model.ext.dim, model.ext.dim), complex)
    for t in x.terms:
        if t.dz or t.dzb:
            raise ValueError("eval_expr handles multiplication operators only")
        fl, bl = _labels(t)
        missing = [f for f in fl if f not in free]
        if missing:
            raise ValueError(f"free labels {missing} need values")
        scal = float(t.coeff) * k ** t.kpow * math.exp(4 * t.expd * tk) * (tk / k) ** t.tpow
        scal *= m ** t.mpow
        for vals in itertools.product(range(1, m + 1), repeat=len(bl)):
            val = dict(free)
            val.update(zip(bl, vals))
            c = scal
            for a in t.z:
                c *= z[val[a] - 1]
            for a in t.zb:
                c *= np.conj(z[val[a] - 1])
            if c == 0:
                continue
            mat = model.ext.id
            for a in t.word:
                mat = mat @ model.atom_value(a, val)
            out += c * mat
    return out


def _norm(A: np.ndarray) -> float:
    return float(np.linalg.norm(A, 2)) if A.size else 0.0


def _lincomb_expr(rel: LinComb) -> OperatorExpr:
    return OperatorExpr([term(c, word=w) for c, w in rel])


def _meta_values(words: list, m: int):
    metas = sorted({s.label for w in words for a in w for s in a.indices() if is_meta(s.label)})
    for vals in itertools.product(range(1, m + 1), repeat=len(metas)):
        yield dict(zip(metas, vals))


def check_identity(lhs: OperatorExpr, rhs: OperatorExpr, sampler: str = "generic", trials: int = 20,
                   tol: float = 1e-12, seed: int = 0, m: int = 4, r: int = 2) -> OracleReport:
    if sampler not in SAMPLERS:
        raise UnsupportedSampler(f"unknown sampler {sampler!r}")
    diff = lhs - rhs
    worst = 0.0
    for rng in trial_rngs(seed, trials):
        model = SAMPLERS[sampler](m, r, rng)
        fl = sorted({x for t in diff.terms for x in _labels(t)[0]})
        for vals in itertools.product(range(1, m + 1), repeat=len(fl)):
            worst = max(worst, _norm(eval_expr(diff, model, free=dict(zip(fl, vals)))))
    return OracleReport("identity", seed, trials, worst, tol, {"sampler": sampler})


# ---------------------------------------------------------------- Leibniz oracle

def _poly_mul(ext: Exterior, A: dict, B: dict) -> dict:
    out: dict = {}
    for ea, ca in A.items():
        for eb, cb in B.items():
            e = tuple(x + y for x, y in zip(ea, eb))
            out[e] = out.get(e, 0) + ca @ cb
    return out


def _word_poly(model: MatrixModel, word, val: dict) -> dict:
    """The word as an operator-valued polynomial in (z, zbar)."""
    ext = model.ext
    acc = {(0,) * (2 * model.m): ext.id}
    for a in word:
        if a.kind != "F02" or a.slots or a.adjoint:
            raise UnsupportedSampler("Leibniz oracle handles plain F letters only")
        P = model.poly
        for s in a.derivs:
            P = poly_derivative(P, _var(model.m, s, val))
        acc = _poly_mul(ext, acc, {e: ext.form2(C) for e, C in P.items()})
    return acc


def leibniz_check(rel: LinComb, idx: IndexSlot, trials: int = 5, seed: int = 0, m: int = 3,
                  r: int = 2, tol: float = 1e-8) -> OracleReport:
    """d/d(idx) of the relation, evaluated as a polynomial, versus the
    engine's differentiated word sum."""
    derived = derive_relation(rel, idx)
    words = [w for _, w in rel] + [w for _, w in derived]
    worst = 0.0
    for rng in trial_rngs(seed, trials):
        model = generic_model(m, r, rng)
        for val in _meta_values(words, m):
            for v in range(1, m + 1):
                val2 = dict(val)
                val2[idx.label] = v
                num = 0
                for c, w in rel:
                    d = poly_derivative(_word_poly(model, w, val2), _var(m, idx, val2))
                    num = num + float(c) * d.get((0,) * (2 * m), 0)
                sym = eval_expr(_lincomb_expr(derived), model, free=val2)
                worst = max(worst, _norm(num - sym))
    return OracleReport("leibniz", seed, trials, worst, tol)


# ---------------------------------------------------------------- nilpotency

def nilpotency_check(trials: int = 100, seed: int = 0, m: int = 4, r: int = 3,
                     tol: float = 1e-12) -> OracleReport:
    """Conclusions of the charge -2 analysis on commuting square-zero models.

    Checks F^F, F ^ i_c F, i_c F ^ i_e F, commutators and squares of
    components, and the coordinate relation behind commutativity.
    """
    from .linear import P1EXP

    worst = 0.0
    F = CurvAtom("F02")
    Fc = lambda x: CurvAtom("F02", slots=(IndexSlot(x, True),))  # noqa: E731
    words = [
        (F, F), (F, Fc("c")), (Fc("c"), Fc("e")), (Fc("c"), F),
    ]
    for rng in trial_rngs(seed, trials):
        model = square_zero_model(m, r, rng)
        C = model.component((), {})
        for w in words:
            for c, e in itertools.product(range(1, m + 1), repeat=2):
                v = eval_expr(OperatorExpr([term(1, word=w)]), model, free={"c": c, "e": e})
                worst = max(worst, _norm(v))
        for i, j, p, q in itertools.product(range(m), repeat=4):
            worst = max(worst, _norm(C[i, j] @ C[p, q] - C[p, q] @ C[i, j]))
            worst = max(worst, _norm(C[i, j] @ C[i, j]))
        for val in _meta_values([w for _, w in P1EXP], m):
            s = 0
            for c, w in P1EXP:
                a, b = ([val[x.label] - 1 for x in at.slots] for at in w)
                s = s + float(c) * C[a[0], a[1]] @ C[b[0], b[1]]
            worst = max(worst, _norm(s))
        X = np.tensordot(rng.normal(size=(m, m)), C, axes=([0, 1], [0, 1]))
        worst = max(worst, _norm(X @ X))
    return OracleReport("nilpotency", seed, trials, worst, tol, {"sampler": "commuting-square-zero"})


def p1exp_generic_residual(seed: int = 0, m: int = 4, r: int = 2) -> float:
    """Size of the coordinate relation on a generic model (expected far from 0)."""
    from .linear import P1EXP

    model = generic_model(m, r, np.random.default_rng(seed))
    C = model.component((), {})
    worst = 0.0
    for val in _meta_values([w for _, w in P1EXP], m):
        s = 0
        for c, w in P1EXP:
            a, b = ([val[x.label] - 1 for x in at.slots] for at in w)
            s = s + float(c) * C[a[0], a[1]] @ C[b[0], b[1]]
        worst = max(worst, _norm(s))
    return worst


# ---------------------------------------------------------------- quadrature

@dataclass
class QuadratureTask:
    J: tuple[int, ...]
    K: tuple[int, ...]
    p: int
    tk: float = 30.0
    k: float = 1.0
    tol: float = 1e-6
    point: tuple[complex, ...] | None = None


def _gauss_poly(J, K, z) -> list[complex]:
    """Coefficients g_j with E[(a y + z)^J (a ybar + zbar)^K] = sum_j g_j (a^2/pi)^j."""
    n = min(len(J), len(K))
    g = [0j] * (n + 1)
    for j in range(n + 1):
        for S in itertools.combinations(range(len(J)), j):
            for T in itertools.permutations(range(len(K)), j):
                if any(J[s] != K[t] for s, t in zip(S, T)):
                    continue
                v = 1 + 0j
                for i in range(len(J)):
                    if i not in S:
                        v *= z[J[i]]
                for i in range(len(K)):
                    if i not in T:
                        v *= np.conj(z[K[i]])
                g[j] += v
    return g


def quad_linv_value(task: QuadratureTask) -> complex:
    """e^{-4p tk} times L^{-1}(e^{4p tk} z^J zbar^K) by quadrature."""
    J, K, p, tk, k = task.J, task.K, task.p, task.tk, task.k
    m = max(J + K, default=0) + 1
    z = np.asarray(task.point if task.point is not None else _default_point(m), complex)
    n = len(J) + len(K)
    g = _gauss_poly(J, K, z)

    def weight(u: float) -> float:
        # mu(s)/mu(tk) e^{4p(s - tk)} with u = tk - s
        ratio = (math.exp(-u) - math.exp(u - 2 * tk)) / (1 - math.exp(-2 * tk)) if n else 1.0
        return ratio ** n * math.exp(u * (len(J) - len(K))) * math.exp(-4 * p * u)

    total = 0j
    for j, gj in enumerate(g):
        if gj == 0:
            continue
        # (a^2/pi)^j = (4u/k)^j
        val, _ = integrate.quad(lambda u: weight(u) * (4 * u / k) ** j, 0, tk,
                                epsabs=0, epsrel=1e-12, limit=200)
        total += gj * val
    return total / k


def _default_point(m: int) -> list[complex]:
    rng = np.random.default_rng(12345)
    return list((rng.normal(size=m) + 1j * rng.normal(size=m)) / 2)


def symbolic_linv_value(task: QuadratureTask) -> complex:
    """The engine's asymptotic L^{-1}, evaluated at the task point (e^{4p tk} removed)."""
    m = max(task.J + task.K, default=0) + 1
    z = np.asarray(task.point if task.point is not None else _default_point(m), complex)
    t = term(1, expd=task.p, z=tuple(str(j) for j in task.J), zb=tuple(str(j) for j in task.K))
    res = linv_asymptotic(OperatorExpr([t]))
    total = 0j
    for s in res.terms:
        v = complex(float(s.coeff)) * task.k ** s.kpow * (task.tk / task.k) ** s.tpow
        for a in s.z:
            v *= z[int(a)]
        for a in s.zb:
            v *= np.conj(z[int(a)])
        total += v
    return total


def quad_linv(task: QuadratureTask) -> OracleReport:
    if task.p < 0 or (4 * task.p + 2 * len(task.K) <= 0 and (task.J or task.K)):
        raise ValueError("quad_linv refuses boundary-class tasks")
    num = quad_linv_value(task)
    sym = symbolic_linv_value(task)
    rel = abs(num - sym) / max(abs(num), 1e-300)
    return OracleReport("quad-linv", None, 1, rel, task.tol,
                        {"J": list(task.J), "K": list(task.K), "p": task.p, "tk": task.tk,
                         "numeric": [num.real, num.imag], "symbolic": [sym.real, sym.imag]})


def _leading_integral(nJ: int, nK: int, p: int, tk: float) -> float:
    """int_0^tk mu_JK(s)/mu_JK(tk) e^{4p(s - tk)} ds, the uncontracted L^{-1} factor (k = 1)."""
    n = nJ + nK

    def w(u: float) -> float:
        ratio = (math.exp(-u) - math.exp(u - 2 * tk)) / (1 - math.exp(-2 * tk)) if n else 1.0
        return ratio ** n * math.exp(u * (nJ - nK) - 4 * p * u)

    val, _ = integrate.quad(w, 0, tk, epsabs=0, epsrel=1e-13, limit=200)
    return val


def lpowera_quadrature(a: int, p: int, J: tuple[int, ...], K: tuple[int, ...],
                       tk: float = 30.0) -> float:
    """Relative error of the leading coefficient of (-L^{-1} 2e^{4kt})^a on
    e^{4ptk} z^J zbar^K against step-by-step quadrature with the full weight."""
    from .model_operator import lpowera_coefficient

    num = 1.0
    for i in range(1, a + 1):
        num *= -2 * _leading_integral(len(J), len(K), p + i, tk)
    sym = float(lpowera_coefficient(a, p, len(K)))
    return abs(num - sym) / abs(sym)


def wick_check(max_degree: int = 6, tol: float = 1e-9) -> OracleReport:
    """Gaussian moments E[y^J ybar^K] (density e^{-pi|y|^2}) against dblquad."""
    worst = 0.0
    cases = 0
    for d in range(max_degree + 1):
        for nJ in range(d + 1):
            nK = d - nJ
            for J in itertools.combinations_with_replacement(range(2), nJ):
                for K in itertools.combinations_with_replacement(range(2), nK):
                    c, pw = wick_moment(J, K)
                    sym = float(c) * math.pi ** pw
                    num = 1.0 + 0j
                    for coord in range(2):
                        a, b = J.count(coord), K.count(coord)
                        num *= _moment_1d(a, b)
                    worst = max(worst, abs(num - sym))
                    cases += 1
    return OracleReport("wick", None, cases, worst, tol, {"maxDegree": max_degree})


@functools.lru_cache(maxsize=None)
def _moment_1d(a: int, b: int) -> complex:
    def f(y, x, part):
        w = complex(x, y) ** a * complex(x, -y) ** b * math.exp(-math.pi * (x * x + y * y))
        return w.real if part == 0 else w.imag

    re, _ = integrate.dblquad(f, -7, 7, -7, 7, args=(0,), epsabs=1e-13, epsrel=1e-12)
    im, _ = integrate.dblquad(f, -7, 7, -7, 7, args=(1,), epsabs=1e-13, epsrel=1e-12)
    return complex(re, im)
