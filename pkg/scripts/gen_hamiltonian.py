"""Regenerate src/bergman_calculus/data/hamiltonian.json from the transcription below.

Bound labels are small integers local to each term.  Tags name the display
line (Hh.Lnn for the weight-0 display, dH.Lnn for the weight -1 display).
"""

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from bergman_calculus.terms import atom, h, hb, term  # noqa: E402

R4 = lambda *s: atom("Riem", slots=s)  # noqa: E731
entries = []


def add(group, tag, t, order=None):
    d = {"group": group, "tag": tag, "term": t.to_json()}
    if order is not None:
        d["taylorOrder"] = order
    entries.append(d)


# weight-0 display; i,j,a,b,c,l,e -> 1..7 per term
add("Hh", "Hh.L01", term("-8/3", zb=(2,), z=(3,), dzb=(1,), dz=(4,), word=(R4(h(1), hb(2), h(3), hb(4)),)))
add("Hh", "Hh.L01", term("-4/3", zb=(2, 3), dzb=(1, 4), word=(R4(h(1), hb(2), hb(3), h(4)),)))
add("Hh", "Hh.L02", term("-4/3", z=(2, 3), dz=(1, 4), word=(R4(hb(1), h(2), h(3), hb(4)),)))
add("Hh", "Hh.L02", term("4/3", zb=(1,), dzb=(2,), word=(atom("Ric", slots=(hb(1), h(2))),)))
add("Hh", "Hh.L02", term("4/3", z=(1,), dz=(2,), word=(atom("Ric", slots=(h(1), hb(2))),)))
add("Hh", "Hh.L03", term("-2/3", kpow=1, z=(1, 3), zb=(4,), dz=(2,), word=(R4(h(1), hb(2), h(3), hb(4)),)))
add("Hh", "Hh.L03", term("2/3", kpow=1, zb=(1, 3), z=(4,), dzb=(2,), word=(R4(hb(1), h(2), hb(3), h(4)),)))
add("Hh", "Hh.L04", term("1/3", kpow=1, z=(3,), zb=(4, 2), dzb=(1,), word=(R4(h(1), hb(2), h(3), hb(4)),)))
add("Hh", "Hh.L04", term("1/3", kpow=1, z=(3, 2), zb=(4,), dz=(1,), word=(R4(hb(1), h(2), h(3), hb(4)),)))
add("Hh", "Hh.L05", term(-2, z=(1,), dz=(2,), word=(atom("FE", slots=(h(1), hb(2))),)))
add("Hh", "Hh.L05", term(-2, zb=(1,), dz=(2,), word=(atom("FE", slots=(hb(1), hb(2))),)))
add("Hh", "Hh.L05", term(-2, z=(1,), dz=(2,), word=(atom("Riem", slots=(h(1), hb(2))),)))
add("Hh", "Hh.L06", term(-2, z=(1,), dzb=(2,), word=(atom("FE", slots=(h(1), h(2))),)))
add("Hh", "Hh.L06", term(-2, zb=(1,), dzb=(2,), word=(atom("FE", slots=(hb(1), h(2))),)))
add("Hh", "Hh.L06", term(-2, zb=(1,), dzb=(2,), word=(atom("Riem", slots=(hb(1), h(2))),)))
add("Hh", "Hh.L07", term(1, kpow=1, z=(1,), zb=(2,), word=(atom("FE", slots=(h(1), hb(2))),)))
add("Hh", "Hh.L07", term(1, kpow=1, z=(1,), zb=(2,), word=(atom("Riem", slots=(h(1), hb(2))),)))
add("Hh", "Hh.L08", term("1/6", kpow=2, z=(1, 2), zb=(3, 4), word=(R4(h(2), hb(4), h(1), hb(3)),)))
add("Hh", "Hh.L08", term(1, word=(atom("Fhat"),)))
add("Hh", "Hh.L09", term("-1/3", kpow=1, zb=(1,), z=(2,), word=(atom("Ric", slots=(hb(1), h(2))),)))

# weight -1 display: nabla_{r d_r} = z^d nabla_d + zbar^d nabla_dbar, d = 9
def radial(group, tag, c, base, ai=0, **kw):
    for bar in (False, True):
        w = list(base)
        w[ai] = atom(w[ai].kind, derivs=w[ai].derivs + (hb(9) if bar else h(9),), slots=w[ai].slots)
        extra = {"zb": kw.get("zb", ()) + (9,)} if bar else {"z": kw.get("z", ()) + (9,)}
        args = dict(kw)
        args.update(extra)
        add(group, tag, term(c, word=tuple(w), **args))


radial("dH", "dH.L01", "-1/3", [R4(h(1), hb(2), h(3), hb(4))], kpow=1, z=(1, 3), zb=(4,), dz=(2,))
radial("dH", "dH.L01", "1/3", [R4(hb(1), h(2), hb(3), h(4))], kpow=1, zb=(1, 3), z=(4,), dzb=(2,))
radial("dH", "dH.L02", "1/5", [R4(h(1), hb(2), h(3), hb(4))], kpow=1, z=(3,), zb=(4, 2), dzb=(1,))
radial("dH", "dH.L02", "1/5", [R4(hb(1), h(2), h(3), hb(4))], kpow=1, z=(3, 2), zb=(4,), dz=(1,))
# (nabla_{e_j} R)(e_j, r d_r, d_a, d_bbar); sum over a real frame = 2 sum_c (d_c (x) d_cbar + conj)
for cb, slot in ((h(5), hb(5)), (hb(5), h(5))):
    for bar in (False, True):
        r = hb(9) if bar else h(9)
        kw = {"zb": (2, 9)} if bar else {"zb": (2,), "z": (9,)}
        z = kw.pop("z", ())
        add("dH", "dH.L03", term("-1/10", kpow=1, z=(1,) + z, word=(atom("Riem", derivs=(cb,), slots=(slot, r, h(1), hb(2))),), **kw))
# -1/3 d_A^* F^E (r d_r) and the Levi-Civita analogue
for kind, tag in (("FE", "dH.L04"), ("Riem", "dH.L04")):
    for cb, slot in ((h(5), hb(5)), (hb(5), h(5))):
        for bar in (False, True):
            r = hb(9) if bar else h(9)
            kw = {"zb": (9,)} if bar else {"z": (9,)}
            add("dH", tag, term("2/3", word=(atom(kind, derivs=(cb,), slots=(slot, r)),), **kw))
radial("dH", "dH.L05", "-1/12", [atom("Ric", slots=(hb(1), h(2)))], kpow=1, zb=(1,), z=(2,))
radial("dH", "dH.L06", "2/3", [atom("FE", slots=(h(1), hb(2)))], kpow=1, z=(1,), zb=(2,))
radial("dH", "dH.L06", "2/3", [atom("Riem", slots=(h(1), hb(2)))], kpow=1, z=(1,), zb=(2,))
radial("dH", "dH.L07", "1/10", [R4(h(2), hb(4), h(1), hb(3))], kpow=2, z=(1, 2), zb=(3, 4))

# creation: 2 e^{4kt} psi^{-1} e(F) psi to second order, F_{;xy} = nabla_y nabla_x F
def fam(adj, expd):
    g = "annihilation" if adj else "creation"
    A = lambda *d: atom("F02", derivs=d, adjoint=adj)  # noqa: E731
    add(g, "Cr.L0", term(2, expd=expd, word=(A(),)), 0)
    add(g, "Cr.L1", term(2, expd=expd, z=(1,), word=(A(h(1)),)), 1)
    add(g, "Cr.L1", term(2, expd=expd, zb=(1,), word=(A(hb(1)),)), 1)
    add(g, "Cr.L2", term(1, expd=expd, z=(1, 2), word=(A(h(1), h(2)),)), 2)
    add(g, "Cr.L2", term(1, expd=expd, z=(1,), zb=(2,), word=(A(h(1), hb(2)),)), 2)
    add(g, "Cr.L2", term(1, expd=expd, z=(1,), zb=(2,), word=(A(hb(2), h(1)),)), 2)
    add(g, "Cr.L2", term(1, expd=expd, zb=(1, 2), word=(A(hb(1), hb(2)),)), 2)


fam(False, 1)
fam(True, -1)

remainders = [
    {"weightBound": -1, "tag": "Hh.L09", "note": "O(r^2 nabla + r^3 nabla^2) lines of the weight-0 display"},
    {"weightBound": -2, "tag": "dH.L07", "note": "O(r^2 + k r^4 + k r^5 nabla + k r^4/tanh) lines of the weight -1 display"},
    {"weightBound": None, "tag": "Hh.L09", "note": "exp-small: 1/tanh(tk) -> 1"},
]
doc = {
    "version": 1,
    "description": "Perturbation H transcribed as term data (weight 0, weight -1, creation, annihilation).",
    "displayLines": {"Hh": 9, "dH": 7, "Cr": 3},
    "maxTaylorOrder": 2,
    "entries": entries,
    "remainders": remainders,
}
out = Path(__file__).resolve().parents[1] / "src/bergman_calculus/data/hamiltonian.json"
out.write_text(json.dumps(doc, indent=1) + "\n")
print(len(entries), "entries ->", out)
