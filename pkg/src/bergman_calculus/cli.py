"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 regime violation, 3 golden mismatch.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from importlib import resources

from .model_operator import MODES, RegimeError
from .relations import InconsistentRelations, get_preset
from .terms import OperatorExpr, term_latex, term_text, to_latex, to_text

EXIT_OK, EXIT_USAGE, EXIT_REGIME, EXIT_GOLDEN = 0, 1, 2, 3


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    level: int = 0
    cutoff: int = -7
    taylor: int = 2
    project: tuple[int, int] | None = None
    charge: int | None = None
    preset: str | None = None
    format: str = "text"
    mode: str = "heat-kernel"
    seed: int = 0
    trials: int | None = None
    tol: float | None = None
    a: int = 1
    qin: int = 0
    p: int = 1
    tk: float = 30.0
    task: str = "quad-linv"
    chain: str | None = None
    mirror: bool = False
    linear: str | None = None
    m: int = 4
    trace: bool = False
    invariants: bool = False
    flat: bool = False
    lenient: bool = False
    table: str | None = None
    golden: str | None = None
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        d = asdict(self)
        d["project"] = list(self.project) if self.project else None
        return d

    @classmethod
    def from_json(cls, d: dict) -> "RunConfig":
        d = dict(d)
        if d.get("project") is not None:
            d["project"] = tuple(d["project"])
        return cls(**d)


# ---------------------------------------------------------------- output helpers

def _terms_json(x: OperatorExpr) -> list[dict]:
    return [{"coeff": str(t.coeff), "text": term_text(t), "latex": term_latex(t)} for t in x.terms]


def _expr_out(x: OperatorExpr) -> dict:
    return {"text": to_text(x), "latex": to_latex(x), "terms": _terms_json(x)}


# ---------------------------------------------------------------- commands

def _project(cfg: RunConfig) -> tuple[int, int] | None:
    if cfg.project is None:
        return None
    dout, din = cfg.project
    if dout % 2 or din % 2:
        raise UsageError("--project takes even form degrees OUT,IN")
    return dout // 2, din // 2


def cmd_expand(cfg: RunConfig) -> dict:
    from .expansion import compute_u, nu0
    from .hamiltonian import build_H, flat_reduction
    from .terms import project_degrees, weight_of

    pr = _project(cfg)
    qout, qin = pr if pr else (None, cfg.qin)
    H = build_H(cfg.taylor, 0)
    if cfg.flat:
        H = flat_reduction(H, keep={"F02"})
    rep = compute_u(cfg.level, H, cfg.cutoff, qin=qin, qout=qout, mode=cfg.mode,
                    strict=not cfg.lenient)
    out: dict = {"command": "expand", "level": cfg.level, "cutoff": cfg.cutoff,
                 "taylor": cfg.taylor, "flat": cfg.flat, "mode": cfg.mode,
                 "boundary": [b.to_json() for b in rep.boundary]}
    if pr is None:
        out["levels"] = [_expr_out(u) for u in rep.levels]
    else:
        block = rep.block(qout, qin, cfg.charge)
        out["project"] = [2 * qout, 2 * qin]
        out["charge"] = cfg.charge
        out["block"] = _expr_out(block)
        if not block.is_zero():
            top = max(weight_of(t) for t in block.terms)
            out["leading"] = _expr_out(block.filter(lambda t: weight_of(t) == top))
        if cfg.preset:
            out["preset"] = cfg.preset
            out["aggregate"] = _expr_out(nu0(block, get_preset(cfg.preset)))
    out["orders"] = rep.order_table()
    if cfg.invariants:
        ok_w = all(weight_of(t) <= -2 * j for j, u in enumerate(rep.levels) for t in u.terms)
        viol = [[j, q] for j, u in enumerate(rep.levels) for q in range(4)
                if j < abs(q - qin) and not project_degrees(u, qin, q).is_zero()]
        out["invariants"] = {"weightFiltration": ok_w, "degreeSelection": not viol,
                             "violations": viol}
    return out


def cmd_compose(cfg: RunConfig) -> dict:
    from .expansion import composition_ledger, displayed_coefficient

    charge = 0 if cfg.charge is None else cfg.charge
    entries = {}
    for name, (desc, x) in composition_ledger(charge).items():
        entries[name] = {"description": desc, **_expr_out(x),
                         "displayed": [str(displayed_coefficient(t)) for t in x.terms]}
    return {"command": "compose", "charge": charge, "entries": entries}


def cmd_hsnorm(cfg: RunConfig) -> dict:
    from .expansion import hs_leading, order_estimate

    preset = get_preset(cfg.preset) if cfg.preset else None
    nc = hs_leading(cfg.a, cfg.qin, preset)
    out = {"command": "hsnorm", "a": cfg.a, "qin": cfg.qin, "preset": cfg.preset}
    out.update(nc.to_json())
    out["orderEstimate"] = order_estimate(cfg.a, cfg.qin, preset)
    return out


def cmd_relations(cfg: RunConfig) -> dict:
    from .expansion import order_estimate

    preset = get_preset(cfg.preset or "none")
    out: dict = {"command": "relations", "preset": preset.name,
                 "rules": [str(r) for r in preset.rules]}
    out["orderEstimates"] = {f"{a},{mu}": order_estimate(a, mu, preset)
                             for a in range(4) for mu in range(3)}
    if cfg.linear:
        from . import linear
        targets = {"commutator": linear.COMMUTATOR, "product": linear.PRODUCT}
        if cfg.linear not in targets:
            raise UsageError(f"--linear takes one of {sorted(targets)}")
        res = linear.linear_consequence(targets[cfg.linear], linear.P1EXP, cfg.m)
        out["linear"] = {"target": cfg.linear, "m": cfg.m, **res.to_json()}
    return out


def cmd_vary(cfg: RunConfig) -> dict:
    from .variation import CHAINS

    name = cfg.chain or "isv12"
    if name not in CHAINS:
        raise UsageError(f"--chain takes one of {sorted(CHAINS)}")
    steps = CHAINS[name](cfg.m)
    return {"command": "vary", "chain": name, "steps": [s.to_json() for s in steps],
            "pass": all(s.ok for s in steps)}


def cmd_chern(cfg: RunConfig) -> dict:
    from .chern import CHAINS, chern_word_survey, verify_trace_chain

    out: dict = {"command": "chern"}
    if cfg.chain is not None:
        if cfg.chain not in CHAINS:
            raise UsageError(f"--chain takes one of {sorted(CHAINS)}")
        out["chain"] = verify_trace_chain(cfg.chain).to_json()
        return out
    if not 1 <= cfg.p <= 8:
        raise UsageError("--p must be in 1..8")
    rep = chern_word_survey(cfg.p, get_preset(cfg.preset or "none"), mirror=cfg.mirror)
    out.update(rep.to_json())
    return out


def cmd_oracle(cfg: RunConfig) -> dict:
    from . import oracle

    t = cfg.task
    if t == "quad-linv":
        J = tuple(cfg.extra.get("J", ()))
        K = tuple(cfg.extra.get("K", ()))
        rep = oracle.quad_linv(oracle.QuadratureTask(J, K, cfg.p, cfg.tk, tol=cfg.tol or 1e-6))
    elif t == "wick":
        rep = oracle.wick_check(tol=cfg.tol or 1e-9)
    elif t == "nilpotency":
        rep = oracle.nilpotency_check(cfg.trials or 100, cfg.seed, tol=cfg.tol or 1e-12)
    elif t == "leibniz":
        from .relations import F0, Fd
        from .terms import h, hb
        rel = [(Fraction(1), (F0, Fd(hb("?x"))))]
        rep = oracle.leibniz_check(rel, h("a"), cfg.trials or 5, cfg.seed, tol=cfg.tol or 1e-8)
    elif t == "lpowera":
        worst = 0.0
        for a in range(1, 5):
            for p in range(4):
                for nJ in range(5):
                    for nK in range(5):
                        worst = max(worst, oracle.lpowera_quadrature(a, p, (0,) * nJ, (0,) * nK, cfg.tk))
        from .model_operator import lpowera_engine
        table = {f"{a},{p},{n}": str(lpowera_engine(a, p, [f"j{i}" for i in range(n)],
                                                      [f"j{i}" for i in range(n)]))
                 for a, p, n in [(1, 0, 0), (2, 1, 1), (3, 0, 2), (4, 3, 4)]}
        rep = oracle.OracleReport("lpowera", None, 400, worst, cfg.tol or 1e-6,
                                  {"table": table})
    else:
        raise UsageError(f"unknown oracle task {t!r}")
    return {"command": "oracle", **rep.to_json()}


COMMANDS = {
    "expand": cmd_expand, "compose": cmd_compose, "hsnorm": cmd_hsnorm, "relations": cmd_relations,
    "vary": cmd_vary, "chern": cmd_chern, "oracle": cmd_oracle,
}


# ---------------------------------------------------------------- golden tables

GOLDEN_TABLES = ("lpowera", "uaexp", "naya", "ma411", "sqv1", "peq3", "charge-2",
                 "orders", "derivations", "chern", "oracles", "invariants")

_NON_SEMANTIC = {"--golden": 1, "--format": 1, "--trace": 0}


def load_golden(name: str) -> dict:
    fname = name if name.endswith(".json") else name + ".json"
    try:
        text = resources.files("bergman_calculus").joinpath("golden", fname).read_text()
    except FileNotFoundError:
        raise UsageError(f"no golden table {name!r}") from None
    return json.loads(text)


def golden_mismatches(expect, got, path: str = "") -> list[str]:
    """Every key of ``expect`` must be present in ``got`` with an equal value."""
    if isinstance(expect, dict):
        if not isinstance(got, dict):
            return [f"{path}: expected an object"]
        out = []
        for k, v in expect.items():
            if k not in got:
                out.append(f"{path}/{k}: missing")
            else:
                out += golden_mismatches(v, got[k], f"{path}/{k}")
        return out
    if expect != got:
        return [f"{path}: expected {expect!r}, got {got!r}"]
    return []


def semantic_argv(argv: list[str]) -> list[str]:
    out, skip = [], 0
    for x in argv:
        if skip:
            skip -= 1
            continue
        if x in _NON_SEMANTIC:
            skip = _NON_SEMANTIC[x]
            continue
        out.append(x)
    return out


def check_golden(name: str, argv: list[str], out: dict) -> list[str]:
    table = load_golden(name)
    key = semantic_argv(argv)
    for case in table["cases"]:
        if case["argv"] == key:
            return golden_mismatches(case["expect"], out)
    raise UsageError(f"golden table {name!r} has no case for {' '.join(key)!r}")


def run_case(argv: list[str]) -> dict:
    return COMMANDS[argv[0]](parse_config(argv))


def cmd_golden(cfg: RunConfig) -> dict:
    names = [cfg.table] if cfg.table else list(GOLDEN_TABLES)
    results = []
    for name in names:
        table = load_golden(name)
        for case in table["cases"]:
            try:
                bad = golden_mismatches(case["expect"], run_case(case["argv"]))
            except (RegimeError, ValueError, NotImplementedError) as e:
                bad = [f"error: {e}"]
            results.append({"table": name, "criterion": table.get("criterion"),
                            "argv": " ".join(case["argv"]), "pass": not bad, "mismatches": bad})
    return {"command": "golden", "cases": results, "pass": all(r["pass"] for r in results)}


COMMANDS["golden"] = cmd_golden


# ---------------------------------------------------------------- entry point

def _pair(s: str) -> tuple[int, int]:
    try:
        a, b = (int(x) for x in s.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("expected OUT,IN") from None
    return a, b


def _ints(s: str) -> list[int]:
    return [int(x) for x in s.split(",") if x != ""]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json", "latex"], default="text")
    common.add_argument("--golden", metavar="TABLE", help="compare with a checked-in table")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float)
    common.add_argument("--preset")
    common.add_argument("--trace", action="store_true", help="print the full JSON report on stderr")

    p = _Parser(prog="bergman-calculus", description="Symbolic Bergman-projector calculus.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("expand", parents=[common], help="iterate u_{l+1} = -L^{-1} H u_l")
    e.add_argument("--level", type=int, default=0)
    e.add_argument("--cutoff", type=int, default=-7)
    e.add_argument("--taylor", type=int, default=2)
    e.add_argument("--project", type=_pair, metavar="OUT,IN", help="form degrees, e.g. 4,0")
    e.add_argument("--charge", type=int)
    e.add_argument("--mode", choices=MODES, default="heat-kernel")
    e.add_argument("--invariants", action="store_true")
    e.add_argument("--lenient", action="store_true",
                   help="record boundary-class terms instead of failing")
    e.add_argument("--qin", type=int, default=0, help="input form degree / 2 when not projecting")
    e.add_argument("--flat", action="store_true", help="keep only the form-degree changing curvature")

    cp = sub.add_parser("compose", parents=[common], help="composition ledger of a charge block")
    cp.add_argument("--charge", type=int, default=0)

    h = sub.add_parser("hsnorm", parents=[common], help="leading HS norm coefficient")
    h.add_argument("--a", type=int, default=1)
    h.add_argument("--qin", type=int, default=0)

    r = sub.add_parser("relations", parents=[common], help="preset rules and consequences")
    r.add_argument("--linear", help="commutator | product")
    r.add_argument("--m", type=int, default=4)

    v = sub.add_parser("vary", parents=[common], help="metric-variation chains")
    v.add_argument("--chain", default="isv12")
    v.add_argument("--m", type=int, default=4)

    c = sub.add_parser("chern", parents=[common], help="Chern-word survey and trace chains")
    c.add_argument("--p", type=int, default=6)
    c.add_argument("--mirror", action="store_true")
    c.add_argument("--chain")

    o = sub.add_parser("oracle", parents=[common], help="numeric oracles")
    o.add_argument("--task", default="quad-linv",
                   choices=["quad-linv", "wick", "nilpotency", "leibniz", "lpowera"])
    o.add_argument("--p", type=int, default=1)
    o.add_argument("--tk", type=float, default=30.0)
    o.add_argument("--J", type=_ints, default=[])
    o.add_argument("--K", type=_ints, default=[])
    o.add_argument("--trials", type=int)

    g = sub.add_parser("golden", parents=[common], help="run every checked-in golden case")
    g.add_argument("--table", choices=GOLDEN_TABLES)
    return p


def parse_config(argv: list[str] | None = None) -> RunConfig:
    ns = vars(build_parser().parse_args(argv))
    extra = {k: ns.pop(k) for k in ("J", "K") if k in ns}
    known = RunConfig.__dataclass_fields__
    cfg = RunConfig(**{k: v for k, v in ns.items() if k in known and v is not None})
    cfg.extra = extra
    return cfg


def _render(out: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(out, indent=2, sort_keys=True)
    lines = []
    key = "latex" if fmt == "latex" else "text"
    for k, v in out.items():
        if isinstance(v, dict) and key in v and "terms" in v:
            lines.append(f"{k}:")
            lines += ["  " + x for x in v[key].splitlines()]
        elif k == "levels":
            for j, u in enumerate(v):
                lines.append(f"u_{j}:")
                lines += ["  " + x for x in u[key].splitlines()]
        elif k == "entries":
            for name, ent in v.items():
                lines.append(f"{name}: {ent['description']}")
                lines += ["  " + x for x in ent[key].splitlines()]
        elif k == "cases":
            for c in v:
                lines.append(f"[{'ok' if c['pass'] else 'FAIL'}] {c['table']}: {c['argv']}")
                lines += ["    " + m for m in c["mismatches"]]
        elif k == "steps":
            for s in v:
                lines.append(f"[{'ok' if s['pass'] else 'FAIL'}] {s['step']}: {s['expr']}")
        else:
            lines.append(f"{k}: {json.dumps(v, sort_keys=True)}")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    try:
        out = COMMANDS[cfg.command](cfg)
    except RegimeError as e:
        print(f"regime violation: {e}", file=sys.stderr)
        return EXIT_REGIME
    except (UsageError, InconsistentRelations, ValueError, NotImplementedError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    if cfg.trace:
        print(json.dumps(out, indent=2, sort_keys=True), file=sys.stderr)
    print(_render(out, cfg.format))
    if cfg.golden:
        try:
            bad = check_golden(cfg.golden, argv, out)
        except UsageError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_USAGE
        if bad:
            print(f"golden mismatch against {cfg.golden}:", file=sys.stderr)
            for b in bad:
                print("  " + b, file=sys.stderr)
            return EXIT_GOLDEN
        print(f"golden {cfg.golden}: ok", file=sys.stderr)
    if cfg.command == "golden" and not out["pass"]:
        return EXIT_GOLDEN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
