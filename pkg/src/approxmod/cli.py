"""Command-line entry point.  Every command prints one JSON report
{command, verdict, payload, diagnostics} and exits with 0 (affirmative),
1 (negative), 2 (unknown), 64 (usage), 65 (bad input) or 70."""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from . import equality as eqm
from . import kripke as kp
from . import lam
from . import logic as lg
from . import measures as ms
from . import subtyping as sb
from . import typing as ty
from .classify import classify as classify_type
from .common import Unknown
from .syntax import ParseError, parse_term, parse_type, print_term, print_type

EXIT_YES, EXIT_NO, EXIT_UNKNOWN, EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 0, 1, 2, 64, 65, 70


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _report(command: str, verdict, payload=None, diagnostics=None) -> dict:
    return {"command": command, "verdict": verdict, "payload": payload if payload is not None else {},
            "diagnostics": list(diagnostics or [])}


def _load_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _load(path: str, reader):
    """Decode a certificate file; any shape mismatch is bad input."""
    obj = _load_json(path)
    try:
        return reader(obj)
    except (AttributeError, IndexError, TypeError, KeyError, ValueError) as e:
        if isinstance(e, ParseError):
            raise
        raise ValueError(f"malformed certificate in {path}: {type(e).__name__}: {e}") from None


def _pctx(text: Optional[str]) -> List:
    if not text:
        return []
    parts, depth, cur = [], 0, ""
    for ch in text:
        depth += ch == "("
        depth -= ch == ")"
        if ch == ";" or (ch == "," and depth == 0):
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    return [parse_type(p) for p in parts if p.strip()]


# ---------------------------------------------------------------------------
# commands


def cmd_measure(a):
    A = parse_type(a.type)
    e = ms.etv(A)
    depths = {}
    for x in sorted(A.ftv):
        depths[x] = {
            f"{k}{s}": ms.depth(A, x, k, s).to_json()
            for k in (ms.LATER, ms.ARROW) for s in "+-"
        }
    payload = {
        "type": print_type(A),
        "tail": print_type(ms.tail(A)),
        "top_variant": ms.is_top_variant(A),
        "etv": {"pos": sorted(e.positive), "neg": sorted(e.negative)},
        "height": ms.height(A),
        "rank": ms.rank(A),
        "depths": depths,
    }
    return "ok", payload, [], EXIT_YES


def cmd_canon(a):
    A = parse_type(a.type)
    c = eqm.canon(A, a.mode)
    return "ok", {"type": print_type(A), "mode": eqm.as_mode(a.mode).value, "canon": print_type(c.to_type())}, [], EXIT_YES


def cmd_eq(a):
    A, B = parse_type(a.lhs), parse_type(a.rhs)
    trace = []
    r = eqm.type_eq(A, B, a.mode, trace)
    payload = {"lhs": print_type(A), "rhs": print_type(B), "mode": eqm.as_mode(a.mode).value,
               "trace": eqm.trace_to_json(trace)}
    return ("true" if r else "false"), payload, [], EXIT_YES if r else EXIT_NO


def cmd_comp(a):
    A = parse_type(a.type)
    reps = eqm.comp_types(A)
    return "ok", {"type": print_type(A), "classes": [print_type(t) for t in reps], "count": len(reps)}, [], EXIT_YES


def cmd_classify(a):
    A = parse_type(a.type)
    c = classify_type(A)
    return "ok", {"type": print_type(A), **c.to_json()}, [], EXIT_YES


def cmd_sub(a):
    if a.sub_cmd == "check":
        d = _load(a.file, sb.SubDeriv.from_json)
        res = sb.check_subderiv(d)
        return ("valid" if res.ok else "invalid"), {"height": d.height(), "size": d.size()}, res.messages(), \
            EXIT_YES if res.ok else EXIT_NO
    A, B = parse_type(a.lhs), parse_type(a.rhs)
    r = sb.prove_sub(frozenset(), A, B, max_k=a.max_k, fuel=a.fuel)
    if isinstance(r, Unknown):
        return "unknown", {"lhs": print_type(A), "rhs": print_type(B)}, [r.reason], EXIT_UNKNOWN
    return "proved", {"derivation": r.to_json()}, [], EXIT_YES


def cmd_term(a):
    M = parse_term(a.term)
    if a.term_cmd == "hnf":
        r = lam.head_normalize(M, a.fuel)
        payload = {"term": print_term(r.term), "steps": r.steps}
        return ("hnf" if r else "unknown"), payload, [] if r else ["fuel exhausted"], EXIT_YES if r else EXIT_UNKNOWN
    if a.term_cmd == "nf":
        r = lam.normalize(M, a.fuel)
        payload = {"term": print_term(r.term), "steps": r.steps}
        return ("nf" if r else "unknown"), payload, [] if r else ["fuel exhausted"], EXIT_YES if r else EXIT_UNKNOWN
    t = lam.bohm_tree(M, a.depth, a.fuel)
    pending = lam.count_pending(t)
    payload = {"tree": t.to_json(), "printed": lam.print_bohm(t), "pending": pending}
    return ("complete" if not pending else "partial"), payload, [], EXIT_YES if not pending else EXIT_UNKNOWN


def _typ_report(d: ty.TypDeriv):
    res = ty.check_typderiv(d)
    payload = {
        "conclusion": {"ctx": ty.print_ctx(d.ctx), "term": print_term(d.term), "type": print_type(d.type)},
        "derivation": d.to_json(),
    }
    return ("valid" if res.ok else "invalid"), payload, res.messages(), EXIT_YES if res.ok else EXIT_NO


def cmd_type(a):
    d = _load(a.file, ty.TypDeriv.from_json)
    if a.type_cmd == "check":
        v, payload, diags, code = _typ_report(d)
        payload.pop("derivation")
        return v, payload, diags, code
    res = ty.check_typderiv(d)
    if not res.ok:
        return "invalid", {}, res.messages(), EXIT_NO
    if a.type_cmd == "nec":
        out = ty.elab_nec(d, ty.parse_ctx(a.extend or ""))
    elif a.type_cmd == "subst":
        d2 = _load(a.file2, ty.TypDeriv.from_json)
        res2 = ty.check_typderiv(d2)
        if not res2.ok:
            return "invalid", {}, res2.messages(), EXIT_NO
        out = ty.elab_subst(d, a.var, d2)
    else:
        path = [int(p) for p in a.path.split(".") if p != ""] if a.path else []
        out = ty.subject_reduce(d, path)
    return _typ_report(out)


def cmd_kripke(a):
    f, val = _load(a.file, kp.Frame.from_json)
    if a.kripke_cmd == "validate":
        v = kp.frame_violations(f, a.cls)
        return ("valid" if not v else "invalid"), {"class": kp.as_frame_class(a.cls).value}, v, \
            EXIT_YES if not v else EXIT_NO
    if not kp.is_hereditary(f, val):
        return "error", {}, ["valuation is not hereditary"], EXIT_INPUT
    r = kp.model_check(f, val, a.world, parse_type(a.formula))
    return ("true" if r else "false"), {"world": a.world, "formula": a.formula}, [], EXIT_YES if r else EXIT_NO


def cmd_logic(a):
    if a.logic_cmd == "check":
        p = _load(a.file, lg.Proof.from_json)
        res = lg.check_proof(p)
        payload = {"system": p.system.value, "ctx": [print_type(t) for t in p.ctx], "formula": print_type(p.goal)}
        return ("valid" if res.ok else "invalid"), payload, res.messages(), EXIT_YES if res.ok else EXIT_NO
    ctx = _pctx(a.ctx)
    goal = parse_type(a.goal)
    if a.logic_cmd == "prove":
        r = lg.prove(a.system, ctx, goal, max_depth=a.depth, fuel=a.fuel)
        if isinstance(r, Unknown):
            return "unknown", {}, [r.reason], EXIT_UNKNOWN
        return "provable", {"proof": r.to_json()}, [], EXIT_YES
    if a.logic_cmd == "counter":
        r = lg.countermodel(a.system, ctx, goal, a.max_worlds)
        if isinstance(r, lg.NotFound):
            return "notfound", {"max_worlds": a.max_worlds}, [], EXIT_UNKNOWN
        return "refutable", {"countermodel": r.to_json()}, [], EXIT_NO
    v = lg.decide(a.system, ctx, goal, max_depth=a.depth, max_worlds=a.max_worlds, fuel=a.fuel)
    code = {"Provable": EXIT_YES, "Refutable": EXIT_NO}.get(v.kind, EXIT_UNKNOWN)
    return v.kind, v.to_json(), [v.reason] if v.reason else [], code


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--mode", default="congr", help="congr or sim")
    common.add_argument("--fuel", type=int, default=100_000)
    common.add_argument("--depth", type=int, default=12)
    common.add_argument("--max-k", type=int, default=4)
    common.add_argument("--max-worlds", type=int, default=4)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--json", action="store_true", help="compact single-line JSON")

    p = _Parser(prog="approxmod", description="Recursive modal types, lambda-A and its logics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("measure", parents=[common])
    s.add_argument("type")
    s = sub.add_parser("canon", parents=[common])
    s.add_argument("type")
    s = sub.add_parser("eq", parents=[common])
    s.add_argument("lhs")
    s.add_argument("rhs")
    s = sub.add_parser("comp", parents=[common])
    s.add_argument("type")
    s = sub.add_parser("classify", parents=[common])
    s.add_argument("type")

    s = sub.add_parser("sub")
    ss = s.add_subparsers(dest="sub_cmd", required=True, parser_class=_Parser)
    x = ss.add_parser("check", parents=[common])
    x.add_argument("file")
    x = ss.add_parser("prove", parents=[common])
    x.add_argument("lhs")
    x.add_argument("rhs")

    s = sub.add_parser("term")
    ss = s.add_subparsers(dest="term_cmd", required=True, parser_class=_Parser)
    for name in ("hnf", "nf", "bohm"):
        x = ss.add_parser(name, parents=[common])
        x.add_argument("term")

    s = sub.add_parser("type")
    ss = s.add_subparsers(dest="type_cmd", required=True, parser_class=_Parser)
    x = ss.add_parser("check", parents=[common])
    x.add_argument("file")
    x = ss.add_parser("nec", parents=[common])
    x.add_argument("file")
    x.add_argument("--extend", default="")
    x = ss.add_parser("subst", parents=[common])
    x.add_argument("file")
    x.add_argument("file2")
    x.add_argument("--var", required=True)
    x = ss.add_parser("step", parents=[common])
    x.add_argument("file")
    x.add_argument("--path", default="")

    s = sub.add_parser("kripke")
    ss = s.add_subparsers(dest="kripke_cmd", required=True, parser_class=_Parser)
    x = ss.add_parser("validate", parents=[common])
    x.add_argument("file")
    x.add_argument("--class", dest="cls", default="la")
    x = ss.add_parser("eval", parents=[common])
    x.add_argument("file")
    x.add_argument("world")
    x.add_argument("formula")

    s = sub.add_parser("logic")
    ss = s.add_subparsers(dest="logic_cmd", required=True, parser_class=_Parser)
    x = ss.add_parser("check", parents=[common])
    x.add_argument("file")
    for name in ("prove", "counter", "decide"):
        x = ss.add_parser(name, parents=[common])
        x.add_argument("goal")
        x.add_argument("--system", default="LAmu")
        x.add_argument("--ctx", default="", help="assumptions separated by ';'")
    return p


HANDLERS = {
    "measure": cmd_measure, "canon": cmd_canon, "eq": cmd_eq, "comp": cmd_comp, "classify": cmd_classify,
    "sub": cmd_sub, "term": cmd_term, "type": cmd_type, "kripke": cmd_kripke, "logic": cmd_logic,
}


def run(argv: Optional[List[str]] = None):
    """Returns (report, exit code) without printing."""
    argv = list(sys.argv[1:] if argv is None else argv)
    name = " ".join(argv[:2]) if argv[:1] and argv[0] in ("sub", "term", "type", "kripke", "logic") else (argv[0] if argv else "")
    try:
        a = build_parser().parse_args(argv)
    except UsageError as e:
        return _report(name, "error", {}, [f"usage: {e}"]), EXIT_USAGE
    try:
        verdict, payload, diags, code = HANDLERS[a.command](a)
    except ParseError as e:
        return _report(name, "error", {}, [f"parse error: {e}"]), EXIT_INPUT
    except (OSError, json.JSONDecodeError) as e:
        return _report(name, "error", {}, [f"input error: {e}"]), EXIT_INPUT
    except (ValueError, KeyError, TypeError) as e:
        return _report(name, "error", {}, [f"{type(e).__name__}: {e}"]), EXIT_INPUT
    except RecursionError:
        return _report(name, "error", {}, ["input too deeply nested"]), EXIT_INPUT
    except Exception as e:  # noqa: BLE001 - reported, never raised
        return _report(name, "error", {}, [f"internal error: {type(e).__name__}: {e}"]), EXIT_INTERNAL
    return _report(name, verdict, payload, diags), code


def main(argv: Optional[List[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    rep, code = run(argv)
    if "--json" in argv:
        print(json.dumps(rep, sort_keys=True, ensure_ascii=False))
    else:
        print(json.dumps(rep, indent=2, sort_keys=True, ensure_ascii=False))
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
