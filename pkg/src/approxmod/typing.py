"""Typing derivations for the approximation-modality lambda calculus.

Derivations are explicit certificates.  Besides the checker this module
implements the admissible rules as derivation transformers: weakening,
renaming, necessitation (``elab_nec``), substitution (``elab_subst``) and
subject reduction (``subject_reduce``).
"""

from __future__ import annotations

from typing import Dict, Mapping, Optional, Sequence, Tuple

from . import subtyping as sb
from .common import CheckResult
from .equality import ArrC, EqMode, canon
from .lam import contract, is_redex, subterm_at, replace_at
from .measures import is_top_variant
from .syntax import (
    TOP,
    App,
    Arrow,
    Lam,
    Later,
    Mu,
    TVar,
    Term,
    Type,
    Var,
    alpha_eq,
    fresh_name,
    later_n,
    parse_term,
    parse_type,
    print_term,
    print_type,
    rename_free,
    subst_term,
    term_alpha_eq,
)

RULES = ("Var", "Shift", "TopI", "Subsume", "ArrowI", "ArrowE")

Ctx = Dict[str, Type]


class ContextClash(ValueError):
    pass


def ctx_union(a: Mapping[str, Type], b: Mapping[str, Type]) -> Ctx:
    out = dict(a)
    for k, v in b.items():
        if k in out and not alpha_eq(out[k], v):
            raise ContextClash(f"variable {k} has types {print_type(out[k])} and {print_type(v)}")
        out.setdefault(k, v)
    return out


def ctx_eq(a: Mapping[str, Type], b: Mapping[str, Type]) -> bool:
    return a.keys() == b.keys() and all(alpha_eq(a[k], b[k]) for k in a)


def ctx_later(g: Mapping[str, Type], n: int = 1) -> Ctx:
    return {k: later_n(v, n) for k, v in g.items()}


def parse_ctx(text: str) -> Ctx:
    """Parse ``x: A, y: B``.  Commas inside parentheses are allowed."""
    out: Ctx = {}
    text = text.strip()
    if not text:
        return out
    parts, depth, cur = [], 0, ""
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    parts.append(cur)
    for p in parts:
        name, _, ty = p.partition(":")
        name = name.strip()
        if not name or not ty.strip():
            raise ValueError(f"malformed context entry {p!r}")
        if name in out:
            raise ValueError(f"variable {name} bound twice")
        out[name] = parse_type(ty)
    return out


def print_ctx(g: Mapping[str, Type]) -> str:
    return ", ".join(f"{k}: {print_type(v)}" for k, v in sorted(g.items()))


class TypDeriv:
    __slots__ = ("rule", "ctx", "term", "type", "premises", "side")

    def __init__(self, rule: str, ctx: Mapping[str, Type], term: Term, type_: Type, premises=(), side=None):
        self.rule = rule
        self.ctx = dict(ctx)
        self.term = term
        self.type = type_
        self.premises = tuple(premises)
        self.side = dict(side or {})

    def height(self) -> int:
        return 1 + max((p.height() for p in self.premises), default=0)

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()

    def __repr__(self):
        return f"TypDeriv({self.rule}: {{{print_ctx(self.ctx)}}} |- {print_term(self.term)} : {print_type(self.type)})"

    def to_json(self) -> dict:
        side = {}
        if "sub" in self.side:
            side["sub"] = self.side["sub"].to_json()
        return {
            "rule": self.rule,
            "conclusion": {
                "ctx": [[k, print_type(v)] for k, v in sorted(self.ctx.items())],
                "term": print_term(self.term),
                "type": print_type(self.type),
            },
            "premises": [p.to_json() for p in self.premises],
            "side": side,
        }

    @staticmethod
    def from_json(obj: dict) -> "TypDeriv":
        c = obj["conclusion"]
        ctx = {}
        for k, v in c.get("ctx", []):
            if k in ctx:
                raise ValueError(f"variable {k} bound twice")
            ctx[k] = parse_type(v)
        side = {}
        raw = obj.get("side") or {}
        if "sub" in raw:
            side["sub"] = sb.SubDeriv.from_json(raw["sub"])
        return TypDeriv(
            obj["rule"], ctx, parse_term(c["term"]), parse_type(c["type"]),
            [TypDeriv.from_json(p) for p in obj.get("premises", [])], side,
        )


# ---------------------------------------------------------------------------
# constructors


def var(ctx, x: str) -> TypDeriv:
    return TypDeriv("Var", ctx, Var(x), ctx[x])


def shift(d: TypDeriv) -> TypDeriv:
    """From #G |- M : #A conclude G |- M : A."""
    ctx = {}
    for k, v in d.ctx.items():
        if not isinstance(v, Later):
            raise ValueError(f"shift: {k} is not a later type")
        ctx[k] = v.body
    if not isinstance(d.type, Later):
        raise ValueError("shift: premise type is not a later type")
    return TypDeriv("Shift", ctx, d.term, d.type.body, (d,))


def top_i(ctx, M: Term) -> TypDeriv:
    return TypDeriv("TopI", ctx, M, TOP)


def subsume(d: TypDeriv, s: sb.SubDeriv) -> TypDeriv:
    return TypDeriv("Subsume", d.ctx, d.term, s.rhs, (d,), {"sub": s})


def subsume_to(d: TypDeriv, B: Type) -> TypDeriv:
    """Subsume by a Reflex step; B must be sim-equal to the current type."""
    if alpha_eq(d.type, B):
        return d
    return subsume(d, sb.reflex(frozenset(), d.type, B))


def arrow_i(d: TypDeriv, x: str) -> TypDeriv:
    if x not in d.ctx:
        raise ValueError(f"arrow_i: {x} is not in the premise context")
    ctx = dict(d.ctx)
    A = ctx.pop(x)
    return TypDeriv("ArrowI", ctx, Lam(x, d.term), Arrow(A, d.type), (d,))


def arrow_e(d1: TypDeriv, d2: TypDeriv) -> TypDeriv:
    if not isinstance(d1.type, Arrow):
        raise ValueError("arrow_e: function premise is not an arrow")
    return TypDeriv("ArrowE", ctx_union(d1.ctx, d2.ctx), App(d1.term, d2.term), d1.type.cod, (d1, d2))


# ---------------------------------------------------------------------------
# checker


def check_typderiv(d: TypDeriv) -> CheckResult:
    res = CheckResult()
    _check(d, (), res)
    return res


def _check(d: TypDeriv, path, res: CheckResult):
    rule = d.rule
    err = lambda msg: res.add(path, rule, msg)  # noqa: E731
    if rule not in RULES:
        err(f"unknown rule {rule!r}")
        return
    arity = {"Var": 0, "TopI": 0, "Shift": 1, "Subsume": 1, "ArrowI": 1, "ArrowE": 2}[rule]
    if len(d.premises) != arity:
        err(f"expected {arity} premises, got {len(d.premises)}")
        return
    for i, p in enumerate(d.premises):
        _check(p, path + (i,), res)
    M, A = d.term, d.type
    if rule == "Var":
        if not isinstance(M, Var):
            err("subject is not a variable")
        elif M.name not in d.ctx:
            err(f"{M.name} is not in the context")
        elif not alpha_eq(d.ctx[M.name], A):
            err(f"context gives {print_type(d.ctx[M.name])}, not {print_type(A)}")
    elif rule == "TopI":
        if not alpha_eq(A, TOP):
            err("type must be Top")
    elif rule == "Shift":
        p = d.premises[0]
        if not ctx_eq(p.ctx, ctx_later(d.ctx)):
            err("premise context is not the later of the conclusion context")
        if not alpha_eq(p.type, Later(A)):
            err("premise type is not the later of the conclusion type")
        if not term_alpha_eq(p.term, M):
            err("premise subject differs")
    elif rule == "Subsume":
        p = d.premises[0]
        s = d.side.get("sub")
        if not isinstance(s, sb.SubDeriv):
            err("missing subtyping certificate")
            return
        if s.gamma:
            err("subtyping certificate must have an empty assumption")
        if not (alpha_eq(s.lhs, p.type) and alpha_eq(s.rhs, A)):
            err("subtyping certificate does not relate the premise and conclusion types")
        sres = sb.check_subderiv(s)
        for spath, srule, smsg in sres.errors:
            res.add(path + ("sub",) + spath, srule, smsg)
        if not ctx_eq(p.ctx, d.ctx):
            err("premise context differs")
        if not term_alpha_eq(p.term, M):
            err("premise subject differs")
    elif rule == "ArrowI":
        p = d.premises[0]
        if not isinstance(M, Lam):
            err("subject is not an abstraction")
            return
        if not isinstance(A, Arrow):
            err("type is not an arrow")
            return
        x = M.binder
        if x in d.ctx:
            err(f"bound variable {x} is already in the context")
        want = dict(d.ctx)
        want[x] = A.dom
        if not ctx_eq(p.ctx, want):
            err("premise context is not the conclusion context plus the bound variable")
        if not term_alpha_eq(p.term, M.body):
            err("premise subject is not the abstraction body")
        if not alpha_eq(p.type, A.cod):
            err("premise type is not the arrow codomain")
    elif rule == "ArrowE":
        p1, p2 = d.premises
        if not isinstance(M, App):
            err("subject is not an application")
            return
        try:
            u = ctx_union(p1.ctx, p2.ctx)
        except ContextClash as e:
            err(str(e))
            return
        if not ctx_eq(u, d.ctx):
            err("context is not the union of the premise contexts")
        if not (term_alpha_eq(p1.term, M.fun) and term_alpha_eq(p2.term, M.arg)):
            err("subject does not match the premises")
        if not alpha_eq(p1.type, Arrow(p2.type, A)):
            err("function type does not match")


# ---------------------------------------------------------------------------
# structural transformations


def _all_names(d: TypDeriv) -> set:
    out = set()
    for n in d.nodes():
        out |= set(n.ctx)
        out |= _term_names(n.term)
    return out


def _term_names(M: Term) -> set:
    out = set()
    stack = [M]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            out.add(t.name)
        elif isinstance(t, Lam):
            out.add(t.binder)
            stack.append(t.body)
        else:
            stack.append(t.fun)
            stack.append(t.arg)
    return out


def rename_var(d: TypDeriv, x: str, y: str) -> TypDeriv:
    """Rename the free term variable x to y throughout d.  y must not be
    in the conclusion context nor free in the subject."""
    if x == y:
        return d
    if y in d.ctx or y in d.term.fv:
        raise ValueError(f"cannot rename {x} to {y}: {y} is in use")
    return _rename_var(d, x, y)


def _rename_ctx(ctx, x, y):
    return {(y if k == x else k): v for k, v in ctx.items()}


def _rename_var(d: TypDeriv, x: str, y: str) -> TypDeriv:
    if x not in d.ctx and x not in d.term.fv:
        return d
    r = d.rule
    ctx = _rename_ctx(d.ctx, x, y)
    term = rename_free(d.term, {x: y})
    if r == "Var":
        return TypDeriv("Var", ctx, term, d.type)
    if r == "TopI":
        return TypDeriv("TopI", ctx, term, d.type)
    if r == "Shift":
        return shift(_rename_var(d.premises[0], x, y))
    if r == "Subsume":
        return subsume(_rename_var(d.premises[0], x, y), d.side["sub"])
    if r == "ArrowE":
        return arrow_e(_rename_var(d.premises[0], x, y), _rename_var(d.premises[1], x, y))
    # ArrowI: x is not the binder here because x is free or in the context
    z = d.term.binder
    p = d.premises[0]
    if z == y:
        z2 = fresh_name(z, _all_names(d) | {x, y})
        p = _rename_var(p, z, z2)
        z = z2
    return arrow_i(_rename_var(p, x, y), z)


def weaken(d: TypDeriv, extra: Mapping[str, Type]) -> TypDeriv:
    """Add the bindings of ``extra`` to the context of every judgment
    that needs them, renaming bound variables out of the way."""
    extra = {k: v for k, v in extra.items() if k not in d.ctx or not alpha_eq(d.ctx[k], v)}
    if not extra:
        return d
    ctx_union(d.ctx, extra)  # raises on clash
    return _weaken(d, extra)


def _weaken(d: TypDeriv, extra: Ctx) -> TypDeriv:
    r = d.rule
    ctx = ctx_union(d.ctx, extra)
    if r == "Var":
        return TypDeriv("Var", ctx, d.term, d.type)
    if r == "TopI":
        return TypDeriv("TopI", ctx, d.term, d.type)
    if r == "Shift":
        return shift(_weaken(d.premises[0], ctx_later(extra)))
    if r == "Subsume":
        return subsume(_weaken(d.premises[0], extra), d.side["sub"])
    if r == "ArrowE":
        p1, p2 = d.premises
        return arrow_e(_weaken_to(p1, ctx), _weaken_to(p2, ctx))
    x = d.term.binder
    p = d.premises[0]
    if x in extra:
        x2 = fresh_name(x, _all_names(d) | set(extra))
        p = rename_var(p, x, x2)
        x = x2
    return arrow_i(_weaken(p, extra), x)


def _weaken_to(d: TypDeriv, ctx: Ctx) -> TypDeriv:
    extra = {k: v for k, v in ctx.items() if k not in d.ctx}
    return _weaken(d, extra) if extra else d


def weaken_to(d: TypDeriv, ctx: Mapping[str, Type]) -> TypDeriv:
    ctx_union(d.ctx, ctx)
    return _weaken_to(d, dict(ctx))


# ---------------------------------------------------------------------------
# necessitation and substitution


def elab_nec(d: TypDeriv, g2: Optional[Mapping[str, Type]] = None) -> TypDeriv:
    """From G1 |- M : A build #G1 u G2 |- M : #A."""
    g2 = dict(g2 or {})
    ctx_union(ctx_later(d.ctx), g2)  # raises on clash
    return _nec(d, g2)


def _nec(d: TypDeriv, g2: Ctx) -> TypDeriv:
    r = d.rule
    ctx = ctx_union(ctx_later(d.ctx), g2)
    if r == "Var":
        return TypDeriv("Var", ctx, d.term, Later(d.type))
    if r == "Shift":
        # premise #G1 |- M : #A; necessitate with #G2 and shift back
        return shift(_nec(d.premises[0], ctx_later(g2)))
    if r == "TopI":
        return subsume(top_i(ctx, d.term), sb.reflex(frozenset(), TOP, Later(TOP)))
    if r == "Subsume":
        return subsume(_nec(d.premises[0], g2), sb.later_mono(d.side["sub"]))
    if r == "ArrowI":
        x = d.term.binder
        p = d.premises[0]
        if x in g2:
            x2 = fresh_name(x, _all_names(d) | set(g2))
            p = rename_var(p, x, x2)
            x = x2
        inner = arrow_i(_nec(p, g2), x)  # #B -> #C
        return subsume_to(inner, Later(d.type))
    p1, p2 = d.premises
    f = _nec(p1, g2)  # #(B -> A)
    B = p1.type.dom
    f = subsume_to(f, Arrow(Later(B), Later(d.type)))
    a = _nec(p2, g2)
    return arrow_e(f, a)


def elab_subst(d1: TypDeriv, x: str, d2: TypDeriv) -> TypDeriv:
    """From G1 u {x:A} |- M : B and G2 |- N : A build G1 u G2 |- M[N/x] : B."""
    if x not in d1.ctx:
        raise ValueError(f"{x} is not in the context of the first derivation")
    if not alpha_eq(d1.ctx[x], d2.type):
        raise ValueError(f"{x} has type {print_type(d1.ctx[x])} but the argument has {print_type(d2.type)}")
    g1 = {k: v for k, v in d1.ctx.items() if k != x}
    ctx_union(g1, d2.ctx)
    return _subst(d1, x, d2)


def _subst(d: TypDeriv, x: str, d2: TypDeriv) -> TypDeriv:
    r = d.rule
    g1 = {k: v for k, v in d.ctx.items() if k != x}
    ctx = ctx_union(g1, d2.ctx)
    N = d2.term
    if r == "Var":
        if d.term.name == x:
            return weaken_to(d2, ctx)
        return TypDeriv("Var", ctx, d.term, d.type)
    if r == "TopI":
        return top_i(ctx, subst_term(d.term, x, N))
    if r == "Shift":
        return shift(_subst(d.premises[0], x, elab_nec(d2)))
    if r == "Subsume":
        return subsume(_subst(d.premises[0], x, d2), d.side["sub"])
    if r == "ArrowE":
        full = d.ctx
        p1, p2 = (_weaken_to(p, full) for p in d.premises)
        return arrow_e(_subst(p1, x, d2), _subst(p2, x, d2))
    y = d.term.binder
    p = d.premises[0]
    if y in N.fv or y in d2.ctx:
        y2 = fresh_name(y, _all_names(d) | _all_names(d2))
        p = rename_var(p, y, y2)
        y = y2
    return arrow_i(_subst(p, x, d2), y)


def retype_var(d: TypDeriv, x: str, s: sb.SubDeriv) -> TypDeriv:
    """From G u {x:A} |- M : B and A' <= A build G u {x:A'} |- M : B."""
    if not alpha_eq(s.rhs, d.ctx[x]):
        raise ValueError("subtyping certificate does not end in the context type")
    y = fresh_name(x + "_", _all_names(d))
    dy = subsume(TypDeriv("Var", {y: s.lhs}, Var(y), s.lhs), s)
    out = elab_subst(d, x, dy)
    return rename_var(out, y, x)


# ---------------------------------------------------------------------------
# inversion lemmas


def _arrow_parts(A: Type) -> Tuple[Type, Type]:
    c = canon(A, EqMode.SIM)
    if not isinstance(c, ArrC):
        raise ValueError(f"{print_type(A)} has no arrow canonical form")
    return c.dom.expand(), c.cod.expand()


def _lift(d: sb.SubDeriv, n: int) -> sb.SubDeriv:
    for _ in range(n):
        d = sb.later_mono(d)
    return d


def impl_inversion(s: sb.SubDeriv) -> Tuple[int, sb.SubDeriv, sb.SubDeriv]:
    """For s : g |- A <= B with B not Top-like and A's sim-canonical form
    C -> D, return (k, dE, dF) where B's sim-canonical form is E -> F,
    dE : g |- E <= #^k C and dF : g |- #^k D <= F."""
    C, D = _arrow_parts(s.lhs)
    E, F = _arrow_parts(s.rhs)
    k, dE, dF = _inv(s)
    g = s.gamma
    dE = sb.glue(sb.weaken(dE, g), E, later_n(C, k))
    dF = sb.glue(sb.weaken(dF, g), later_n(D, k), F)
    return k, dE, dF


def _inv(s: sb.SubDeriv):
    g = s.gamma
    r = s.rule
    C, D = _arrow_parts(s.lhs)
    E, F = _arrow_parts(s.rhs)
    if r == "Reflex":
        return 0, sb.reflex(g, E, C), sb.reflex(g, D, F)
    if r == "Approx":
        return 1, sb.reflex(g, E, Later(C)), sb.reflex(g, Later(D), F)
    if r == "ArrowMono":
        p1, p2 = s.premises
        return 0, sb.glue(sb.weaken(p1, g), E, C), sb.glue(sb.weaken(p2, g), D, F)
    if r == "LaterMono":
        k, dE, dF = impl_inversion(s.premises[0])
        return k, sb.later_mono(dE), sb.later_mono(dF)
    if r == "Trans":
        s1, s2 = s.premises
        s1 = sb.weaken(s1, g)
        s2 = sb.weaken(s2, g)
        k1, dG, dH = impl_inversion(s1)  # G <= #^k1 C, #^k1 D <= H
        k2, dE2, dF2 = impl_inversion(s2)  # E <= #^k2 G, #^k2 H <= F
        dE = sb.trans(dE2, _lift(dG, k2))
        dF = sb.trans(_lift(dH, k2), dF2)
        return k1 + k2, dE, dF
    if r == "MuAmber":
        X, Y = sb._amber_binders(s)
        k, dE, dF = impl_inversion(s.premises[0])
        return k, sb.substitute(dE, (X, Y), s), sb.substitute(dF, (X, Y), s)
    raise ValueError(f"rule {r} cannot relate an arrow to a non-Top type")


def anti_abstraction(d: TypDeriv):
    """For d : G |- \\x.L : A with A not Top-like, return (n, dL, s) with
    dL : #^n G u {x:B} |- L : C and s : |- B -> C <= #^n A."""
    r = d.rule
    if r == "ArrowI":
        p = d.premises[0]
        return 0, p, sb.reflex(frozenset(), d.type, d.type)
    if r == "Shift":
        n, dL, s = anti_abstraction(d.premises[0])
        return n + 1, dL, s
    if r == "Subsume":
        n, dL, s = anti_abstraction(d.premises[0])
        return n, dL, sb.trans(s, _lift(d.side["sub"], n))
    raise ValueError(f"anti-abstraction reached rule {r}")


# ---------------------------------------------------------------------------
# subject reduction


def subject_reduce(d: TypDeriv, path: Sequence[int]) -> TypDeriv:
    """Typing derivation for the term obtained by contracting the redex at
    ``path`` in the subject of d."""
    path = tuple(path)
    target = subterm_at(d.term, path)
    if not is_redex(target):
        raise ValueError(f"path {list(path)} does not address a redex")
    return _sr(d, path)


def _top_like(ctx, M: Term, A: Type) -> TypDeriv:
    return subsume_to(top_i(ctx, M), A)


def _sr(d: TypDeriv, path) -> TypDeriv:
    if is_top_variant(d.type):
        L = replace_at(d.term, path, contract(subterm_at(d.term, path)))
        return _top_like(d.ctx, L, d.type)
    r = d.rule
    if r == "TopI":
        L = replace_at(d.term, path, contract(subterm_at(d.term, path)))
        return top_i(d.ctx, L)
    if r == "Shift":
        return shift(_sr(d.premises[0], path))
    if r == "Subsume":
        return subsume(_sr(d.premises[0], path), d.side["sub"])
    if r == "ArrowI":
        return arrow_i(_sr(d.premises[0], path[1:]), d.term.binder)
    if r == "ArrowE":
        p1, p2 = d.premises
        if path:
            if path[0] == 0:
                return arrow_e(_sr(p1, path[1:]), p2)
            return arrow_e(p1, _sr(p2, path[1:]))
        return _beta(d)
    raise ValueError(f"no redex under rule {r}")


def _beta(d: TypDeriv) -> TypDeriv:
    d1, d2 = d.premises
    A = d.type
    x = d1.term.binder
    n, dL, s = anti_abstraction(d1)  # dL : #^n G1 u {x:B} |- L : C
    k, dE, dF = impl_inversion(s)  # #^n D <= #^k B, #^k C <= #^n A
    # necessitate the body k times
    for _ in range(k):
        dL = elab_nec(dL)
    # bring the context back from #^(n+k) G1 to #^n G1
    if k:
        for z, T in d1.ctx.items():
            base = later_n(T, n)
            dL = retype_var(dL, z, sb.approx_chain(frozenset(), base, k))
    # the argument at #^k B
    arg = d2
    for _ in range(n):
        arg = elab_nec(arg)
    arg = subsume(arg, sb.glue(dE, arg.type, dE.rhs))
    if not alpha_eq(dL.ctx[x], arg.type):
        arg = subsume_to(arg, dL.ctx[x])
    out = elab_subst(dL, x, arg)
    out = subsume(out, sb.glue(dF, out.type, later_n(A, n)))
    for _ in range(n):
        out = shift(out)
    return out


# ---------------------------------------------------------------------------
# the fixed-point combinator


def y_combinator_derivation(T=None) -> TypDeriv:
    """|- \\f.(\\x.f (x x)) (\\x.f (x x)) : (#T -> T) -> T, with T = X by default."""
    X = parse_type("X") if T is None else T
    y = fresh_name("Y", X.ftv)
    A = Mu(y, Arrow(Later(TVar(y)), X))
    fX = Arrow(Later(X), X)
    e = frozenset()
    cx = {"x": Later(A)}
    x1 = subsume(var(cx, "x"), sb.reflex(e, Later(A), Arrow(Later(Later(A)), Later(X))))
    x2 = subsume(var(cx, "x"), sb.approx(e, Later(A)))
    xx = arrow_e(x1, x2)
    fxx = arrow_e(var({"f": fX}, "f"), xx)
    pi = arrow_i(fxx, "x")  # f : #X -> X |- \x.f (x x) : #A -> X
    pi2 = subsume(pi, sb.trans(sb.reflex(e, pi.type, A), sb.approx(e, A)))
    body = arrow_e(pi, pi2)
    return arrow_i(body, "f")
