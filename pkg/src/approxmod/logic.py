"""Proof systems reading types as modal formulas.

Five systems share one proof format:

* ``miK4``   assump, nec, 4, ->I, ->E
* ``miGL``   miK4 plus W (Loeb's rule)
* ``miGLC``  miGL plus approx
* ``LA``     miGLC plus L
* ``LAmu``   miK4 plus fold, unfold, L and approx (recursive formulas)

Rule 4 is redundant once approx is present and is rejected there.  The
first four systems only admit mu-free formulas.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple, Union

from . import kripke as kp
from . import subtyping as sb
from . import typing as ty
from .common import CheckResult, Fuel, OutOfFuel, Unknown
from .measures import is_top_variant, tail
from .syntax import (
    Arrow,
    Later,
    Mu,
    TVar,
    Type,
    Var,
    alpha_eq,
    alpha_key,
    as_type,
    fresh_name,
    later_n,
    parse_type,
    print_type,
    subst_type,
    unfold,
)


class System(str, enum.Enum):
    MIK4 = "miK4"
    MIGL = "miGL"
    MIGLC = "miGLC"
    LA = "LA"
    LAMU = "LAmu"


def as_system(s) -> System:
    if isinstance(s, System):
        return s
    key = str(s).lower().replace("μ", "mu")
    for m in System:
        if m.value.lower() == key:
            return m
    raise ValueError(f"unknown system {s!r}")


RULES = ("Assump", "Nec", "Four", "ArrowI", "ArrowE", "Fold", "Unfold", "LRule", "Approx", "W")

ALLOWED = {
    System.MIK4: {"Assump", "Nec", "Four", "ArrowI", "ArrowE"},
    System.MIGL: {"Assump", "Nec", "Four", "ArrowI", "ArrowE", "W"},
    System.MIGLC: {"Assump", "Nec", "ArrowI", "ArrowE", "W", "Approx"},
    System.LA: {"Assump", "Nec", "ArrowI", "ArrowE", "W", "Approx", "LRule"},
    System.LAMU: {"Assump", "Nec", "ArrowI", "ArrowE", "Fold", "Unfold", "LRule", "Approx"},
}

FRAME_CLASS = {
    System.MIK4: kp.FrameClass.IK4,
    System.MIGL: kp.FrameClass.IGL,
    System.MIGLC: kp.FrameClass.IGLC,
    System.LA: kp.FrameClass.LA,
    System.LAMU: kp.FrameClass.LA,
}


def has_mu(A: Type) -> bool:
    if isinstance(A, Mu):
        return True
    if isinstance(A, Later):
        return has_mu(A.body)
    if isinstance(A, Arrow):
        return has_mu(A.dom) or has_mu(A.cod)
    return False


# ---------------------------------------------------------------------------
# contexts are sets of formulas up to renaming of bound variables


def fset(types: Iterable[Type]) -> Tuple[Type, ...]:
    seen = {}
    for t in types:
        seen.setdefault(alpha_key(t), t)
    return tuple(sorted(seen.values(), key=print_type))


def keys(ctx: Iterable[Type]) -> frozenset:
    return frozenset(alpha_key(t) for t in ctx)


def _minus(ctx, A: Type):
    k = alpha_key(A)
    return fset(t for t in ctx if alpha_key(t) != k)


class Proof:
    __slots__ = ("system", "rule", "ctx", "goal", "premises")

    def __init__(self, system, rule: str, ctx: Iterable[Type], goal: Type, premises=()):
        self.system = as_system(system)
        self.rule = rule
        self.ctx = fset(ctx)
        self.goal = goal
        self.premises = tuple(premises)

    def height(self) -> int:
        return 1 + max((p.height() for p in self.premises), default=0)

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def nodes(self):
        yield self
        for p in self.premises:
            yield from p.nodes()

    def __repr__(self):
        ctx = ", ".join(print_type(t) for t in self.ctx)
        return f"Proof({self.system.value} {self.rule}: {{{ctx}}} |- {print_type(self.goal)})"

    def to_json(self, root: bool = True) -> dict:
        out = {}
        if root:
            out["system"] = self.system.value
        out.update({
            "rule": self.rule,
            "conclusion": {"ctx": [print_type(t) for t in self.ctx], "formula": print_type(self.goal)},
            "premises": [p.to_json(False) for p in self.premises],
        })
        return out

    @staticmethod
    def from_json(obj: dict, system=None) -> "Proof":
        system = obj.get("system", system)
        if system is None:
            raise ValueError("proof has no system")
        c = obj["conclusion"]
        return Proof(
            system, obj["rule"], [parse_type(t) for t in c.get("ctx", [])], parse_type(c["formula"]),
            [Proof.from_json(p, system) for p in obj.get("premises", [])],
        )


# ---------------------------------------------------------------------------
# checker


def check_proof(p: Proof) -> CheckResult:
    res = CheckResult()
    _check(p, p.system, (), res)
    return res


def _check(p: Proof, system: System, path, res: CheckResult):
    err = lambda msg: res.add(path, p.rule, msg)  # noqa: E731
    if p.system is not system:
        err(f"node belongs to {p.system.value}, proof is in {system.value}")
    if p.rule not in RULES:
        err(f"unknown rule {p.rule!r}")
        return
    if p.rule not in ALLOWED[system]:
        err(f"rule {p.rule} is not part of {system.value}")
    if system is not System.LAMU:
        for t in p.ctx + (p.goal,):
            if has_mu(t):
                err(f"{system.value} only admits mu-free formulas")
                break
    arity = {"Assump": 0, "ArrowE": 2}.get(p.rule, 1)
    if len(p.premises) != arity:
        err(f"expected {arity} premises, got {len(p.premises)}")
        return
    for i, q in enumerate(p.premises):
        _check(q, system, path + (i,), res)
    G = p.goal
    ctx = keys(p.ctx)
    if p.rule == "Assump":
        if alpha_key(G) not in ctx:
            err("formula is not among the assumptions")
        return
    q = p.premises[0]
    qctx = keys(q.ctx)
    if p.rule == "Nec":
        if not isinstance(G, Later) or not alpha_eq(q.goal, G.body):
            err("conclusion is not the later of the premise")
        if not keys(Later(t) for t in q.ctx) <= ctx:
            err("premise assumptions are not available under later")
    elif p.rule == "ArrowI":
        if not isinstance(G, Arrow):
            err("conclusion is not an implication")
            return
        if not (alpha_eq(q.goal, G.cod) and qctx == ctx | {alpha_key(G.dom)}):
            err("premise is not the conclusion with the antecedent discharged")
    elif p.rule == "ArrowE":
        q2 = p.premises[1]
        if not alpha_eq(q.goal, Arrow(q2.goal, G)):
            err("major premise does not match")
        if qctx | keys(q2.ctx) != ctx:
            err("context is not the union of the premise contexts")
    else:
        if qctx != ctx:
            err("premise context differs")
        if p.rule == "Four":
            if not alpha_eq(G, Later(q.goal)) or not isinstance(q.goal, Later):
                err("conclusion is not ##A for a premise #A")
        elif p.rule == "Approx":
            if not alpha_eq(G, Later(q.goal)):
                err("conclusion is not the later of the premise")
        elif p.rule == "W":
            ok = isinstance(G, Later) and alpha_eq(q.goal, Later(Arrow(G, G.body)))
            if not ok:
                err("premise is not #(#A -> A) for conclusion #A")
        elif p.rule == "LRule":
            ok = (
                isinstance(G, Later) and isinstance(G.body, Arrow)
                and alpha_eq(q.goal, Arrow(Later(G.body.dom), Later(G.body.cod)))
            )
            if not ok:
                err("premise is not #A -> #B for conclusion #(A -> B)")
        elif p.rule == "Fold":
            if not isinstance(G, Mu) or not alpha_eq(q.goal, unfold(G)):
                err("premise is not the unfolding of the conclusion")
        elif p.rule == "Unfold":
            if not isinstance(q.goal, Mu) or not alpha_eq(G, unfold(q.goal)):
                err("conclusion is not the unfolding of the premise")


# ---------------------------------------------------------------------------
# constructors and admissible rules


def assump(system, ctx, A: Type) -> Proof:
    return Proof(system, "Assump", fset(list(ctx) + [A]), A)


def nec(p: Proof, extra=()) -> Proof:
    return Proof(p.system, "Nec", [Later(t) for t in p.ctx] + list(extra), Later(p.goal), (p,))


def arrow_i(p: Proof, A: Type) -> Proof:
    p = weaken(p, [A])
    return Proof(p.system, "ArrowI", _minus(p.ctx, A), Arrow(A, p.goal), (p,))


def arrow_e(p1: Proof, p2: Proof) -> Proof:
    if not isinstance(p1.goal, Arrow):
        raise ValueError("arrow_e: major premise is not an implication")
    return Proof(p1.system, "ArrowE", p1.ctx + p2.ctx, p1.goal.cod, (p1, p2))


def _unary(rule, p: Proof, goal: Type) -> Proof:
    return Proof(p.system, rule, p.ctx, goal, (p,))


def approx(p: Proof) -> Proof:
    return _unary("Approx", p, Later(p.goal))


def four(p: Proof) -> Proof:
    return _unary("Four", p, Later(p.goal))


def fold(p: Proof, target: Mu) -> Proof:
    return _unary("Fold", p, target)


def unfold_p(p: Proof) -> Proof:
    return _unary("Unfold", p, unfold(p.goal))


def l_rule(p: Proof) -> Proof:
    g = p.goal
    return _unary("LRule", p, Later(Arrow(g.dom.body, g.cod.body)))


def w_rule(p: Proof) -> Proof:
    # premise #(#A -> A)
    return _unary("W", p, p.goal.body.dom)


def later_twice(p: Proof) -> Proof:
    """From G |- #A build G |- ##A with whichever rule the system has."""
    if "Approx" in ALLOWED[p.system]:
        return approx(p)
    return four(p)


def weaken(p: Proof, extra: Iterable[Type]) -> Proof:
    extra = [t for t in extra if alpha_key(t) not in keys(p.ctx)]
    if not extra:
        return p
    return _weaken(p, extra)


def _weaken(p: Proof, extra) -> Proof:
    ctx = p.ctx + tuple(extra)
    if p.rule in ("Assump", "Nec"):
        return Proof(p.system, p.rule, ctx, p.goal, p.premises)
    return Proof(p.system, p.rule, ctx, p.goal, [_weaken(q, extra) for q in p.premises])


def weaken_to(p: Proof, ctx: Iterable[Type]) -> Proof:
    return weaken(p, ctx)


def cut(p: Proof, A: Type, q: Proof) -> Proof:
    """From p : D u {A} |- G and q : G' |- A build D u G' |- G."""
    if alpha_key(A) not in keys(p.ctx):
        return p
    return arrow_e(arrow_i(p, A), q)


def subst_proof(p: Proof, X: str, C: Type) -> Proof:
    """Instantiate the formula variable X by C throughout the proof."""
    m = {X: C}
    return Proof(
        p.system, p.rule, [subst_type(t, m) for t in p.ctx], subst_type(p.goal, m),
        [subst_proof(q, X, C) for q in p.premises],
    )


def k_rule(p: Proof) -> Proof:
    """From G |- #(A -> B) build G |- #A -> #B."""
    s = p.system
    g = p.goal
    A, B = g.body.dom, g.body.cod
    inner = arrow_e(assump(s, [], Arrow(A, B)), assump(s, [], A))  # {A->B, A} |- B
    n = nec(inner)  # {#(A->B), #A} |- #B
    k = arrow_i(n, Later(A))  # {#(A->B)} |- #A -> #B
    return cut(k, g, p)


def later_map(p: Proof, q: Proof, n: int) -> Proof:
    """From p : G |- #^n A and q : {A} |- A' build G |- #^n A'."""
    for _ in range(n):
        q = nec(q)
    A = p.goal
    return cut(q, A, p)


def embed(p: Proof, system) -> Proof:
    """Replay a proof in a larger system, replacing Four by Approx and W by
    the derived Loeb rule when the target lacks them."""
    system = as_system(system)
    prem = [embed(q, system) for q in p.premises]
    rule = p.rule
    if rule == "Four" and "Four" not in ALLOWED[system]:
        return approx(prem[0])
    if rule == "W" and "W" not in ALLOWED[system]:
        q = prem[0]
        A = q.goal.body.cod
        return cut_apply(weaken(theorem_loeb(system, A), q.ctx), q)
    return Proof(system, rule, p.ctx, p.goal, prem)


def cut_apply(f: Proof, a: Proof) -> Proof:
    return arrow_e(f, a)


# ---------------------------------------------------------------------------
# canned theorems


def theorem_y(system, A: Type) -> Proof:
    """|- (#A -> A) -> A."""
    system = as_system(system)
    A = as_type(A)
    h = Arrow(Later(A), A)
    if system is System.LAMU:
        X = fresh_name("Z", A.ftv)
        B = Mu(X, Arrow(Later(TVar(X)), A))
        s = system
        b_unf = unfold_p(assump(s, [], B))  # {B} |- #B -> A
        kk = k_rule(nec(b_unf))  # {#B} |- ##B -> #A
        a2 = approx(assump(s, [], Later(B)))  # {#B} |- ##B
        la = arrow_e(kk, a2)  # {#B} |- #A
        body = arrow_e(assump(s, [], h), la)  # {#A->A, #B} |- A
        pi = arrow_i(body, Later(B))  # {#A->A} |- #B -> A
        main = arrow_e(pi, approx(fold(pi, B)))
        return arrow_i(main, h)
    if system in (System.MIGLC, System.LA):
        s = system
        hyp = assump(s, [], h)
        la = w_rule(approx(hyp))
        return arrow_i(arrow_e(hyp, la), h)
    raise ValueError(f"(#A -> A) -> A is not a theorem of {system.value}")


def theorem_loeb(system, A: Type) -> Proof:
    """|- #(#A -> A) -> #A."""
    system = as_system(system)
    A = as_type(A)
    h = Later(Arrow(Later(A), A))
    if "W" in ALLOWED[system]:
        return arrow_i(w_rule(assump(system, [], h)), h)
    if system is System.LAMU:
        return k_rule(nec(theorem_y(system, A)))
    raise ValueError(f"Loeb's principle is not a theorem of {system.value}")


def theorem_k(system, A: Type, B: Type) -> Proof:
    """|- #(A -> B) -> #A -> #B."""
    h = Later(Arrow(as_type(A), as_type(B)))
    return arrow_i(k_rule(assump(system, [], h)), h)


def y_rule(p: Proof) -> Proof:
    """From G |- #A -> A build G |- A."""
    A = p.goal.cod
    return arrow_e(weaken(theorem_y(p.system, A), p.ctx), p)


def _tail_spine(A: Type):
    """Split a tail into ([("later",) | ("mu", X)], variable)."""
    out = []
    while not isinstance(A, TVar):
        if isinstance(A, Later):
            out.append(("later",))
            A = A.body
        elif isinstance(A, Mu):
            out.append(("mu", A.binder))
            A = A.body
        else:
            raise ValueError("not a tail")
    return out, A.name


def _rebuild_spine(spine, var: str) -> Type:
    t: Type = TVar(var)
    for op in reversed(spine):
        t = Later(t) if op[0] == "later" else Mu(op[1], t, check=False)
    return t


def theorem_tail_entails(A: Type) -> Proof:
    """{tail A} |- A in LAmu."""
    return _tail_entails(as_type(A))


def _tail_entails(A: Type) -> Proof:
    s = System.LAMU
    tA = tail(A)
    if isinstance(A, TVar):
        return assump(s, [], A)
    if isinstance(A, Later):
        return nec(_tail_entails(A.body))
    if isinstance(A, Arrow):
        return arrow_i(weaken(_tail_entails(A.cod), [A.dom]), A.dom)
    X, B = A.binder, A.body
    tB = tail(B)
    ih = _tail_entails(B)  # {tB} |- B
    if X not in tB.ftv:
        base = unfold_p(assump(s, [], tA))  # {tA} |- tB
        pb = cut(ih, tB, base)  # {tA} |- B
        pb = subst_proof(pb, X, A)  # X is not free in tA
        return fold(pb, A)
    # X occurs in the tail of B, so A is a Top-variant
    spine, v = _tail_spine(tB)
    k = sum(1 for op in spine if op[0] == "later")
    inner = assump(s, [], TVar(v))
    p = inner
    for op in reversed(spine):
        p = nec(p) if op[0] == "later" else fold(p, Mu(op[1], p.goal, check=False))
    # p : {#^k X} |- tB
    bx = assump(s, [], Later(TVar(X)))
    for _ in range(k - 1):
        bx = approx(bx)
    p = cut(p, later_n(TVar(X), k), bx)  # {#X} |- tB
    p = cut(ih, tB, p)  # {#X} |- B
    p = subst_proof(p, X, A)  # {#A} |- B[A/X]
    p = fold(p, A)
    p = y_rule(arrow_i(p, Later(A)))
    return weaken(p, [tA])


def theorem_top_variant(A: Type) -> Proof:
    """|- A for a Top-variant A, in LAmu."""
    A = as_type(A)
    if not is_top_variant(A):
        raise ValueError(f"{print_type(A)} is not a Top-variant")
    s = System.LAMU
    tA = tail(A)
    spine, v = _tail_spine(tA)
    # index of the binder of v (innermost binder with that name)
    i = max(j for j, op in enumerate(spine) if op == ("mu", v))
    after = spine[i + 1:]
    last = max(j for j, op in enumerate(after) if op[0] == "later")
    inner_ops, c_ops = after[: last + 1], after[last + 1:]
    p = assump(s, [], TVar(v))
    for op in reversed(c_ops):
        p = fold(p, Mu(op[1], p.goal, check=False))  # {v} |- C, the rebuilt c_ops
    p = nec(p)  # {#v} |- #C
    for op in reversed(inner_ops[:-1]):
        p = approx(p) if op[0] == "later" else fold(p, Mu(op[1], p.goal, check=False))
    D = p.goal
    M = Mu(v, D, check=False)
    p = subst_proof(p, v, M)  # {#M} |- D[M/v]
    p = fold(p, M)
    p = y_rule(arrow_i(p, Later(M)))  # |- M
    for op in reversed(spine[:i]):
        p = nec(p) if op[0] == "later" else fold(p, Mu(op[1], p.goal, check=False))
    # p : |- tail A
    return cut(_tail_entails(A), tA, p)


def theorem(name: str, *args, system=System.LAMU) -> Proof:
    name = name.lower().replace("-", "_")
    args = [as_type(a) for a in args]
    if name == "y":
        return theorem_y(system, *args)
    if name == "loeb":
        return theorem_loeb(system, *args)
    if name == "k":
        return theorem_k(system, *args)
    if name == "tail_entails":
        return theorem_tail_entails(*args)
    if name == "top_variant":
        return theorem_top_variant(*args)
    raise ValueError(f"unknown theorem {name!r}")


# ---------------------------------------------------------------------------
# bounded prover


class _Search:
    """Goal-directed search.  Hypotheses are saturated forward (modus
    ponens, K, unfolding) and the goal is attacked backward."""

    def __init__(self, system: System, fuel: int, max_sat: int = 120):
        self.s = system
        self.fuel = Fuel(fuel)
        self.max_sat = max_sat
        self.failed: Dict[tuple, int] = {}
        self.active = set()
        self.sat_memo: Dict[frozenset, dict] = {}
        self.has_approx = "Approx" in ALLOWED[system]
        self.has_w = system is not System.MIK4
        self.has_l = "LRule" in ALLOWED[system]
        self.mu = system is System.LAMU

    # forward saturation: key -> (formula, proof or None for a base hypothesis)
    def saturate(self, base: Tuple[Type, ...]) -> dict:
        bk = keys(base)
        if bk in self.sat_memo:
            return self.sat_memo[bk]
        out = {alpha_key(t): (t, None) for t in base}
        s = self.s
        queue = list(base)
        while queue and len(out) < self.max_sat:
            self.fuel.tick()
            F = queue.pop(0)
            new = []
            pf = lambda: self._use(out, F)  # noqa: E731
            n, core = _strip(F)
            if isinstance(core, Mu) and self.mu and not is_top_variant(core):
                q = unfold_p(assump(s, [], core))
                new.append(later_map(pf(), q, n))
            if n >= 1 and isinstance(core, Arrow):
                q = k_rule(assump(s, [], Later(core)))  # {#(C->D)} |- #C -> #D
                new.append(later_map(pf(), q, n - 1))
            if isinstance(F, Arrow) and alpha_key(F.dom) in out:
                new.append(arrow_e(pf(), self._use(out, F.dom)))
            for p in new:
                k = alpha_key(p.goal)
                if k not in out:
                    out[k] = (p.goal, p)
                    queue.append(p.goal)
            # an implication may fire later once its antecedent shows up
            for k2, (G, _) in list(out.items()):
                if isinstance(G, Arrow) and alpha_key(G.dom) in out and alpha_key(G.cod) not in out:
                    p = arrow_e(self._use(out, G), self._use(out, G.dom))
                    out[alpha_key(p.goal)] = (p.goal, p)
                    queue.append(p.goal)
        self.sat_memo[bk] = out
        return out

    def _use(self, sat, F: Type) -> Proof:
        t, p = sat[alpha_key(F)]
        return p if p is not None else assump(self.s, [], t)

    def prove(self, base: Tuple[Type, ...], goal: Type, depth: int) -> Optional[Proof]:
        base = fset(base)
        key = (keys(base), alpha_key(goal))
        if self.failed.get(key, -1) >= depth or key in self.active:
            return None
        self.active.add(key)
        try:
            r = self._prove(base, goal, depth)
        finally:
            self.active.discard(key)
        if r is None:
            self.failed[key] = max(self.failed.get(key, -1), depth)
        return r

    def _prove(self, base, goal, depth) -> Optional[Proof]:
        self.fuel.tick()
        sat = self.saturate(base)
        gk = alpha_key(goal)
        if gk in sat:
            return self._use(sat, goal)
        if self.mu and is_top_variant(goal):
            return theorem_top_variant(goal)
        if depth <= 0:
            return None
        d = depth - 1
        if isinstance(goal, Arrow):
            p = self.prove(base + (goal.dom,), goal.cod, d)
            return arrow_i(p, goal.dom) if p else None
        if isinstance(goal, Later):
            p = self._nec(base, sat, goal, d)
            if p:
                return p
            if self.has_l and isinstance(goal.body, Arrow):
                a, b = goal.body.dom, goal.body.cod
                p = self.prove(base + (Later(a),), Later(b), d)
                if p:
                    return l_rule(arrow_i(p, Later(a)))
            if self.has_approx:
                p = self.prove(base, goal.body, d)
                if p:
                    return approx(p)
            elif isinstance(goal.body, Later):
                p = self.prove(base, goal.body, d)
                if p:
                    return four(p)
        if self.mu and isinstance(goal, Mu):
            p = self.prove(base, unfold(goal), d)
            if p:
                return fold(p, goal)
        p = self._elim(base, sat, goal, d)
        if p:
            return p
        if self.has_approx and alpha_key(Later(goal)) not in sat:
            p = self.prove(base + (Later(goal),), goal, d)
            if p:
                return self._strong_loeb(arrow_i(p, Later(goal)))
        return None

    def _strong_loeb(self, p: Proof) -> Proof:
        # p : G |- #A -> A
        if self.s is System.LAMU:
            return y_rule(p)
        return arrow_e(p, w_rule(approx(p)))

    def _nec(self, base, sat, goal: Later, d) -> Optional[Proof]:
        C = goal.body
        boxed = [F for F, _ in sat.values() if isinstance(F, Later)]
        inner = [F.body for F in boxed] + boxed
        if self.has_w:
            inner = inner + [goal]
        p = self.prove(fset(inner), C, d)
        if p is None:
            return None
        used_loeb = self.has_w and alpha_key(goal) in keys(p.ctx)
        if used_loeb:
            p = arrow_i(p, goal)  # Gi |- #C -> C
        q = nec(p)
        if used_loeb:
            q = self._loeb_apply(q)
        # discharge the bulleted assumptions
        for F in list(q.ctx):
            k = alpha_key(F)
            body = F.body
            if k in sat:
                t, pr = sat[k]
                if pr is not None:
                    q = cut(q, F, pr)
            else:
                # F = ##A with #A available
                q = cut(q, F, later_twice(self._use(sat, body)))
        return q

    def _loeb_apply(self, q: Proof) -> Proof:
        # q : G |- #(#C -> C)
        if "W" in ALLOWED[self.s]:
            return w_rule(q)
        C = q.goal.body.cod
        return arrow_e(weaken(theorem_loeb(self.s, C), q.ctx), q)

    def _elim(self, base, sat, goal, d) -> Optional[Proof]:
        gk = alpha_key(goal)
        for F, _ in list(sat.values()):
            args: List[Type] = []
            H = F
            while isinstance(H, Arrow) and len(args) < 8:
                args.append(H.dom)
                H = H.cod
                if alpha_key(H) == gk:
                    subs = []
                    for a in args:
                        pa = self.prove(base, a, d)
                        if pa is None:
                            break
                        subs.append(pa)
                    else:
                        p = self._use(sat, F)
                        for pa in subs:
                            p = arrow_e(p, pa)
                        return p
        return None


def _strip(A: Type):
    n = 0
    while isinstance(A, Later):
        n += 1
        A = A.body
    return n, A


def prove(system, ctx: Iterable, goal, max_depth: int = 12, fuel: int = 200_000) -> Union[Proof, Unknown]:
    """Bounded proof search.  Every returned proof passes check_proof."""
    system = as_system(system)
    ctx = fset(as_type(t) for t in ctx)
    goal = as_type(goal)
    if system is not System.LAMU and any(has_mu(t) for t in ctx + (goal,)):
        raise ValueError(f"{system.value} only admits mu-free formulas")
    search = _Search(system, fuel)
    try:
        for depth in range(1, max_depth + 1):
            p = search.prove(ctx, goal, depth)
            if p is not None:
                p = weaken(p, ctx)
                res = check_proof(p)
                if not res.ok:  # pragma: no cover - would be a prover bug
                    raise AssertionError("prover produced an invalid proof: " + "; ".join(res.messages()))
                return p
    except OutOfFuel:
        return Unknown("fuel exhausted")
    return Unknown(f"no proof up to depth {max_depth}")


# ---------------------------------------------------------------------------
# countermodels


@dataclass
class Countermodel:
    frame: kp.Frame
    val: Dict[str, frozenset]
    world: int

    def to_json(self) -> dict:
        out = self.frame.to_json(self.val)
        out["world"] = self.frame.names[self.world]
        return out


class NotFound:
    def __init__(self, max_worlds: int):
        self.max_worlds = max_worlds

    def __bool__(self):
        return False

    def __repr__(self):
        return f"NotFound(max_worlds={self.max_worlds})"


def verify_countermodel(system, ctx, goal, cm: Countermodel) -> bool:
    system = as_system(system)
    if not kp.validate_frame(cm.frame, FRAME_CLASS[system]):
        return False
    if not kp.is_hereditary(cm.frame, cm.val):
        return False
    ev = kp.Evaluator(cm.frame, cm.val)
    from .syntax import closure

    return all(ev.holds(cm.world, closure(as_type(t))) for t in ctx) and not ev.holds(
        cm.world, closure(as_type(goal))
    )


def countermodel(system, ctx: Iterable, goal, max_worlds: int = 4) -> Union[Countermodel, NotFound]:
    """Search frames of the system's class by size for a world where the
    assumptions hold and the goal fails.  Only rooted frames up to
    isomorphism are tried, which loses nothing since truth at a world only
    depends on what that world can reach."""
    system = as_system(system)
    ctx = [as_type(t) for t in ctx]
    goal = as_type(goal)
    cls = FRAME_CLASS[system]
    vars_ = sorted(set().union(*(t.ftv for t in ctx + [goal])))
    fast = not any(has_mu(t) for t in ctx + [goal])
    for n in range(1, max_worlds + 1):
        for f in kp.rooted_frames(cls, n):
            ups = kp.up_sets(f)
            for masks in itertools.product(ups, repeat=len(vars_)):
                vm = dict(zip(vars_, masks))
                if fast:
                    ok = f.full
                    for t in ctx:
                        ok &= kp._fast_mask(f, vm, t)
                    bad = ok & ~kp._fast_mask(f, vm, goal)
                else:
                    val = {x: kp._unmask(m) for x, m in vm.items()}
                    ev = kp.Evaluator(f, val)
                    ok = f.full
                    for t in ctx:
                        ok &= ev.truth_mask(t)
                    bad = ok & ~ev.truth_mask(goal)
                if bad:
                    w = (bad & -bad).bit_length() - 1
                    cm = Countermodel(f, {x: kp._unmask(m) for x, m in vm.items()}, w)
                    assert verify_countermodel(system, ctx, goal, cm)
                    return cm
    return NotFound(max_worlds)


# ---------------------------------------------------------------------------
# decision


@dataclass
class Verdict:
    kind: str  # "Provable", "Refutable" or "Unknown"
    proof: Optional[Proof] = None
    counter: Optional[Countermodel] = None
    reason: str = ""

    def __bool__(self):
        return self.kind == "Provable"

    def to_json(self) -> dict:
        out = {"verdict": self.kind}
        if self.proof is not None:
            out["proof"] = self.proof.to_json()
        if self.counter is not None:
            out["countermodel"] = self.counter.to_json()
        if self.reason:
            out["reason"] = self.reason
        return out


def decide(system, ctx: Iterable, goal, max_depth: int = 12, max_worlds: int = 4, fuel: int = 200_000) -> Verdict:
    """Alternate proof search and countermodel search with growing budgets.
    Every verdict other than Unknown carries a checked certificate."""
    system = as_system(system)
    ctx = fset(as_type(t) for t in ctx)
    goal = as_type(goal)
    depths = sorted({min(max_depth, d) for d in (4, 8, max_depth)})
    worlds = sorted({min(max_worlds, w) for w in (2, 3, max_worlds)})
    for d, w in itertools.zip_longest(depths, worlds):
        if d is not None:
            p = prove(system, ctx, goal, max_depth=d, fuel=fuel)
            if isinstance(p, Proof):
                return Verdict("Provable", proof=p)
        if w is not None:
            c = countermodel(system, ctx, goal, w)
            if isinstance(c, Countermodel):
                return Verdict("Refutable", counter=c)
    return Verdict("Unknown", reason=f"no proof to depth {max_depth}, no countermodel up to {max_worlds} worlds")


# ---------------------------------------------------------------------------
# from logic proofs to typing derivations


class _Names:
    def __init__(self):
        self.table: Dict[object, str] = {}

    def __call__(self, A: Type) -> str:
        k = alpha_key(A)
        if k not in self.table:
            self.table[k] = f"h{len(self.table)}"
        return self.table[k]


def to_typing(p: Proof, names: Optional[_Names] = None) -> ty.TypDeriv:
    """Translate an LAmu proof of {A1..An} |- B into a typing derivation
    {h_i : A_i} |- M : B."""
    if p.system is not System.LAMU:
        p = embed(p, System.LAMU)
    names = names or _Names()
    d = _to_typing(p, names)
    return ty.weaken_to(d, {names(t): t for t in p.ctx})


def _to_typing(p: Proof, names: _Names) -> ty.TypDeriv:
    r = p.rule
    e = frozenset()
    if r == "Assump":
        return ty.TypDeriv("Var", {names(p.goal): p.goal}, Var(names(p.goal)), p.goal)
    if r == "ArrowI":
        q = _to_typing(p.premises[0], names)
        A = p.goal.dom
        x = names(A)
        if alpha_key(A) in keys(p.ctx):
            # the antecedent stays available, so bind a vacuous variable
            used = ty._all_names(q)
            x = fresh_name("v", used | set(names.table.values()))
        if x not in q.ctx:
            q = ty.weaken(q, {x: A})
        if not alpha_eq(q.ctx[x], A):
            q = ty.retype_var(q, x, sb.reflex(e, A, q.ctx[x]))
        return ty.arrow_i(q, x)
    if r == "ArrowE":
        q1 = _to_typing(p.premises[0], names)
        q2 = _to_typing(p.premises[1], names)
        return ty.arrow_e(q1, q2)
    q = _to_typing(p.premises[0], names)
    if r == "Nec":
        n = ty.elab_nec(q)
        # h[A] : #A must become h[#A] : #A
        mapping = {x: names(T) for x, T in n.ctx.items()}
        return _rename_all(n, mapping)
    if r == "Fold" or r == "Unfold" or r == "LRule":
        return ty.subsume(q, sb.reflex(e, q.type, p.goal))
    if r == "Approx" or r == "Four":
        return ty.subsume(q, sb.approx(e, q.type))
    raise ValueError(f"rule {r} has no typing counterpart")


def _rename_all(d: ty.TypDeriv, mapping: Dict[str, str]) -> ty.TypDeriv:
    mapping = {a: b for a, b in mapping.items() if a != b}
    if not mapping:
        return d
    used = ty._all_names(d) | set(mapping.values())
    tmp = {}
    for a in mapping:
        t = fresh_name("t_" + a, used)
        used.add(t)
        tmp[a] = t
        d = ty.rename_var(d, a, t)
    for a, b in mapping.items():
        d = ty.rename_var(d, tmp[a], b)
    return d


def erase(d: ty.TypDeriv) -> Tuple[Tuple[Type, ...], Type]:
    """The sequent obtained by forgetting terms."""
    return fset(d.ctx.values()), d.type


# ---------------------------------------------------------------------------
# the summary table


A_, B_ = TVar("X"), TVar("Y")

TABLE_ROWS = [
    ("K", Arrow(Later(Arrow(A_, B_)), Arrow(Later(A_), Later(B_)))),
    ("L", Arrow(Arrow(Later(A_), Later(B_)), Later(Arrow(A_, B_)))),
    ("4", Arrow(Later(A_), Later(Later(A_)))),
    ("approx", Arrow(A_, Later(A_))),
    ("W", Arrow(Later(Arrow(Later(A_), A_)), Later(A_))),
    ("Y", Arrow(Arrow(Later(A_), A_), A_)),
]

TABLE_SYSTEMS = [System.MIGL, System.MIGLC, System.LA, System.LAMU, "lambdaA"]

# True = theorem, False = "n/a"
TABLE_EXPECTED = {
    "K": [True, True, True, True, True],
    "L": [False, False, True, True, True],
    "4": [True, True, True, True, True],
    "approx": [False, True, True, True, True],
    "W": [True, True, True, True, True],
    "Y": [False, True, True, True, True],
}


@dataclass
class TableCell:
    row: str
    system: str
    verdict: str
    certificate_ok: bool


def table_cell(row: str, system) -> TableCell:
    formula = dict(TABLE_ROWS)[row]
    if system == "lambdaA":
        v = decide(System.LAMU, [], formula)
        if v.kind != "Provable":
            return TableCell(row, system, v.kind, False)
        d = to_typing(v.proof)
        ok = ty.check_typderiv(d).ok and not d.ctx and alpha_eq(d.type, formula)
        return TableCell(row, system, "Provable", ok)
    system = as_system(system)
    v = decide(system, [], formula)
    if v.kind == "Provable":
        ok = check_proof(v.proof).ok and alpha_eq(v.proof.goal, formula)
    elif v.kind == "Refutable":
        ok = verify_countermodel(system, [], formula, v.counter)
    else:
        ok = False
    return TableCell(row, system.value, v.kind, ok)


def summary_table() -> List[TableCell]:
    return [table_cell(r, s) for r, _ in TABLE_ROWS for s in TABLE_SYSTEMS]
