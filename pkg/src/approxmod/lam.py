"""Untyped lambda calculus: beta steps, head normalization, full
normalization and Boehm tree expansion, all bounded by fuel."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

from .syntax import App, Lam, Term, Var, as_term, print_term, subst_term

LEFTMOST = "leftmost"
HEAD = "head"


def is_redex(M: Term) -> bool:
    return isinstance(M, App) and isinstance(M.fun, Lam)


def contract(M: Term) -> Term:
    if not is_redex(M):
        raise ValueError(f"not a redex: {print_term(M)}")
    return subst_term(M.fun.body, M.fun.binder, M.arg)


def subterm_at(M: Term, path: Sequence[int]) -> Term:
    """Follow a path: 0 = function / body, 1 = argument."""
    for i in path:
        if isinstance(M, App):
            M = M.fun if i == 0 else M.arg if i == 1 else None
        elif isinstance(M, Lam) and i == 0:
            M = M.body
        else:
            M = None
        if M is None:
            raise ValueError(f"invalid path {list(path)}")
    return M


def replace_at(M: Term, path: Sequence[int], N: Term) -> Term:
    if not path:
        return N
    i, rest = path[0], path[1:]
    if isinstance(M, App):
        if i == 0:
            return App(replace_at(M.fun, rest, N), M.arg)
        if i == 1:
            return App(M.fun, replace_at(M.arg, rest, N))
    elif isinstance(M, Lam) and i == 0:
        return Lam(M.binder, replace_at(M.body, rest, N))
    raise ValueError(f"invalid path {list(path)}")


def step_at(M: Term, path: Sequence[int]) -> Term:
    return replace_at(M, path, contract(subterm_at(M, path)))


def redex_paths(M: Term) -> List[Tuple[int, ...]]:
    """All redex positions in leftmost-outermost order."""
    out = []

    def walk(t, p):
        if is_redex(t):
            out.append(p)
        if isinstance(t, App):
            walk(t.fun, p + (0,))
            walk(t.arg, p + (1,))
        elif isinstance(t, Lam):
            walk(t.body, p + (0,))

    walk(M, ())
    return out


def head_redex_path(M: Term) -> Optional[Tuple[int, ...]]:
    p = []
    while isinstance(M, Lam):
        p.append(0)
        M = M.body
    # walk down the application spine to its head
    spine = []
    while isinstance(M, App):
        spine.append(M)
        M = M.fun
    if isinstance(M, Lam) and spine:
        # the innermost application on the spine is the redex
        return tuple(p) + (0,) * (len(spine) - 1)
    return None


def leftmost_redex_path(M: Term) -> Optional[Tuple[int, ...]]:
    stack = [(M, ())]
    while stack:
        t, p = stack.pop()
        if is_redex(t):
            return p
        if isinstance(t, App):
            stack.append((t.arg, p + (1,)))
            stack.append((t.fun, p + (0,)))
        elif isinstance(t, Lam):
            stack.append((t.body, p + (0,)))
    return None


def beta_step(M: Term, strategy: str = LEFTMOST) -> Optional[Term]:
    if strategy == HEAD:
        p = head_redex_path(M)
    elif strategy == LEFTMOST:
        p = leftmost_redex_path(M)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    if p is None:
        return None
    return step_at(M, p)


def random_step(M: Term, rng: random.Random) -> Optional[Term]:
    ps = redex_paths(M)
    if not ps:
        return None
    return step_at(M, rng.choice(ps))


# ---------------------------------------------------------------------------
# normalization


@dataclass
class HNF:
    term: Term
    steps: int

    def __bool__(self):
        return True


@dataclass
class FuelExhausted:
    term: Term
    steps: int

    def __bool__(self):
        return False


def _hnf_parts(M: Term, fuel: int):
    """Head-reduce M.  Returns (binders, head, args, steps, done)."""
    binders: List[str] = []
    t = M
    args: List[Term] = []  # pending arguments, last element applied first
    steps = 0
    while True:
        if isinstance(t, App):
            args.append(t.arg)
            t = t.fun
        elif isinstance(t, Lam):
            if args:
                if steps >= fuel:
                    return binders, t, args, steps, False
                t = subst_term(t.body, t.binder, args.pop())
                steps += 1
            else:
                binders.append(t.binder)
                t = t.body
        else:
            return binders, t, args, steps, True


def _rebuild(binders, head, args) -> Term:
    t = head
    for a in reversed(args):
        t = App(t, a)
    for b in reversed(binders):
        t = Lam(b, t)
    return t


def head_normalize(M, fuel: int = 10_000) -> Union[HNF, FuelExhausted]:
    M = as_term(M)
    binders, head, args, steps, done = _hnf_parts(M, fuel)
    t = _rebuild(binders, head, args)
    return HNF(t, steps) if done else FuelExhausted(t, steps)


def hnf_shape(M: Term) -> Optional[Tuple[List[str], str, List[Term]]]:
    """(binders, head variable, arguments) if M is a head normal form."""
    binders = []
    while isinstance(M, Lam):
        binders.append(M.binder)
        M = M.body
    args = []
    while isinstance(M, App):
        args.append(M.arg)
        M = M.fun
    if isinstance(M, Var):
        return binders, M.name, list(reversed(args))
    return None


@dataclass
class NF:
    term: Term
    steps: int

    def __bool__(self):
        return True


def normalize(M, fuel: int = 100_000) -> Union[NF, FuelExhausted]:
    """Normal-order normalization; fuel bounds the total number of steps."""
    M = as_term(M)
    budget = [fuel]
    done = [True]

    def nf(t: Term) -> Term:
        binders, head, args, steps, ok = _hnf_parts(t, budget[0])
        budget[0] -= steps
        if not ok:
            done[0] = False
            return _rebuild(binders, head, args)
        new_args = []
        for a in reversed(args):
            if done[0]:
                new_args.append(nf(a))
            else:
                new_args.append(a)
        return _rebuild(binders, head, list(reversed(new_args)))

    out = nf(M)
    used = fuel - budget[0]
    return NF(out, used) if done[0] else FuelExhausted(out, used)


def is_normal(M: Term) -> bool:
    return leftmost_redex_path(M) is None


# ---------------------------------------------------------------------------
# Boehm trees


@dataclass
class BHead:
    binders: List[str]
    head: str
    children: List["BohmTree"] = field(default_factory=list)

    def to_json(self):
        return {"kind": "head", "binders": self.binders, "head": self.head,
                "children": [c.to_json() for c in self.children]}


@dataclass
class Pending:
    """Head normalization ran out of fuel here."""

    term: Term

    def to_json(self):
        return {"kind": "pending", "term": print_term(self.term)}


@dataclass
class Elided:
    """Below the requested depth; not expanded."""

    term: Term

    def to_json(self):
        return {"kind": "elided"}


@dataclass
class Bottom:
    """Never produced: divergence is only ever reported as Pending."""

    def to_json(self):
        return {"kind": "bottom"}


BohmTree = Union[BHead, Pending, Elided, Bottom]


def bohm_tree(M, depth: int, fuel: int = 10_000) -> BohmTree:
    """Expand ``depth`` levels of head normal forms; ``fuel`` bounds each
    head normalization separately."""
    M = as_term(M)
    if depth <= 0:
        return Elided(M)
    r = head_normalize(M, fuel)
    if not r:
        return Pending(r.term)
    binders, head, args = hnf_shape(r.term)
    return BHead(binders, head, [bohm_tree(a, depth - 1, fuel) for a in args])


def count_pending(t: BohmTree) -> int:
    if isinstance(t, Pending):
        return 1
    if isinstance(t, BHead):
        return sum(count_pending(c) for c in t.children)
    return 0


def print_bohm(t: BohmTree) -> str:
    if isinstance(t, Pending):
        return "?"
    if isinstance(t, Elided):
        return "..."
    if isinstance(t, Bottom):
        return "_|_"
    s = t.head
    for c in t.children:
        inner = print_bohm(c)
        s += " " + (inner if isinstance(c, (Pending, Elided)) or (isinstance(c, BHead) and not c.children and not c.binders) else f"({inner})")
    if t.binders:
        s = "\\" + " ".join(t.binders) + "." + s
    return s


Y_COMBINATOR = "\\f.(\\x.f (x x)) (\\x.f (x x))"
OMEGA = "(\\x.x x) (\\x.x x)"
