"""Canonical forms and decision procedures for the two type equalities.

``CONGR`` is the congruence generated by folding/unfolding recursive types
and collapsing arrows into Top.  ``SIM`` additionally distributes the later
modality over arrows.  Both are decided on closures (a subterm of the
input plus an environment for its mu-bound variables), which keeps the set
of states finite.
"""

from __future__ import annotations

import enum
from functools import lru_cache
from typing import Dict, List, Optional, Tuple, Union

from .measures import is_top_variant
from .syntax import (
    TOP,
    Arrow,
    Later,
    Mu,
    TVar,
    Type,
    TypeClosure,
    closure,
    later_n,
    print_type,
)


class EqMode(str, enum.Enum):
    CONGR = "congr"
    SIM = "sim"


def as_mode(mode) -> EqMode:
    if isinstance(mode, EqMode):
        return mode
    aliases = {"congr": EqMode.CONGR, "cong": EqMode.CONGR, "≅": EqMode.CONGR,
               "sim": EqMode.SIM, "≃": EqMode.SIM}
    try:
        return aliases[str(mode).lower()]
    except KeyError:
        raise ValueError(f"unknown equality mode {mode!r}") from None


class TopC:
    __slots__ = ()

    def to_type(self) -> Type:
        return TOP

    def __eq__(self, other):
        return isinstance(other, TopC)

    def __hash__(self):
        return hash("TopC")

    def __repr__(self):
        return "TopC()"


class VarC:
    """#^n X"""

    __slots__ = ("n", "name")

    def __init__(self, n: int, name: str):
        self.n = n
        self.name = name

    def to_type(self) -> Type:
        return later_n(TVar(self.name), self.n)

    def __eq__(self, other):
        return isinstance(other, VarC) and (self.n, self.name) == (other.n, other.name)

    def __hash__(self):
        return hash((self.n, self.name))

    def __repr__(self):
        return f"VarC({self.n}, {self.name!r})"


class ArrC:
    """#^n (dom -> cod).  ``arrow`` is the closure of the arrow itself."""

    __slots__ = ("n", "dom", "cod", "arrow")

    def __init__(self, n: int, dom: TypeClosure, cod: TypeClosure, arrow: Optional[TypeClosure] = None):
        self.n = n
        self.dom = dom
        self.cod = cod
        self.arrow = arrow

    def to_type(self) -> Type:
        return later_n(Arrow(self.dom.expand(), self.cod.expand()), self.n)

    def __repr__(self):
        return f"ArrC({self.n}, {print_type(self.dom.expand())}, {print_type(self.cod.expand())})"


CanonForm = Union[TopC, VarC, ArrC]


# ---------------------------------------------------------------------------
# closures


def cl_is_top(c: TypeClosure) -> bool:
    """Top-variant test for the type denoted by a closure.

    The tail of A[s] is tail(A) with the tails of s substituted, so we walk
    the tail of the skeleton and follow the environment at the end.
    """
    return _cl_top(c)


@lru_cache(maxsize=200_000)
def _cl_top(c: TypeClosure) -> bool:
    binders = []
    t = c.skeleton
    while True:
        if isinstance(t, Arrow):
            t = t.cod
        elif isinstance(t, Later):
            if binders:
                binders[-1][1] += 1
            t = t.body
        elif isinstance(t, Mu):
            binders.append([t.binder, 0])
            t = t.body
        else:
            break
    name = t.name
    for i in range(len(binders) - 1, -1, -1):
        if binders[i][0] == name:
            return sum(b[1] for b in binders[i:]) >= 1
    target = c.lookup(name)
    if target is None:
        return False
    return _cl_top(target)


@lru_cache(maxsize=200_000)
def canon_closure(c: TypeClosure) -> CanonForm:
    """Congruence canonical form of a closure."""
    n = 0
    while True:
        if _cl_top(c):
            return TopC()
        s = c.skeleton
        if isinstance(s, TVar):
            target = c.lookup(s.name)
            if target is None:
                return VarC(n, s.name)
            c = target
        elif isinstance(s, Later):
            n += 1
            c = TypeClosure.make(s.body, c.env_dict())
        elif isinstance(s, Arrow):
            env = c.env_dict()
            return ArrC(n, TypeClosure.make(s.dom, env), TypeClosure.make(s.cod, env), c)
        else:
            env = c.env_dict()
            env[s.binder] = c
            c = TypeClosure.make(s.body, env)


def _later_closure(c: TypeClosure, n: int) -> TypeClosure:
    if n == 0:
        return c
    return TypeClosure.make(later_n(c.skeleton, n), c.env_dict())


def canon(A: Type, mode=EqMode.CONGR) -> CanonForm:
    """Canonical form of A.  In SIM mode an arrow head always has n = 0."""
    mode = as_mode(mode)
    f = canon_closure(closure(A))
    if mode is EqMode.SIM and isinstance(f, ArrC) and f.n > 0:
        return ArrC(0, _later_closure(f.dom, f.n), _later_closure(f.cod, f.n))
    return f


def canon_type(A: Type, mode=EqMode.CONGR) -> Type:
    return canon(A, mode).to_type()


# ---------------------------------------------------------------------------
# decision procedure


def type_eq(A: Type, B: Type, mode=EqMode.CONGR, trace: Optional[list] = None) -> bool:
    return closure_eq(closure(A), closure(B), mode, trace)


def closure_eq(c1: TypeClosure, c2: TypeClosure, mode=EqMode.CONGR, trace: Optional[list] = None) -> bool:
    mode = as_mode(mode)
    if mode is EqMode.CONGR:
        return _eq_congr(c1, c2, trace)
    return _eq_sim(c1, c2, trace)


def _eq_congr(c1, c2, trace) -> bool:
    seen = set()
    work = [(c1, c2)]
    while work:
        a, b = work.pop()
        if (a, b) in seen or a == b:
            continue
        seen.add((a, b))
        if trace is not None:
            trace.append((a, 0, b, 0))
        fa = canon_closure(a)
        fb = canon_closure(b)
        if isinstance(fa, TopC) or isinstance(fb, TopC):
            if isinstance(fa, TopC) and isinstance(fb, TopC):
                continue
            return False
        if isinstance(fa, VarC) or isinstance(fb, VarC):
            if fa == fb:
                continue
            return False
        if fa.n != fb.n:
            return False
        work.append((fa.dom, fb.dom))
        work.append((fa.cod, fb.cod))
    return True


def _eq_sim(c1, c2, trace) -> bool:
    # a state (a, b, d) stands for #^max(d,0) a  vs  #^max(-d,0) b.  Common
    # bullets can be dropped, and a closure pair reached with two different
    # offsets cannot be equal because the variable leaves disagree.
    offsets: Dict[Tuple[TypeClosure, TypeClosure], int] = {}
    work = [(c1, c2, 0)]
    while work:
        a, b, d = work.pop()
        if (a, b) in offsets:
            if offsets[(a, b)] == d:
                continue
            fa = canon_closure(a)
            fb = canon_closure(b)
            if isinstance(fa, TopC) and isinstance(fb, TopC):
                continue
            return False
        offsets[(a, b)] = d
        if trace is not None:
            trace.append((a, max(d, 0), b, max(-d, 0)))
        fa = canon_closure(a)
        fb = canon_closure(b)
        if isinstance(fa, TopC) or isinstance(fb, TopC):
            if isinstance(fa, TopC) and isinstance(fb, TopC):
                continue
            return False
        if isinstance(fa, VarC) or isinstance(fb, VarC):
            if (
                isinstance(fa, VarC)
                and isinstance(fb, VarC)
                and fa.name == fb.name
                and fa.n + d == fb.n
            ):
                continue
            return False
        d2 = d + fa.n - fb.n
        work.append((fa.dom, fb.dom, d2))
        work.append((fa.cod, fb.cod, d2))
    return True


def trace_to_json(trace) -> list:
    return [
        [print_type(later_n(a.expand(), n)), print_type(later_n(b.expand(), m))]
        for a, n, b, m in trace
    ]


# ---------------------------------------------------------------------------
# components


def comp_closure(A: Type) -> List[TypeClosure]:
    """Representatives of the congruence classes of the components of A.

    Follows the case analysis: Top has only itself, #^n X has the #^m X
    with m <= n, and #^n (C -> D) has the #^m (C -> D) plus the components
    of C and of D.
    """
    reps: List[TypeClosure] = []

    def add(c: TypeClosure):
        for r in reps:
            if closure_eq(r, c, EqMode.CONGR):
                return
        reps.append(c)

    start = closure(A)
    seen = {start}
    work = [start]
    while work:
        c = work.pop(0)
        f = canon_closure(c)
        if isinstance(f, TopC):
            add(c)
        elif isinstance(f, VarC):
            for m in range(f.n, -1, -1):
                add(closure(later_n(TVar(f.name), m)))
        else:
            for m in range(f.n, -1, -1):
                add(_later_closure(f.arrow, m))
            for nxt in (f.dom, f.cod):
                if nxt not in seen:
                    seen.add(nxt)
                    work.append(nxt)
    return reps


def comp_types(A: Type) -> List[Type]:
    return [c.expand() for c in comp_closure(A)]


# ---------------------------------------------------------------------------
# tree oracle


def tree_expand(A: Type, depth: int, mode=EqMode.CONGR):
    """Truncated infinite-tree expansion by naive unfolding.

    Leaves are ("top",), ("var", n, X) and ("cut", n).  Arrow nodes are
    ("arr", n, dom, cod); in SIM mode bullets are pushed into both
    components so arrow nodes always carry n = 0.
    """
    mode = as_mode(mode)
    if depth < 0:
        raise ValueError("depth must be non-negative")
    return _tree(A, depth, mode)


def _tree(A: Type, depth: int, mode: EqMode):
    n = 0
    while True:
        if is_top_variant(A):
            return ("top",)
        if isinstance(A, Later):
            n += 1
            A = A.body
        elif isinstance(A, Mu):
            A = _unfold_naive(A)
        else:
            break
    if isinstance(A, TVar):
        return ("var", n, A.name)
    if depth == 0:
        return ("cut", n if mode is EqMode.CONGR else 0)
    if mode is EqMode.CONGR:
        return ("arr", n, _tree(A.dom, depth - 1, mode), _tree(A.cod, depth - 1, mode))
    return (
        "arr",
        0,
        _tree(later_n(A.dom, n), depth - 1, mode),
        _tree(later_n(A.cod, n), depth - 1, mode),
    )


def _unfold_naive(A: Mu) -> Type:
    # textbook substitution with explicit renaming, kept separate from
    # syntax.subst_type so the oracle does not share code with the solver
    return _naive_subst(A.body, A.binder, A)


def _naive_subst(T: Type, x: str, R: Type) -> Type:
    if isinstance(T, TVar):
        return R if T.name == x else T
    if isinstance(T, Later):
        return Later(_naive_subst(T.body, x, R))
    if isinstance(T, Arrow):
        return Arrow(_naive_subst(T.dom, x, R), _naive_subst(T.cod, x, R))
    if T.binder == x:
        return T
    if T.binder in R.ftv:
        new = T.binder
        used = R.ftv | T.body.ftv | {x}
        while new in used:
            new = new + "_"
        body = _naive_subst(T.body, T.binder, TVar(new))
        return Mu(new, _naive_subst(body, x, R), check=False)
    return Mu(T.binder, _naive_subst(T.body, x, R), check=False)
