"""Random generators for types, terms and typing derivations (test data)."""

from __future__ import annotations

import random
from typing import Dict, List, Optional, Sequence

from . import subtyping as sb
from . import typing as ty
from .equality import ArrC, EqMode, canon, type_eq
from .measures import is_proper, is_top_variant, shift
from .syntax import (
    TOP,
    App,
    Arrow,
    Lam,
    Later,
    Mu,
    TVar,
    Type,
    Var,
    alpha_eq,
    unfold,
)

FREE_VARS = ("X", "Y", "Z")
BOUND_VARS = ("U", "V", "W")


def random_type(rng: random.Random, height: int = 4, free: Sequence[str] = FREE_VARS, mu: bool = True,
                _bound: tuple = ()) -> Type:
    """A random well-formed type.  A mu whose body is not proper in its
    binder gets a bullet in front of the body."""
    names = list(free) + list(_bound)
    if height <= 0:
        return TVar(rng.choice(names))
    r = rng.random()
    if r < 0.2:
        return TVar(rng.choice(names))
    if r < 0.45:
        return Later(random_type(rng, height - 1, free, mu, _bound))
    if r < 0.8 or not mu:
        return Arrow(random_type(rng, height - 1, free, mu, _bound),
                     random_type(rng, height - 1, free, mu, _bound))
    x = rng.choice(BOUND_VARS)
    body = random_type(rng, height - 1, free, mu, _bound + (x,))
    if not is_proper(body, x):
        body = Later(body)
    return Mu(x, body)


def random_term(rng: random.Random, size: int = 6, free: Sequence[str] = ("a", "b"), _bound: tuple = ()):
    names = list(free) + list(_bound)
    if size <= 1:
        return Var(rng.choice(names))
    r = rng.random()
    if r < 0.35:
        x = "xyzuvw"[len(_bound) % 6] + ("'" * (len(_bound) // 6))
        return Lam(x, random_term(rng, size - 1, free, _bound + (x,)))
    if r < 0.9:
        k = rng.randint(1, size - 2) if size > 2 else 1
        return App(random_term(rng, k, free, _bound), random_term(rng, max(1, size - 1 - k), free, _bound))
    return Var(rng.choice(names))


def random_later_free_type(rng: random.Random, height: int = 3, free: Sequence[str] = ("X", "Y")) -> Type:
    if height <= 0 or rng.random() < 0.3:
        return TVar(rng.choice(list(free)))
    return Arrow(random_later_free_type(rng, height - 1, free), random_later_free_type(rng, height - 1, free))


def equal_variant(rng: random.Random, A: Type, mode=EqMode.CONGR) -> Type:
    """A type equal to A under ``mode``, by one random rewrite somewhere."""
    r = rng.random()
    if isinstance(A, Mu) and r < 0.3:
        return unfold(A)
    if r < 0.5:
        return canon(A, mode).to_type()
    if r < 0.6:
        return shift(A, 0)
    if isinstance(A, Arrow):
        return Arrow(equal_variant(rng, A.dom, mode), equal_variant(rng, A.cod, mode))
    if isinstance(A, Later):
        return Later(equal_variant(rng, A.body, mode))
    return A


def random_type_pair(rng: random.Random, mode=EqMode.CONGR, height: int = 5):
    """Mixes equal pairs, near misses and independent pairs."""
    A = random_type(rng, rng.randint(1, height))
    r = rng.random()
    if r < 0.4:
        return A, equal_variant(rng, A, mode)
    if r < 0.6:
        B = equal_variant(rng, A, mode)
        return A, (Later(B) if rng.random() < 0.5 else Arrow(B, TVar("X")))
    return A, random_type(rng, rng.randint(1, height))


def weaker_type(rng: random.Random, A: Type, positive: bool = True) -> Type:
    """A type B with A <= B (positive) or B <= A (negative), by adding
    bullets or Top at positive positions and dropping bullets at negative
    ones."""
    r = rng.random()
    if positive:
        if r < 0.15:
            return Later(A)
        if r < 0.2:
            return TOP
    elif isinstance(A, Later) and r < 0.3:
        return A.body
    if isinstance(A, Arrow):
        return Arrow(weaker_type(rng, A.dom, not positive), weaker_type(rng, A.cod, positive))
    if isinstance(A, Later):
        return Later(weaker_type(rng, A.body, positive))
    return A


def random_sub_pair(rng: random.Random, height: int = 4):
    """A pair (A, B) with A <= B by construction, or an unrelated pair."""
    A = random_type(rng, rng.randint(1, height))
    if rng.random() < 0.8:
        return A, weaker_type(rng, A)
    return A, random_type(rng, rng.randint(1, height))


# ---------------------------------------------------------------------------
# derivations


class DerivGen:
    """Builds valid derivations aimed at a requested type.

    Every move constructs an explicit certificate; nothing here is trusted,
    callers re-check the output.
    """

    def __init__(self, rng: random.Random, redex_rate: float = 0.35, shift_rate: float = 0.1, y_rate: float = 0.1):
        self.rng = rng
        self.redex_rate = redex_rate
        self.shift_rate = shift_rate
        self.y_rate = y_rate
        self.counter = 0

    def fresh(self, ctx) -> str:
        while True:
            self.counter += 1
            x = f"v{self.counter}"
            if x not in ctx:
                return x

    def at(self, ctx: Dict[str, Type], A: Type, depth: int = 4) -> Optional[ty.TypDeriv]:
        d = self._at(ctx, A, depth)
        if d is not None and depth > 0 and self.rng.random() < self.shift_rate:
            d = ty.shift(ty.elab_nec(d))
        return d

    def _at(self, ctx, A, depth):
        rng = self.rng
        e = frozenset()
        moves = ["var", "top", "arrow", "later", "canon", "redex", "apply", "y"]
        rng.shuffle(moves)
        # prefer to stop when we run out of depth
        if depth <= 0:
            moves = ["var", "top", "arrow", "canon", "later"]
        for m in moves:
            if m == "var":
                for x, T in sorted(ctx.items()):
                    if alpha_eq(T, A):
                        return ty.var(ctx, x)
                    if type_eq(T, A, EqMode.SIM):
                        return ty.subsume(ty.var(ctx, x), sb.reflex(e, T, A))
                    n = 0
                    B = A
                    while isinstance(B, Later):
                        n += 1
                        B = B.body
                        if alpha_eq(T, B):
                            return ty.subsume(ty.var(ctx, x), sb.approx_chain(e, T, n))
            elif m == "top" and is_top_variant(A):
                return ty.subsume_to(ty.top_i(ctx, Var(self._some_var(ctx))), A)
            elif m == "arrow" and isinstance(A, Arrow):
                y = self.fresh(ctx)
                body = self.at({**ctx, y: A.dom}, A.cod, depth - 1)
                if body is not None:
                    return ty.arrow_i(ty.weaken_to(body, {y: A.dom}), y)
            elif m == "later" and isinstance(A, Later):
                d = self.at(ctx, A.body, depth - 1)
                if d is not None:
                    return ty.subsume(d, sb.approx(e, A.body))
            elif m == "canon" and not isinstance(A, Arrow):
                c = canon(A, EqMode.SIM)
                if isinstance(c, ArrC):
                    B = c.to_type()
                    d = self.at(ctx, B, depth - 1)
                    if d is not None:
                        return ty.subsume(d, sb.reflex(e, B, A))
            elif m == "redex" and depth > 0 and rng.random() < self.redex_rate * 2:
                B = self._pick_type(ctx)
                y = self.fresh(ctx)
                body = self.at({**ctx, y: B}, A, depth - 1)
                arg = self.at(ctx, B, depth - 1)
                if body is not None and arg is not None:
                    fn = ty.arrow_i(ty.weaken_to(body, {y: B}), y)
                    return ty.arrow_e(fn, arg)
            elif m == "apply" and depth > 0:
                for f, T in sorted(ctx.items()):
                    c = canon(T, EqMode.SIM)
                    if isinstance(c, ArrC):
                        D, C = c.dom.expand(), c.cod.expand()
                        if type_eq(C, A, EqMode.SIM):
                            arg = self.at(ctx, D, depth - 1)
                            if arg is not None:
                                fd = ty.subsume_to(ty.var(ctx, f), Arrow(D, C))
                                return ty.subsume_to(ty.arrow_e(fd, arg), A)
            elif m == "y" and depth > 0 and rng.random() < self.y_rate * 3:
                step = self.at(ctx, Arrow(Later(A), A), depth - 1)
                if step is not None:
                    yd = ty.weaken_to(ty.y_combinator_derivation(A), {})
                    return ty.arrow_e(yd, step)
        return None

    def _some_var(self, ctx) -> str:
        return sorted(ctx)[0] if ctx else "t"

    def _pick_type(self, ctx) -> Type:
        if ctx and self.rng.random() < 0.6:
            return self.rng.choice(sorted(ctx.values(), key=str))
        return random_type(self.rng, 2)


def random_context(rng: random.Random, size: int = 3, height: int = 2) -> Dict[str, Type]:
    ctx = {}
    for i in range(size):
        ctx[f"c{i}"] = random_type(rng, height)
    return ctx


def random_derivation(rng: random.Random, closed: bool = False, height: int = 3, depth: int = 4,
                      attempts: int = 50) -> ty.TypDeriv:
    """A valid derivation for a random type; open ones use a random context
    that always includes variables of the base types."""
    g = DerivGen(rng)
    for _ in range(attempts):
        ctx = {} if closed else {**{f"a{v}": TVar(v) for v in FREE_VARS}, **random_context(rng, rng.randint(0, 2))}
        A = random_type(rng, height)
        if closed and not isinstance(A, Arrow):
            A = Arrow(random_type(rng, 1), A)
        d = g.at(ctx, A, depth)
        if d is not None:
            return d
    # always possible: identity
    x = "z"
    return ty.arrow_i(ty.var({x: TVar("X")}, x), x)


def derivation_corpus(seed: int = 0, n: int = 200, closed_share: float = 0.4) -> List[ty.TypDeriv]:
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        out.append(random_derivation(rng, closed=rng.random() < closed_share))
    return out
