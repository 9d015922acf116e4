"""Structural measures on type expressions: tail, top-variants,
properness, effective type variables, height, rank, depths and shift."""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple, Optional

from .syntax import TOP, Arrow, Later, Mu, TVar, Type, unfold


class ExtNat:
    """A natural number or infinity, with saturating addition."""

    __slots__ = ("value",)

    def __init__(self, value: Optional[int]):
        if value is not None and value < 0:
            raise ValueError("ExtNat must be non-negative")
        self.value = value

    @property
    def is_inf(self) -> bool:
        return self.value is None

    def __add__(self, other):
        other = _ext(other)
        if self.value is None or other.value is None:
            return INF
        return ExtNat(self.value + other.value)

    __radd__ = __add__

    def __eq__(self, other):
        if isinstance(other, int):
            return self.value == other
        return isinstance(other, ExtNat) and self.value == other.value

    def __hash__(self):
        return hash(self.value)

    def __lt__(self, other):
        other = _ext(other)
        if self.value is None:
            return False
        return other.value is None or self.value < other.value

    def __le__(self, other):
        return self == _ext(other) or self < other

    def __gt__(self, other):
        return _ext(other) < self

    def __ge__(self, other):
        return _ext(other) <= self

    def __repr__(self):
        return "ExtNat(inf)" if self.value is None else f"ExtNat({self.value})"

    def __str__(self):
        return "inf" if self.value is None else str(self.value)

    def to_json(self):
        return "inf" if self.value is None else self.value


def _ext(x) -> ExtNat:
    return x if isinstance(x, ExtNat) else ExtNat(x)


def emin(a: ExtNat, b: ExtNat) -> ExtNat:
    return a if a <= b else b


INF = ExtNat(None)
ZERO = ExtNat(0)


class EtvSets(NamedTuple):
    positive: frozenset
    negative: frozenset

    @property
    def all(self) -> frozenset:
        return self.positive | self.negative


# ---------------------------------------------------------------------------


def tail(A: Type) -> Type:
    if isinstance(A, TVar):
        return A
    if isinstance(A, Arrow):
        return tail(A.cod)
    if isinstance(A, Later):
        return Later(tail(A.body))
    return Mu(A.binder, tail(A.body), check=False)


@lru_cache(maxsize=200_000)
def is_top_variant(A: Type) -> bool:
    # walk the tail directly: bullets and binders until the final variable
    binders = []  # list of [name, bullets after it]
    t = A
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
    return False


@lru_cache(maxsize=200_000)
def is_proper(A: Type, X: str) -> bool:
    if X not in A.ftv:
        return True
    if isinstance(A, TVar):
        return A.name != X
    if isinstance(A, Later):
        return True
    if isinstance(A, Arrow):
        return (is_proper(A.dom, X) and is_proper(A.cod, X)) or is_top_variant(A.cod)
    # X is free, so the binder differs from X
    return is_proper(A.body, X) or is_top_variant(A)


@lru_cache(maxsize=200_000)
def etv(A: Type) -> EtvSets:
    empty = frozenset()
    if is_top_variant(A):
        return EtvSets(empty, empty)
    if isinstance(A, TVar):
        return EtvSets(frozenset((A.name,)), empty)
    if isinstance(A, Later):
        return etv(A.body)
    if isinstance(A, Arrow):
        d = etv(A.dom)
        c = etv(A.cod)
        return EtvSets(d.negative | c.positive, d.positive | c.negative)
    b = etv(A.body)
    X = A.binder
    if X in b.negative:
        both = (b.positive | b.negative) - {X}
        return EtvSets(both, both)
    return EtvSets(b.positive - {X}, b.negative - {X})


def positive_etv(A: Type) -> frozenset:
    return etv(A).positive


def negative_etv(A: Type) -> frozenset:
    return etv(A).negative


@lru_cache(maxsize=200_000)
def height(A: Type) -> int:
    if isinstance(A, TVar):
        return 0
    if isinstance(A, Later):
        return height(A.body) + 1
    if isinstance(A, Arrow):
        return max(height(A.dom), height(A.cod)) + 1
    return height(A.body) + 1


@lru_cache(maxsize=200_000)
def rank(A: Type) -> int:
    if is_top_variant(A):
        return 0
    if isinstance(A, (TVar, Later)):
        return 0
    if isinstance(A, Arrow):
        return max(rank(A.dom), rank(A.cod)) + 1
    return rank(A.body) + 1


LATER = "later"
ARROW = "arrow"


@lru_cache(maxsize=400_000)
def depth(A: Type, X: str, kind: str = LATER, sign: str = "+") -> ExtNat:
    """dp^sign_kind(A, X)."""
    if kind not in (LATER, ARROW):
        raise ValueError(f"unknown depth kind {kind!r}")
    if sign not in ("+", "-"):
        raise ValueError(f"unknown sign {sign!r}")
    other = "-" if sign == "+" else "+"
    if is_top_variant(A):
        return INF
    if isinstance(A, TVar):
        if A.name == X and sign == "+":
            return ZERO
        return INF
    if isinstance(A, Later):
        d = depth(A.body, X, kind, sign)
        return d + 1 if kind == LATER else d
    if isinstance(A, Arrow):
        d = emin(depth(A.dom, X, kind, other), depth(A.cod, X, kind, sign))
        return d if kind == LATER else d + 1
    Y = A.binder
    if Y == X:
        return INF
    B = A.body
    return emin(depth(B, X, kind, sign), depth(B, Y, kind, "-") + depth(B, X, kind, other))


def all_depths(A: Type, X: str) -> dict:
    return {
        f"{k}{s}": depth(A, X, k, s) for k in (LATER, ARROW) for s in ("+", "-")
    }


def shift(A: Type, n: int) -> Type:
    """The n-th shift of A, by recursion on (n, rank)."""
    if n < 0:
        raise ValueError("shift index must be non-negative")
    while True:
        if is_top_variant(A):
            return TOP
        if isinstance(A, TVar):
            return A
        if isinstance(A, Later):
            if n == 0:
                return A
            A, n = A.body, n - 1
            continue
        if isinstance(A, Arrow):
            return Arrow(shift(A.dom, n), shift(A.cod, n))
        A = unfold(A)
