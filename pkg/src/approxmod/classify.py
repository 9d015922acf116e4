"""Convergence classes of types: tail finite, positively finite and
negatively finite, by their grammars."""

from __future__ import annotations

from dataclasses import dataclass, asdict
from functools import lru_cache
from typing import FrozenSet, Iterable, Tuple

from .measures import is_top_variant, negative_etv
from .syntax import Arrow, Later, TVar, Type, as_type


@dataclass(frozen=True)
class ConvClass:
    tail_finite: bool
    positively_finite: bool
    negatively_finite: bool

    def to_json(self):
        return asdict(self)


def tail_finite(A, V: Iterable[str] = ()) -> bool:
    return _tf(as_type(A), frozenset(V))


@lru_cache(maxsize=100_000)
def _tf(A: Type, V: FrozenSet[str]) -> bool:
    # only the tail matters, so walk it iteratively
    while True:
        if isinstance(A, TVar):
            return A.name not in V
        if isinstance(A, Later):
            A = A.body
        elif isinstance(A, Arrow):
            A = A.cod
        else:
            V = V | {A.binder}
            A = A.body


@lru_cache(maxsize=100_000)
def _pf(A: Type) -> bool:
    if isinstance(A, TVar):
        return True
    if isinstance(A, Later):
        return _pf(A.body)
    if isinstance(A, Arrow):
        return _nf(A.dom) and _pf(A.cod)
    body = A.body
    if not (_tf(A, frozenset()) and _pf(body)):
        return False
    return A.binder not in negative_etv(body) or _nf(body)


@lru_cache(maxsize=100_000)
def _nf(A: Type) -> bool:
    # the Top-variant clause makes the grammar ambiguous, so try it first
    if is_top_variant(A):
        return True
    if isinstance(A, TVar):
        return True
    if isinstance(A, Later):
        return _nf(A.body)
    if isinstance(A, Arrow):
        return _pf(A.dom) and _nf(A.cod)
    body = A.body
    if not _nf(body):
        return False
    return A.binder not in negative_etv(body) or _pf(A)


def positively_finite(A) -> bool:
    return _pf(as_type(A))


def negatively_finite(A) -> bool:
    return _nf(as_type(A))


def pos_neg_finite(A) -> Tuple[bool, bool]:
    A = as_type(A)
    return _pf(A), _nf(A)


def classify(A) -> ConvClass:
    A = as_type(A)
    return ConvClass(_tf(A, frozenset()), _pf(A), _nf(A))
