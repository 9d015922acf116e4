"""Subtyping derivations: certificates, a checker, transformations and a
bounded prover.

A judgment ``gamma |- A <= B`` carries a subtyping assumption gamma, a set
of variable pairs in which every variable occurs at most once.
"""

from __future__ import annotations

from typing import Dict, FrozenSet, Iterable, Optional, Tuple, Union

from .common import CheckResult, Fuel, OutOfFuel, Unknown
from .equality import ArrC, EqMode, TopC, VarC, canon, type_eq
from .measures import is_top_variant
from .syntax import (
    TOP,
    Arrow,
    Later,
    Mu,
    NotProperError,
    TVar,
    Type,
    alpha_eq,
    alpha_key,
    as_type,
    fresh_name,
    later_n,
    parse_type,
    print_type,
    subst_type,
)

RULES = ("Assump", "TopR", "Reflex", "Trans", "LaterMono", "ArrowMono", "MuAmber", "Approx")

Gamma = FrozenSet[Tuple[str, str]]


def make_gamma(pairs: Iterable) -> Gamma:
    return frozenset((str(x), str(y)) for x, y in pairs)


def gamma_ok(g: Gamma) -> bool:
    names = [n for pair in g for n in pair]
    return len(names) == len(set(names))


def gamma_vars(g: Gamma) -> set:
    return {n for pair in g for n in pair}


class SubDeriv:
    __slots__ = ("rule", "gamma", "lhs", "rhs", "premises", "side")

    def __init__(self, rule: str, gamma: Gamma, lhs: Type, rhs: Type, premises=(), side=None):
        self.rule = rule
        self.gamma = frozenset(gamma)
        self.lhs = lhs
        self.rhs = rhs
        self.premises = tuple(premises)
        self.side = dict(side or {})

    def height(self) -> int:
        return 1 + max((p.height() for p in self.premises), default=0)

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def __repr__(self):
        g = ", ".join(f"{x}<={y}" for x, y in sorted(self.gamma))
        return f"SubDeriv({self.rule}: {{{g}}} |- {print_type(self.lhs)} <= {print_type(self.rhs)})"

    def to_json(self) -> dict:
        return {
            "rule": self.rule,
            "conclusion": {
                "gamma": [list(p) for p in sorted(self.gamma)],
                "lhs": print_type(self.lhs),
                "rhs": print_type(self.rhs),
            },
            "premises": [p.to_json() for p in self.premises],
            "side": self.side,
        }

    @staticmethod
    def from_json(obj: dict) -> "SubDeriv":
        c = obj["conclusion"]
        return SubDeriv(
            obj["rule"],
            make_gamma(c.get("gamma", [])),
            parse_type(c["lhs"]),
            parse_type(c["rhs"]),
            [SubDeriv.from_json(p) for p in obj.get("premises", [])],
            obj.get("side", {}),
        )


# ---------------------------------------------------------------------------
# constructors


def assump(gamma, X: str, Y: str) -> SubDeriv:
    return SubDeriv("Assump", gamma, TVar(X), TVar(Y))


def top_r(gamma, A: Type) -> SubDeriv:
    return SubDeriv("TopR", gamma, A, TOP)


def reflex(gamma, A: Type, B: Type) -> SubDeriv:
    return SubDeriv("Reflex", gamma, A, B, side={"mode": "sim"})


def trans(d1: SubDeriv, d2: SubDeriv) -> SubDeriv:
    return SubDeriv("Trans", d1.gamma | d2.gamma, d1.lhs, d2.rhs, (d1, d2),
                    {"middle": print_type(d1.rhs)})


def later_mono(d: SubDeriv) -> SubDeriv:
    return SubDeriv("LaterMono", d.gamma, Later(d.lhs), Later(d.rhs), (d,))


def arrow_mono(d1: SubDeriv, d2: SubDeriv) -> SubDeriv:
    """d1 : A' <= A (contravariant), d2 : B <= B'."""
    return SubDeriv("ArrowMono", d1.gamma | d2.gamma, Arrow(d1.rhs, d2.lhs), Arrow(d1.lhs, d2.rhs), (d1, d2))


def mu_amber(d: SubDeriv, X: str, Y: str) -> SubDeriv:
    gamma = d.gamma - {(X, Y)}
    return SubDeriv("MuAmber", gamma, Mu(X, d.lhs), Mu(Y, d.rhs), (d,), {"binders": [X, Y]})


def approx(gamma, A: Type) -> SubDeriv:
    return SubDeriv("Approx", gamma, A, Later(A))


def glue(d: SubDeriv, lhs: Type, rhs: Type) -> SubDeriv:
    """Adjust the conclusion of d to lhs <= rhs using Reflex steps; the
    new endpoints must be sim-equal to the old ones."""
    if not alpha_eq(d.lhs, lhs):
        d = trans(reflex(d.gamma, lhs, d.lhs), d)
    if not alpha_eq(d.rhs, rhs):
        d = trans(d, reflex(d.gamma, d.rhs, rhs))
    return d


def approx_chain(gamma, A: Type, k: int) -> SubDeriv:
    """gamma |- A <= #^k A."""
    if k == 0:
        return reflex(gamma, A, A)
    d = approx(gamma, A)
    cur = Later(A)
    for _ in range(k - 1):
        d = trans(d, approx(gamma, cur))
        cur = Later(cur)
    return d


# ---------------------------------------------------------------------------
# checker


def _amber_binders(d: SubDeriv) -> Optional[Tuple[str, str]]:
    b = d.side.get("binders")
    if b and len(b) == 2:
        return str(b[0]), str(b[1])
    if len(d.premises) == 1:
        extra = d.premises[0].gamma - d.gamma
        if len(extra) == 1:
            return next(iter(extra))
    if isinstance(d.lhs, Mu) and isinstance(d.rhs, Mu):
        return d.lhs.binder, d.rhs.binder
    return None


def check_subderiv(d: SubDeriv) -> CheckResult:
    res = CheckResult()
    _check(d, (), res)
    return res


def _check(d: SubDeriv, path, res: CheckResult):
    rule = d.rule
    err = lambda msg: res.add(path, rule, msg)  # noqa: E731
    if rule not in RULES:
        err(f"unknown rule {rule!r}")
        return
    if not gamma_ok(d.gamma):
        err("subtyping assumption is not well-formed (a variable occurs twice)")
    arity = {"Assump": 0, "TopR": 0, "Reflex": 0, "Approx": 0, "Trans": 2,
             "LaterMono": 1, "ArrowMono": 2, "MuAmber": 1}[rule]
    if len(d.premises) != arity:
        err(f"expected {arity} premises, got {len(d.premises)}")
        return
    for i, p in enumerate(d.premises):
        _check(p, path + (i,), res)
    A, B = d.lhs, d.rhs
    if rule == "Assump":
        if not (isinstance(A, TVar) and isinstance(B, TVar)):
            err("both sides must be type variables")
        elif (A.name, B.name) not in d.gamma:
            err(f"{A.name} <= {B.name} is not in the assumption")
    elif rule == "TopR":
        if not alpha_eq(B, TOP):
            err("right-hand side must be Top")
    elif rule == "Reflex":
        if not type_eq(A, B, EqMode.SIM):
            err(f"{print_type(A)} and {print_type(B)} are not sim-equal")
    elif rule == "Approx":
        if not alpha_eq(B, Later(A)):
            err("right-hand side must be the later of the left-hand side")
    elif rule == "LaterMono":
        p = d.premises[0]
        if p.gamma != d.gamma:
            err("premise assumption differs from conclusion")
        if not (alpha_eq(A, Later(p.lhs)) and alpha_eq(B, Later(p.rhs))):
            err("conclusion is not the later of the premise")
    elif rule == "Trans":
        p1, p2 = d.premises
        if p1.gamma | p2.gamma != d.gamma:
            err("conclusion assumption is not the union of the premises")
        if not alpha_eq(p1.rhs, p2.lhs):
            err("middle types of the premises differ")
        if not (alpha_eq(A, p1.lhs) and alpha_eq(B, p2.rhs)):
            err("conclusion does not match the premises")
    elif rule == "ArrowMono":
        p1, p2 = d.premises
        if p1.gamma | p2.gamma != d.gamma:
            err("conclusion assumption is not the union of the premises")
        if not (alpha_eq(A, Arrow(p1.rhs, p2.lhs)) and alpha_eq(B, Arrow(p1.lhs, p2.rhs))):
            err("conclusion does not match the premises")
    elif rule == "MuAmber":
        p = d.premises[0]
        xy = _amber_binders(d)
        if xy is None:
            err("cannot determine the bound variables")
            return
        X, Y = xy
        if p.gamma != d.gamma | {(X, Y)}:
            err(f"premise assumption must be the conclusion's plus {X} <= {Y}")
        gv = gamma_vars(d.gamma)
        if X in gv or X in p.rhs.ftv:
            err(f"{X} occurs in the assumption or in the right body")
        if Y in gv or Y in p.lhs.ftv:
            err(f"{Y} occurs in the assumption or in the left body")
        try:
            ml = Mu(X, p.lhs)
            mr = Mu(Y, p.rhs)
        except NotProperError as e:
            err(str(e))
            return
        if not (alpha_eq(A, ml) and alpha_eq(B, mr)):
            err("conclusion does not match the premise")


# ---------------------------------------------------------------------------
# transformations


def _rebuild(d: SubDeriv, gamma, sigma: Dict[str, Type], premises=()) -> SubDeriv:
    """Same rule, substituted conclusion, new premises."""
    A = subst_type(d.lhs, sigma)
    B = subst_type(d.rhs, sigma)
    if d.rule == "Trans":
        return trans(*premises)
    if d.rule == "ArrowMono":
        return arrow_mono(*premises)
    if d.rule == "LaterMono":
        return later_mono(premises[0])
    if d.rule == "Reflex":
        return reflex(gamma, A, B)
    if d.rule == "TopR":
        return top_r(gamma, A)
    if d.rule == "Approx":
        return approx(gamma, A)
    raise ValueError(d.rule)


def _fresh_binders(d: SubDeriv, avoid: set) -> SubDeriv:
    """Rename the bound pair of a MuAmber node away from ``avoid``."""
    X, Y = _amber_binders(d)
    prem = d.premises[0]
    used = set(avoid) | gamma_vars(prem.gamma) | prem.lhs.ftv | prem.rhs.ftv | {X, Y}
    X2 = fresh_name(X, used)
    used.add(X2)
    Y2 = fresh_name(Y, used)
    if X not in avoid and Y not in avoid:
        return d
    return mu_amber(rename(prem, (X, Y), (X2, Y2)), X2, Y2)


def weaken(d: SubDeriv, gamma2) -> SubDeriv:
    gamma2 = frozenset(gamma2)
    if not d.gamma <= gamma2:
        raise ValueError("weakening target must contain the original assumption")
    if not gamma_ok(gamma2):
        raise ValueError("weakening target is not well-formed")
    if d.gamma == gamma2:
        return d
    r = d.rule
    if r == "Assump":
        return assump(gamma2, d.lhs.name, d.rhs.name)
    if r in ("TopR", "Reflex", "Approx"):
        return _rebuild(d, gamma2, {})
    if r in ("Trans", "ArrowMono"):
        return _rebuild(d, gamma2, {}, [weaken(p, gamma2) for p in d.premises])
    if r == "LaterMono":
        return later_mono(weaken(d.premises[0], gamma2))
    d = _fresh_binders(d, gamma_vars(gamma2))
    X, Y = _amber_binders(d)
    return mu_amber(weaken(d.premises[0], gamma2 | {(X, Y)}), X, Y)


def rename(d: SubDeriv, old: Tuple[str, str], new: Tuple[str, str]) -> SubDeriv:
    X, Y = old
    X2, Y2 = new
    if (X, Y) not in d.gamma:
        raise ValueError(f"{X} <= {Y} is not in the assumption")
    rest = d.gamma - {(X, Y)}
    gamma2 = rest | {(X2, Y2)}
    if not gamma_ok(gamma2):
        raise ValueError("renamed assumption is not well-formed")
    if (X, Y) == (X2, Y2):
        return d
    sigma = {X: TVar(X2), Y: TVar(Y2)}
    r = d.rule
    if r == "Assump":
        if (d.lhs.name, d.rhs.name) == (X, Y):
            return assump(gamma2, X2, Y2)
        return assump(gamma2, d.lhs.name, d.rhs.name)
    if r in ("TopR", "Reflex", "Approx"):
        return _rebuild(d, gamma2, sigma)
    if r in ("Trans", "ArrowMono"):
        prem = [rename(weaken(p, d.gamma), old, new) for p in d.premises]
        return _rebuild(d, gamma2, sigma, prem)
    if r == "LaterMono":
        return later_mono(rename(d.premises[0], old, new))
    d = _fresh_binders(d, {X, Y, X2, Y2})
    Z1, Z2 = _amber_binders(d)
    return mu_amber(rename(d.premises[0], old, new), Z1, Z2)


def instantiate(d: SubDeriv, pair: Tuple[str, str], C: Type) -> SubDeriv:
    X, Y = pair
    if (X, Y) not in d.gamma:
        raise ValueError(f"{X} <= {Y} is not in the assumption")
    gamma2 = d.gamma - {(X, Y)}
    sigma = {X: C, Y: C}
    r = d.rule
    if r == "Assump":
        if (d.lhs.name, d.rhs.name) == (X, Y):
            return reflex(gamma2, C, C)
        return assump(gamma2, d.lhs.name, d.rhs.name)
    if r in ("TopR", "Reflex", "Approx"):
        return _rebuild(d, gamma2, sigma)
    if r in ("Trans", "ArrowMono"):
        prem = [instantiate(weaken(p, d.gamma), pair, C) for p in d.premises]
        return _rebuild(d, gamma2, sigma, prem)
    if r == "LaterMono":
        return later_mono(instantiate(d.premises[0], pair, C))
    d = _fresh_binders(d, {X, Y} | C.ftv)
    Z1, Z2 = _amber_binders(d)
    return mu_amber(instantiate(d.premises[0], pair, C), Z1, Z2)


def substitute(d: SubDeriv, pair: Tuple[str, str], dCD: SubDeriv) -> SubDeriv:
    X, Y = pair
    if (X, Y) not in d.gamma:
        raise ValueError(f"{X} <= {Y} is not in the assumption")
    gamma2 = d.gamma - {(X, Y)}
    if dCD.gamma != gamma2:
        dCD = weaken(dCD, gamma2)
    C, D = dCD.lhs, dCD.rhs
    sigma = {X: C, Y: D}
    r = d.rule
    if r == "Assump":
        if (d.lhs.name, d.rhs.name) == (X, Y):
            return dCD
        return assump(gamma2, d.lhs.name, d.rhs.name)
    if r in ("TopR", "Reflex", "Approx"):
        return _rebuild(d, gamma2, sigma)
    if r in ("Trans", "ArrowMono"):
        prem = [substitute(weaken(p, d.gamma), pair, dCD) for p in d.premises]
        return _rebuild(d, gamma2, sigma, prem)
    if r == "LaterMono":
        return later_mono(substitute(d.premises[0], pair, dCD))
    d = _fresh_binders(d, {X, Y} | C.ftv | D.ftv)
    Z1, Z2 = _amber_binders(d)
    inner = weaken(dCD, gamma2 | {(Z1, Z2)})
    return mu_amber(substitute(d.premises[0], pair, inner), Z1, Z2)


def transform_subderiv(d: SubDeriv, action: str, payload) -> SubDeriv:
    """Dispatch for the four admissible-rule transformations.

    payloads: rename -> (old_pair, new_pair); weaken -> gamma';
    instantiate -> (pair, C); substitute -> (pair, derivation of C <= D).
    """
    if action == "rename":
        old, new = payload
        return rename(d, tuple(old), tuple(new))
    if action == "weaken":
        return weaken(d, make_gamma(payload))
    if action == "instantiate":
        pair, C = payload
        return instantiate(d, tuple(pair), as_type(C))
    if action == "substitute":
        pair, dCD = payload
        return substitute(d, tuple(pair), dCD)
    raise ValueError(f"unknown transformation {action!r}")


# ---------------------------------------------------------------------------
# prover


class _Prover:
    def __init__(self, max_k: int, fuel: int, max_depth: int):
        self.max_k = max_k
        self.fuel = Fuel(fuel)
        self.max_depth = max_depth
        self.depth = 0
        self.active = set()
        self.failed: Dict[tuple, int] = {}

    def go(self, gamma: Gamma, A: Type, B: Type) -> Optional[SubDeriv]:
        self.fuel.tick()
        key = (gamma, alpha_key(A), alpha_key(B))
        room = self.max_depth - self.depth
        if key in self.active or room <= 0 or self.failed.get(key, 0) >= room:
            return None
        self.active.add(key)
        self.depth += 1
        try:
            d = self._step(gamma, A, B)
        finally:
            self.active.discard(key)
            self.depth -= 1
        # a failure with some depth left also fails with less
        if d is None:
            self.failed[key] = max(room, self.failed.get(key, 0))
        return d

    def _step(self, gamma, A, B) -> Optional[SubDeriv]:
        if type_eq(A, B, EqMode.SIM):
            return reflex(gamma, A, B)
        if is_top_variant(B):
            d = top_r(gamma, A)
            return d if alpha_eq(B, TOP) else trans(d, reflex(gamma, TOP, B))
        if is_top_variant(A):
            return None
        if isinstance(A, TVar) and isinstance(B, TVar) and (A.name, B.name) in gamma:
            return assump(gamma, A.name, B.name)
        if isinstance(A, Later) and isinstance(B, Later):
            d = self.go(gamma, A.body, B.body)
            if d is not None:
                return later_mono(d)
        if isinstance(B, Later):
            if alpha_eq(A, B.body):
                return approx(gamma, A)
            d = self.go(gamma, A, B.body)
            if d is not None:
                return trans(d, approx(gamma, B.body))
        if isinstance(A, Arrow) and isinstance(B, Arrow):
            d1 = self.go(gamma, B.dom, A.dom)
            if d1 is not None:
                d2 = self.go(gamma, A.cod, B.cod)
                if d2 is not None:
                    return arrow_mono(d1, d2)
        if isinstance(A, Mu) and isinstance(B, Mu):
            d = self._amber(gamma, A, B)
            if d is not None:
                return d
        return self._canonical(gamma, A, B)

    def _amber(self, gamma, A: Mu, B: Mu) -> Optional[SubDeriv]:
        used = gamma_vars(gamma) | A.ftv | B.ftv
        X = fresh_name(A.binder, used)
        Y = fresh_name(B.binder, used | {X})
        bodyA = subst_type(A.body, {A.binder: TVar(X)})
        bodyB = subst_type(B.body, {B.binder: TVar(Y)})
        d = self.go(gamma | {(X, Y)}, bodyA, bodyB)
        if d is None:
            return None
        return mu_amber(d, X, Y)

    def _canonical(self, gamma, A, B) -> Optional[SubDeriv]:
        cA = canon(A, EqMode.SIM)
        cB = canon(B, EqMode.SIM)
        if isinstance(cA, TopC) or isinstance(cB, TopC):
            return None
        if isinstance(cA, VarC) and isinstance(cB, VarC):
            m, n = cA.n, cB.n
            X, Y = cA.name, cB.name
            if m > n:
                return None
            if X == Y:
                d = reflex(gamma, cA.to_type(), cA.to_type())
            elif (X, Y) in gamma:
                d = assump(gamma, X, Y)
                for _ in range(m):
                    d = later_mono(d)
            else:
                return None
            cur = later_n(TVar(Y), m)
            for _ in range(n - m):
                d = trans(d, approx(gamma, cur))
                cur = Later(cur)
            return glue(d, A, B)
        if isinstance(cA, ArrC) and isinstance(cB, ArrC):
            C, D = cA.dom.expand(), cA.cod.expand()
            E, F = cB.dom.expand(), cB.cod.expand()
            for k in range(self.max_k + 1):
                dE = self.go(gamma, E, later_n(C, k))
                if dE is None:
                    continue
                dF = self.go(gamma, later_n(D, k), F)
                if dF is None:
                    continue
                core = arrow_mono(dE, dF)  # #^k C -> #^k D <= E -> F
                if k == 0:
                    return glue(core, A, B)
                arr = Arrow(C, D)
                lift = approx_chain(gamma, arr, k)  # C -> D <= #^k (C -> D)
                d = trans(glue(lift, A, lift.rhs), glue(core, lift.rhs, B))
                return d
        return None


def prove_sub(gamma, A, B, max_k: int = 4, fuel: int = 20000, max_depth: int = 24) -> Union[SubDeriv, Unknown]:
    gamma = make_gamma(gamma)
    A = as_type(A)
    B = as_type(B)
    if not gamma_ok(gamma):
        raise ValueError("subtyping assumption is not well-formed")
    prover = _Prover(max_k, fuel, max_depth)
    try:
        d = prover.go(gamma, A, B)
    except OutOfFuel:
        return Unknown("fuel exhausted")
    if d is None:
        return Unknown("search failed within bounds")
    return d
