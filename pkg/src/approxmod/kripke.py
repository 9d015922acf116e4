"""Finite Kripke frames with a well-founded relation (|>) for the later
modality and a preorder (R) for implication, frame-class validators and a
model checker for types read as formulas."""

from __future__ import annotations

import enum
import itertools
import random
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Tuple

from .equality import cl_is_top
from .syntax import Arrow, Later, TVar, Type, TypeClosure, as_type, closure


class FrameClass(str, enum.Enum):
    WF = "wf"
    LAMBDA_A = "lambdaa"
    IWF = "iwf"
    IK4 = "ik4"
    IGL = "igl"
    IGLC = "iglc"
    LA = "la"


def as_frame_class(c) -> FrameClass:
    if isinstance(c, FrameClass):
        return c
    key = str(c).lower().replace("_", "").replace("-", "")
    aliases = {"lambda": FrameClass.LAMBDA_A, "la_frame": FrameClass.LA}
    if key in aliases:
        return aliases[key]
    try:
        return FrameClass(key)
    except ValueError:
        raise ValueError(f"unknown frame class {c!r}") from None


def _rt_closure(n: int, rel: Iterable[Tuple[int, int]]) -> FrozenSet[Tuple[int, int]]:
    reach = [1 << i for i in range(n)]
    for i, j in rel:
        reach[i] |= 1 << j
    changed = True
    while changed:
        changed = False
        for i in range(n):
            m = reach[i]
            acc = m
            for j in range(n):
                if m >> j & 1:
                    acc |= reach[j]
            if acc != m:
                reach[i] = acc
                changed = True
    return frozenset((i, j) for i in range(n) for j in range(n) if reach[i] >> j & 1)


class Frame:
    """Worlds are indexed 0..n-1; ``names`` gives their printed names."""

    def __init__(self, names: Sequence[str], wf: Iterable[Tuple[int, int]], pre: Optional[Iterable[Tuple[int, int]]] = None):
        self.names = tuple(str(x) for x in names)
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate world names")
        if not self.names:
            raise ValueError("a frame needs at least one world")
        n = len(self.names)
        self.wf = frozenset((int(a), int(b)) for a, b in wf)
        if pre is None:
            # single-relation frame: implication looks along |>*
            self.single = True
            self.pre = _rt_closure(n, self.wf)
        else:
            self.single = False
            self.pre = frozenset((int(a), int(b)) for a, b in pre)
        for a, b in self.wf | self.pre:
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError("relation mentions an unknown world")
        self.wf_succ = [0] * n
        self.pre_succ = [0] * n
        for a, b in self.wf:
            self.wf_succ[a] |= 1 << b
        for a, b in self.pre:
            self.pre_succ[a] |= 1 << b

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def full(self) -> int:
        return (1 << self.size) - 1

    def index(self, w) -> int:
        if isinstance(w, int) and not isinstance(w, bool) and 0 <= w < self.size and str(w) not in self.names:
            return w
        try:
            return self.names.index(str(w))
        except ValueError:
            raise KeyError(f"unknown world {w!r}") from None

    def key(self):
        return (self.size, tuple(sorted(self.wf)), tuple(sorted(self.pre)))

    def __eq__(self, other):
        return isinstance(other, Frame) and self.key() == other.key() and self.names == other.names

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Frame({self.names}, wf={sorted(self.wf)}, pre={sorted(self.pre)})"

    def to_json(self, val: Optional["Valuation"] = None) -> dict:
        nm = self.names
        out = {
            "worlds": list(nm),
            "wf": [[nm[a], nm[b]] for a, b in sorted(self.wf)],
            "pre": [[nm[a], nm[b]] for a, b in sorted(self.pre)],
        }
        if val is not None:
            out["val"] = {x: [nm[w] for w in sorted(ws)] for x, ws in sorted(val.items())}
        return out

    @staticmethod
    def from_json(obj: dict) -> Tuple["Frame", "Valuation"]:
        names = [str(w) for w in obj["worlds"]]
        idx = {w: i for i, w in enumerate(names)}

        def rel(key):
            return [(idx[str(a)], idx[str(b)]) for a, b in obj.get(key, [])]

        pre = rel("pre") if "pre" in obj else None
        f = Frame(names, rel("wf"), pre)
        val = {x: frozenset(idx[str(w)] for w in ws) for x, ws in (obj.get("val") or {}).items()}
        return f, val


Valuation = Dict[str, FrozenSet[int]]


def chain_frame(n: int) -> Frame:
    """Worlds 0..n-1 with p |> q iff p > q and R = >=."""
    wf = [(p, q) for p in range(n) for q in range(n) if p > q]
    pre = [(p, q) for p in range(n) for q in range(n) if p >= q]
    return Frame([str(i) for i in range(n)], wf, pre)


# ---------------------------------------------------------------------------
# validation


def _acyclic(f: Frame) -> bool:
    n = f.size
    state = [0] * n

    def visit(i):
        state[i] = 1
        m = f.wf_succ[i]
        for j in range(n):
            if m >> j & 1:
                if state[j] == 1:
                    return False
                if state[j] == 0 and not visit(j):
                    return False
        state[i] = 2
        return True

    return all(state[i] or visit(i) for i in range(n))


def frame_violations(f: Frame, cls) -> List[str]:
    """All violated conditions for the class (empty when valid)."""
    cls = as_frame_class(cls)
    n = f.size
    nm = f.names
    out: List[str] = []
    W, R = f.wf_succ, f.pre_succ
    if cls is not FrameClass.IK4 and not _acyclic(f):
        out.append("cond 1: |> has a cycle")
    if cls in (FrameClass.WF, FrameClass.LAMBDA_A):
        if cls is FrameClass.LAMBDA_A:
            star = [0] * n
            for a, b in _rt_closure(n, f.wf):
                star[a] |= 1 << b
            for p in range(n):
                for q in range(n):
                    if not W[p] >> q & 1:
                        continue
                    ok = any(
                        star[p] >> r & 1 and W[r] >> q & 1 and W[r] & ~star[q] == 0
                        for r in range(n)
                    )
                    if not ok:
                        out.append(f"cond 2: no local witness for {nm[p]} |> {nm[q]}")
        return out
    for p in range(n):
        if not R[p] >> p & 1:
            out.append(f"cond 2: R is not reflexive at {nm[p]}")
    for p in range(n):
        for q in range(n):
            if R[p] >> q & 1 and R[q] & ~R[p]:
                out.append(f"cond 2: R is not transitive at {nm[p]} R {nm[q]}")
            if R[p] >> q & 1 and W[q] & ~W[p]:
                out.append(f"cond 3: {nm[p]} R {nm[q]} |> r but not {nm[p]} |> r")
    if cls in (FrameClass.IK4, FrameClass.IGL, FrameClass.IGLC):
        for p in range(n):
            for q in range(n):
                if W[p] >> q & 1 and W[q] & ~W[p]:
                    out.append(f"cond 4: |> is not transitive at {nm[p]} |> {nm[q]}")
    if cls in (FrameClass.LA, FrameClass.IGLC):
        for p in range(n):
            if W[p] & ~R[p]:
                out.append(f"cond 5: |> is not included in R at {nm[p]}")
    if cls is FrameClass.LA:
        for p in range(n):
            for q in range(n):
                if not W[p] >> q & 1:
                    continue
                for q2 in range(n):
                    if not R[q] >> q2 & 1:
                        continue
                    ok = any(
                        R[p] >> r & 1 and W[r] >> q2 & 1 and W[r] & ~R[q2] == 0
                        for r in range(n)
                    )
                    if not ok:
                        out.append(f"cond 6: no witness for {nm[p]} |> {nm[q]} R {nm[q2]}")
    return out


def validate_frame(f: Frame, cls) -> bool:
    return not frame_violations(f, cls)


# ---------------------------------------------------------------------------
# valuations


def is_hereditary(f: Frame, val: Mapping[str, Iterable[int]]) -> bool:
    for ws in val.values():
        m = _mask(ws)
        for p in range(f.size):
            if m >> p & 1 and f.pre_succ[p] & ~m:
                return False
    return True


def hereditary_closure(f: Frame, val: Mapping[str, Iterable]) -> Valuation:
    out = {}
    for x, ws in val.items():
        m = 0
        for w in ws:
            m |= f.pre_succ[f.index(w)]
        out[x] = _unmask(m)
    return out


def _mask(ws: Iterable[int]) -> int:
    m = 0
    for w in ws:
        m |= 1 << w
    return m


def _unmask(m: int) -> FrozenSet[int]:
    return frozenset(i for i in range(m.bit_length()) if m >> i & 1)


def up_sets(f: Frame) -> List[int]:
    """All R-closed world sets, as bitmasks."""
    out = []
    for m in range(1 << f.size):
        if all(not (m >> p & 1) or f.pre_succ[p] & ~m == 0 for p in range(f.size)):
            out.append(m)
    return out


# ---------------------------------------------------------------------------
# model checking


class Evaluator:
    """Truth of closures at worlds, memoized on (world, closure)."""

    def __init__(self, f: Frame, val: Mapping[str, Iterable[int]]):
        if not is_hereditary(f, val):
            raise ValueError("valuation is not hereditary")
        self.f = f
        self.val = {x: _mask(ws) for x, ws in val.items()}
        self.memo: Dict[Tuple[int, TypeClosure], bool] = {}
        self.active = set()

    def holds(self, p: int, c: TypeClosure) -> bool:
        key = (p, c)
        r = self.memo.get(key)
        if r is not None:
            return r
        if key in self.active:
            raise ValueError("evaluation does not terminate on this frame (|> has a cycle)")
        self.active.add(key)
        try:
            r = self._eval(p, c)
        finally:
            self.active.discard(key)
        self.memo[key] = r
        return r

    def _eval(self, p: int, c: TypeClosure) -> bool:
        if cl_is_top(c):
            return True
        s = c.skeleton
        f = self.f
        if isinstance(s, TVar):
            target = c.lookup(s.name)
            if target is not None:
                return self.holds(p, target)
            return bool(self.val.get(s.name, 0) >> p & 1)
        env = c.env_dict()
        if isinstance(s, Later):
            body = TypeClosure.make(s.body, env)
            m = f.wf_succ[p]
            return all(self.holds(q, body) for q in range(f.size) if m >> q & 1)
        if isinstance(s, Arrow):
            a = TypeClosure.make(s.dom, env)
            b = TypeClosure.make(s.cod, env)
            m = f.pre_succ[p]
            return all(not self.holds(q, a) or self.holds(q, b) for q in range(f.size) if m >> q & 1)
        env[s.binder] = c
        return self.holds(p, TypeClosure.make(s.body, env))

    def truth_mask(self, A: Type) -> int:
        c = closure(A)
        m = 0
        for p in range(self.f.size):
            if self.holds(p, c):
                m |= 1 << p
        return m


def model_check(f: Frame, val: Mapping[str, Iterable[int]], p, A) -> bool:
    return Evaluator(f, val).holds(f.index(p), closure(as_type(A)))


def truth_set(f: Frame, val: Mapping[str, Iterable[int]], A) -> FrozenSet[int]:
    """Worlds where A holds.  Mu-free types take a bitmask fast path."""
    A = as_type(A)
    if _mu_free(A):
        vm = {x: _mask(ws) for x, ws in val.items()}
        if not is_hereditary(f, val):
            raise ValueError("valuation is not hereditary")
        return _unmask(_fast_mask(f, vm, A))
    return _unmask(Evaluator(f, val).truth_mask(A))


def _mu_free(A: Type) -> bool:
    if isinstance(A, TVar):
        return True
    if isinstance(A, Later):
        return _mu_free(A.body)
    if isinstance(A, Arrow):
        return _mu_free(A.dom) and _mu_free(A.cod)
    return False


def _fast_mask(f: Frame, vm: Mapping[str, int], A: Type) -> int:
    if isinstance(A, TVar):
        return vm.get(A.name, 0)
    if isinstance(A, Later):
        s = _fast_mask(f, vm, A.body)
        return _mask(p for p in range(f.size) if f.wf_succ[p] & ~s == 0)
    a = _fast_mask(f, vm, A.dom)
    b = _fast_mask(f, vm, A.cod)
    return _mask(p for p in range(f.size) if f.pre_succ[p] & a & ~b == 0)


def sequent_holds(f: Frame, val, p, gamma: Iterable[Type], B) -> bool:
    ev = Evaluator(f, val)
    p = f.index(p)
    if all(ev.holds(p, closure(as_type(A))) for A in gamma):
        return ev.holds(p, closure(as_type(B)))
    return True


# ---------------------------------------------------------------------------
# random generation


def _close(n: int, wf: set, pre: set, cls: FrameClass) -> Tuple[set, set]:
    """Saturate the relations under the closure conditions of the class."""
    while True:
        old = (len(wf), len(pre))
        if cls is FrameClass.LA or cls is FrameClass.IGLC:
            pre |= wf
        pre = set(_rt_closure(n, pre))
        if cls in (FrameClass.IK4, FrameClass.IGL, FrameClass.IGLC):
            wf = _trans_closure(n, wf)
        wf |= {(p, r) for p, q in pre for q2, r in wf if q == q2}
        if (len(wf), len(pre)) == old:
            return wf, pre


def _trans_closure(n: int, rel: set) -> set:
    rel = set(rel)
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            for c, d in list(rel):
                if b == c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    return rel


def random_frame(cls, size: int, seed=None, density: float = 0.4, attempts: int = 200) -> Frame:
    """A random frame of the class with ``size`` worlds.  Deterministic
    for a fixed seed."""
    cls = as_frame_class(cls)
    if size < 1:
        raise ValueError("size must be positive")
    rng = random.Random(seed)
    names = [f"w{i}" for i in range(size)]
    for _ in range(attempts):
        wf = {(i, j) for i in range(size) for j in range(i + 1, size) if rng.random() < density}
        if cls is FrameClass.IK4 and size > 1 and rng.random() < 0.2:
            wf.add((size - 1, 0))
        if cls in (FrameClass.WF, FrameClass.LAMBDA_A):
            f = Frame(names, wf)
        else:
            pre = {(i, j) for i in range(size) for j in range(size) if i != j and rng.random() < density / 2}
            wf2, pre2 = _close(size, wf, pre, cls)
            f = Frame(names, wf2, pre2)
        if validate_frame(f, cls):
            return f
    # fall back to a chain, which belongs to every class
    f = chain_frame(size)
    if cls in (FrameClass.WF, FrameClass.LAMBDA_A):
        f = Frame(names, f.wf)
    return Frame(names, f.wf, None if f.single else f.pre)


def random_valuation(f: Frame, vars: Iterable[str], seed=None, density: float = 0.4) -> Valuation:
    rng = random.Random(seed)
    raw = {x: [p for p in range(f.size) if rng.random() < density] for x in sorted(vars)}
    return hereditary_closure(f, raw)


# ---------------------------------------------------------------------------
# exhaustive enumeration


def _preorders(n: int):
    """All preorders on range(n) as successor bitmask lists."""
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
    seen = set()
    for bits in range(1 << len(pairs)):
        rel = {(i, i) for i in range(n)}
        for k, pr in enumerate(pairs):
            if bits >> k & 1:
                rel.add(pr)
        if _trans_closure(n, rel) != rel:
            continue
        key = frozenset(rel)
        if key not in seen:
            seen.add(key)
            yield key


_PREORDER_CACHE: Dict[int, List[FrozenSet]] = {}


def preorders(n: int) -> List[FrozenSet]:
    if n not in _PREORDER_CACHE:
        _PREORDER_CACHE[n] = list(_preorders(n))
    return _PREORDER_CACHE[n]


def enumerate_frames(cls, size: int):
    """Every frame of the class on ``size`` worlds, up to the choice of a
    topological order for |> (edges only go from lower to higher index).
    Frames with a cyclic |> are only produced for IK4."""
    cls = as_frame_class(cls)
    names = [f"w{i}" for i in range(size)]
    if cls is FrameClass.IK4:
        wf_pairs = [(i, j) for i in range(size) for j in range(size)]
    else:
        wf_pairs = [(i, j) for i in range(size) for j in range(i + 1, size)]
    for bits in range(1 << len(wf_pairs)):
        wf = [wf_pairs[k] for k in range(len(wf_pairs)) if bits >> k & 1]
        if cls in (FrameClass.WF, FrameClass.LAMBDA_A):
            f = Frame(names, wf)
            if validate_frame(f, cls):
                yield f
            continue
        wfs = set(wf)
        if cls in (FrameClass.IK4, FrameClass.IGL, FrameClass.IGLC) and _trans_closure(size, wfs) != wfs:
            continue
        for pre in preorders(size):
            if cls in (FrameClass.LA, FrameClass.IGLC) and not wfs <= pre:
                continue
            f = Frame(names, wf, pre)
            if validate_frame(f, cls):
                yield f


# ---------------------------------------------------------------------------
# rooted frames up to isomorphism
#
# Truth at a world only depends on the worlds it can reach, and every class
# here is closed under taking such generated subframes, so countermodel
# search only needs rooted frames.  Each rooted frame on n+1 worlds arises
# from one on n worlds by adding a world that is maximal for reachability,
# which is how the levels below are grown.


def _bits(m: int) -> List[int]:
    return [i for i in range(m.bit_length()) if m >> i & 1]


def _relabel(W, R, perm):
    n = len(W)
    w2, r2 = [0] * n, [0] * n
    for p in range(n):
        a = b = 0
        for q in _bits(W[p]):
            a |= 1 << perm[q]
        for q in _bits(R[p]):
            b |= 1 << perm[q]
        w2[perm[p]], r2[perm[p]] = a, b
    return tuple(w2), tuple(r2)


def _canon_key(W, R):
    """Smallest relabelling of (W, R), trying only permutations that keep
    worlds with the same refined degree signature together."""
    n = len(W)
    Win = [sum(1 << p for p in range(n) if W[p] >> q & 1) for q in range(n)]
    Rin = [sum(1 << p for p in range(n) if R[p] >> q & 1) for q in range(n)]
    sig = [(bin(W[p]).count("1"), bin(Win[p]).count("1"), bin(R[p]).count("1"), bin(Rin[p]).count("1")) for p in range(n)]
    for _ in range(2):
        sig = [
            (sig[p],) + tuple(tuple(sorted(sig[q] for q in _bits(m[p]))) for m in (W, Win, R, Rin))
            for p in range(n)
        ]
    order = sorted(set(sig))
    groups = [[p for p in range(n) if sig[p] == s] for s in order]
    best = None
    for choice in itertools.product(*(itertools.permutations(g) for g in groups)):
        perm = [0] * n
        k = 0
        for g in choice:
            for p in g:
                perm[p] = k
                k += 1
        key = _relabel(W, R, perm)
        if best is None or key < best:
            best = key
    return best


def _downsets(n: int, rel: Sequence[int]) -> List[int]:
    """Sets closed under rel-predecessors: q rel p and p in S give q in S."""
    return [S for S in range(1 << n) if all(not S >> p & 1 or all(S >> q & 1 for q in range(n) if rel[q] >> p & 1) for p in range(n))]


def _extensions(cls: FrameClass, W, R):
    n = len(W)
    new = 1 << n
    single = cls in (FrameClass.WF, FrameClass.LAMBDA_A)
    if single:
        for T in range(1, new):
            yield [W[p] | (new if T >> p & 1 else 0) for p in range(n)] + [0], None
        return
    reach = [W[p] | R[p] for p in range(n)]
    changed = True
    while changed:
        changed = False
        for p in range(n):
            m = reach[p]
            for q in _bits(m):
                m |= reach[q]
            if m != reach[p]:
                reach[p], changed = m, True
    maximal = 0
    for c in range(n):
        if all(reach[d] >> c & 1 for d in _bits(reach[c])):
            maximal |= 1 << c
    r_down = _downsets(n, R)
    w_ok = r_down
    if cls in (FrameClass.IK4, FrameClass.IGL, FrameClass.IGLC):
        w_closed = set(_downsets(n, W))
        w_ok = [T for T in w_ok if T in w_closed]
    for S in r_down:
        for T in w_ok:
            if not (S | T):
                continue
            if cls in (FrameClass.LA, FrameClass.IGLC) and T & ~S:
                continue
            for V in range(1 << n):
                if V & ~(maximal & S):
                    continue
                outs = [0]
                if cls is FrameClass.IK4:
                    # cycles are allowed here, including a loop on the new world
                    outs = [U | loop for U in range(1 << n) if not U & ~maximal for loop in (0, new)]
                for U in outs:
                    W2 = [W[p] | (new if T >> p & 1 else 0) for p in range(n)] + [U]
                    R2 = [R[p] | (new if S >> p & 1 else 0) for p in range(n)] + [new | V]
                    yield W2, R2


def _frame(W, R) -> Frame:
    n = len(W)
    wf = [(p, q) for p in range(n) for q in _bits(W[p])]
    pre = None if R is None else [(p, q) for p in range(n) for q in _bits(R[p])]
    return Frame([f"w{i}" for i in range(n)], wf, pre)


_ROOTED_CACHE: Dict[Tuple[FrameClass, int], List[Tuple[tuple, tuple]]] = {}


def _rooted_level(cls: FrameClass, n: int):
    key = (cls, n)
    if key in _ROOTED_CACHE:
        return _ROOTED_CACHE[key]
    if n == 1:
        loop = cls is FrameClass.IK4
        raw = [((0,), (1,))] + ([((1,), (1,))] if loop else [])
    else:
        raw = []
        for W, R in _rooted_level(cls, n - 1):
            for W2, R2 in _extensions(cls, W, R):
                f = _frame(W2, R2)
                if validate_frame(f, cls):
                    raw.append((tuple(f.wf_succ), tuple(f.pre_succ)))
    level = sorted({_canon_key(W, R) for W, R in raw})
    _ROOTED_CACHE[key] = level
    return level


def rooted_frames(cls, size: int):
    """Frames of the class on ``size`` worlds in which some world reaches
    every other one, one per isomorphism class, in a fixed order."""
    cls = as_frame_class(cls)
    if size < 1:
        return
    single = cls in (FrameClass.WF, FrameClass.LAMBDA_A)
    for W, R in _rooted_level(cls, size):
        yield _frame(W, None if single else R)
