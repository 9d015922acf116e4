"""Type expressions, lambda terms, parsing, printing and substitution.

Type expressions are immutable trees built from ``TVar``, ``Later``,
``Arrow`` and ``Mu``.  ``Mu`` checks on construction that its body is
proper in the binder, so every ``Type`` value that escapes this module
is a well-formed type expression.
"""

from __future__ import annotations

import re
from typing import Dict, Iterable, List, Mapping, Optional, Tuple


class ParseError(ValueError):
    """Raised on malformed input.  ``pos`` is a character offset or None."""

    def __init__(self, message: str, pos: Optional[int] = None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)


class NotProperError(ValueError):
    """Raised when a mu body is not proper in its binder."""

    def __init__(self, binder: str, body: "Type"):
        self.binder = binder
        self.body = body
        super().__init__(f"body of mu {binder} is not proper in {binder}: {print_type(body)}")


# ---------------------------------------------------------------------------
# type expressions


class Type:
    __slots__ = ("_hash", "_ftv", "_akey")

    def _init(self):
        self._hash = None
        self._ftv = None
        self._akey = None

    @property
    def ftv(self) -> frozenset:
        if self._ftv is None:
            self._ftv = self._compute_ftv()
        return self._ftv

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Type) or type(self) is not type(other):
            return False
        if hash(self) != hash(other):
            return False
        return self._key() == other._key()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        return f"<{print_type(self)}>"

    def __str__(self):
        return print_type(self)


class TVar(Type):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self._init()
        self.name = name

    def _key(self):
        return ("V", self.name)

    def _compute_ftv(self):
        return frozenset((self.name,))


class Later(Type):
    __slots__ = ("body",)

    def __init__(self, body: Type):
        self._init()
        self.body = body

    def _key(self):
        return ("L", self.body)

    def _compute_ftv(self):
        return self.body.ftv


class Arrow(Type):
    __slots__ = ("dom", "cod")

    def __init__(self, dom: Type, cod: Type):
        self._init()
        self.dom = dom
        self.cod = cod

    def _key(self):
        return ("A", self.dom, self.cod)

    def _compute_ftv(self):
        return self.dom.ftv | self.cod.ftv


class Mu(Type):
    __slots__ = ("binder", "body")

    def __init__(self, binder: str, body: Type, check: bool = True):
        self._init()
        self.binder = binder
        self.body = body
        if check:
            from .measures import is_proper

            if not is_proper(body, binder):
                raise NotProperError(binder, body)

    def _key(self):
        return ("M", self.binder, self.body)

    def _compute_ftv(self):
        return self.body.ftv - {self.binder}


TOP = Mu("X", Later(TVar("X")), check=False)


def later_n(A: Type, n: int) -> Type:
    for _ in range(n):
        A = Later(A)
    return A


def strip_later(A: Type) -> Tuple[int, Type]:
    """Return (n, B) with A = #^n B and B not a Later."""
    n = 0
    while isinstance(A, Later):
        n += 1
        A = A.body
    return n, A


def free_tvars(A: Type) -> frozenset:
    return A.ftv


def all_tvars(A: Type) -> set:
    """Every variable name occurring in A, free or bound."""
    out = set()
    stack = [A]
    while stack:
        t = stack.pop()
        if isinstance(t, TVar):
            out.add(t.name)
        elif isinstance(t, Later):
            stack.append(t.body)
        elif isinstance(t, Arrow):
            stack.append(t.dom)
            stack.append(t.cod)
        else:
            out.add(t.binder)
            stack.append(t.body)
    return out


def type_size(A: Type) -> int:
    if isinstance(A, TVar):
        return 1
    if isinstance(A, Later):
        return 1 + type_size(A.body)
    if isinstance(A, Arrow):
        return 1 + type_size(A.dom) + type_size(A.cod)
    return 1 + type_size(A.body)


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    name = base
    while name in avoid:
        name += "'"
    return name


def alpha_key(A: Type):
    """A hashable key that identifies A up to renaming of bound variables."""
    if A._akey is None:
        A._akey = _akey(A, ())
    return A._akey


def _akey(A: Type, env: tuple):
    if isinstance(A, TVar):
        for i, n in enumerate(env):
            if n == A.name:
                return i
        return A.name
    if isinstance(A, Later):
        return ("L", _akey(A.body, env))
    if isinstance(A, Arrow):
        return ("A", _akey(A.dom, env), _akey(A.cod, env))
    return ("M", _akey(A.body, (A.binder,) + env))


def alpha_eq(A: Type, B: Type) -> bool:
    if A is B:
        return True
    return alpha_key(A) == alpha_key(B)


def subst_type(A: Type, pairs) -> Type:
    """Simultaneous capture-avoiding substitution.

    ``pairs`` is a mapping or a sequence of (name, Type) pairs.
    """
    m = dict(pairs)
    m = {k: v for k, v in m.items() if k in A.ftv}
    if not m:
        return A
    return _subst(A, m)


def _subst(A: Type, m: Dict[str, Type]) -> Type:
    if isinstance(A, TVar):
        return m.get(A.name, A)
    if isinstance(A, Later):
        body = _subst(A.body, m)
        return A if body is A.body else Later(body)
    if isinstance(A, Arrow):
        d = _subst(A.dom, m)
        c = _subst(A.cod, m)
        if d is A.dom and c is A.cod:
            return A
        return Arrow(d, c)
    m2 = {k: v for k, v in m.items() if k != A.binder and k in A.body.ftv}
    if not m2:
        return A
    rng = set()
    for v in m2.values():
        rng |= v.ftv
    binder = A.binder
    if binder in rng:
        new = fresh_name(binder, rng | A.body.ftv | set(m2))
        m2[binder] = TVar(new)
        binder = new
    return Mu(binder, _subst(A.body, m2), check=False)


def unfold(A: Mu) -> Type:
    return subst_type(A.body, {A.binder: A})


def rename_bound_away(A: Type, avoid: Iterable[str]) -> Type:
    """Alpha-rename every binder of A so none of them is in ``avoid``."""
    avoid = set(avoid) | A.ftv
    return _rename(A, avoid, {})


def _rename(A, avoid, env):
    if isinstance(A, TVar):
        return TVar(env.get(A.name, A.name))
    if isinstance(A, Later):
        return Later(_rename(A.body, avoid, env))
    if isinstance(A, Arrow):
        return Arrow(_rename(A.dom, avoid, env), _rename(A.cod, avoid, env))
    b = A.binder
    if b in avoid:
        b = fresh_name(b, avoid)
    avoid.add(b)
    env2 = dict(env)
    env2[A.binder] = b
    return Mu(b, _rename(A.body, avoid, env2), check=False)


# ---------------------------------------------------------------------------
# lambda terms


class Term:
    __slots__ = ("_hash", "_fv")

    def _init(self):
        self._hash = None
        self._fv = None

    @property
    def fv(self) -> frozenset:
        if self._fv is None:
            self._fv = self._compute_fv()
        return self._fv

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Term) or type(self) is not type(other):
            return False
        return hash(self) == hash(other) and self._key() == other._key()

    def __repr__(self):
        return f"<{print_term(self)}>"

    def __str__(self):
        return print_term(self)


class Var(Term):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self._init()
        self.name = name

    def _key(self):
        return ("v", self.name)

    def _compute_fv(self):
        return frozenset((self.name,))


class Lam(Term):
    __slots__ = ("binder", "body")

    def __init__(self, binder: str, body: Term):
        self._init()
        self.binder = binder
        self.body = body

    def _key(self):
        return ("l", self.binder, self.body)

    def _compute_fv(self):
        return self.body.fv - {self.binder}


class App(Term):
    __slots__ = ("fun", "arg")

    def __init__(self, fun: Term, arg: Term):
        self._init()
        self.fun = fun
        self.arg = arg

    def _key(self):
        return ("a", self.fun, self.arg)

    def _compute_fv(self):
        return self.fun.fv | self.arg.fv


def free_vars(M: Term) -> frozenset:
    return M.fv


def term_key(M: Term, env: tuple = ()):
    """De Bruijn style key: equal keys iff alpha-equivalent terms."""
    # iterative on application spines to keep recursion shallow
    if isinstance(M, Var):
        for i, n in enumerate(env):
            if n == M.name:
                return i
        return M.name
    if isinstance(M, Lam):
        return ("l", term_key(M.body, (M.binder,) + env))
    return ("a", term_key(M.fun, env), term_key(M.arg, env))


def term_alpha_eq(M: Term, N: Term) -> bool:
    return M is N or term_key(M) == term_key(N)


def subst_term(M: Term, x: str, N: Term) -> Term:
    """Capture-avoiding M[N/x]."""
    if x not in M.fv:
        return M
    return _tsubst(M, x, N, N.fv)


def _tsubst(M, x, N, nfv):
    if isinstance(M, Var):
        return N if M.name == x else M
    if isinstance(M, App):
        f = _tsubst(M.fun, x, N, nfv) if x in M.fun.fv else M.fun
        a = _tsubst(M.arg, x, N, nfv) if x in M.arg.fv else M.arg
        return App(f, a)
    if M.binder == x or x not in M.fv:
        return M
    b = M.binder
    body = M.body
    if b in nfv:
        nb = fresh_name(b, nfv | body.fv | {x})
        body = _tsubst(body, b, Var(nb), frozenset((nb,)))
        b = nb
    return Lam(b, _tsubst(body, x, N, nfv))


def rename_free(M: Term, mapping: Mapping[str, str]) -> Term:
    """Simultaneous renaming of free variables (mapping must be injective)."""
    m = {k: v for k, v in mapping.items() if k in M.fv and k != v}
    if not m:
        return M
    return _rename_free(M, m)


def _rename_free(M, m):
    if isinstance(M, Var):
        return Var(m[M.name]) if M.name in m else M
    if isinstance(M, App):
        return App(rename_free(M.fun, m), rename_free(M.arg, m))
    m2 = {k: v for k, v in m.items() if k != M.binder and k in M.body.fv}
    if not m2:
        return M
    b = M.binder
    body = M.body
    targets = set(m2.values())
    if b in targets:
        nb = fresh_name(b, targets | body.fv | set(m2))
        body = _tsubst(body, b, Var(nb), frozenset((nb,)))
        b = nb
    return Lam(b, _rename_free(body, m2))


def apps(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


# ---------------------------------------------------------------------------
# closures


class TypeClosure:
    """A subexpression of a root type paired with bindings for its free
    mu-bound variables.  The environment only keeps variables that are
    free in the skeleton, so structurally equal closures are equal."""

    __slots__ = ("skeleton", "env", "_hash", "_exp")

    def __init__(self, skeleton: Type, env: Tuple[Tuple[str, "TypeClosure"], ...] = ()):
        self.skeleton = skeleton
        self.env = env
        self._hash = None
        self._exp = None

    @staticmethod
    def make(skeleton: Type, env: Mapping[str, "TypeClosure"]) -> "TypeClosure":
        fv = skeleton.ftv
        items = tuple(sorted((k, v) for k, v in env.items() if k in fv))
        return TypeClosure(skeleton, items)

    def lookup(self, name: str) -> Optional["TypeClosure"]:
        for k, v in self.env:
            if k == name:
                return v
        return None

    def env_dict(self) -> Dict[str, "TypeClosure"]:
        return dict(self.env)

    def expand(self) -> Type:
        if self._exp is None:
            if not self.env:
                self._exp = self.skeleton
            else:
                self._exp = subst_type(self.skeleton, {k: v.expand() for k, v in self.env})
        return self._exp

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.skeleton, self.env))
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        return (
            isinstance(other, TypeClosure)
            and hash(self) == hash(other)
            and self.skeleton == other.skeleton
            and self.env == other.env
        )

    def __repr__(self):
        return f"TypeClosure({print_type(self.skeleton)}, {dict(self.env)!r})"


def closure(A: Type) -> TypeClosure:
    return TypeClosure(A, ())


# ---------------------------------------------------------------------------
# printing


def print_type(A: Type, unicode: bool = False) -> str:
    out: List[str] = []
    _pt(A, 0, out, unicode)
    return "".join(out)


# contexts: 0 = top (mu may extend right), 1 = left of arrow, 2 = under a prefix
def _pt(A, ctx, out, uni):
    if isinstance(A, TVar):
        out.append(A.name)
    elif isinstance(A, Mu):
        if _is_top_literal(A):
            out.append("⊤" if uni else "Top")
            return
        if ctx > 0:
            out.append("(")
        out.append(("μ" if uni else "mu ") + A.binder + ". ")
        _pt(A.body, 0, out, uni)
        if ctx > 0:
            out.append(")")
    elif isinstance(A, Later):
        out.append("•" if uni else "#")
        _pt(A.body, 2, out, uni)
    else:
        if ctx > 0:
            out.append("(")
        _pt(A.dom, 1, out, uni)
        out.append(" → " if uni else " -> ")
        _pt(A.cod, 0, out, uni)
        if ctx > 0:
            out.append(")")


def _is_top_literal(A: Mu) -> bool:
    b = A.body
    return isinstance(b, Later) and isinstance(b.body, TVar) and b.body.name == A.binder


def print_term(M: Term, unicode: bool = False) -> str:
    out: List[str] = []
    _pm(M, 0, out, unicode)
    return "".join(out)


# contexts: 0 = anywhere, 1 = function position, 2 = argument position
def _pm(M, ctx, out, uni):
    if isinstance(M, Var):
        out.append(M.name)
    elif isinstance(M, Lam):
        if ctx > 0:
            out.append("(")
        out.append(("λ" if uni else "\\") + M.binder + ".")
        _pm(M.body, 0, out, uni)
        if ctx > 0:
            out.append(")")
    else:
        if ctx == 2:
            out.append("(")
        _pm(M.fun, 1, out, uni)
        out.append(" ")
        _pm(M.arg, 2, out, uni)
        if ctx == 2:
            out.append(")")


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"""\s*(?:
      (?P<arrow>->|→)
    | (?P<later>\#|•)
    | (?P<lp>\()
    | (?P<rp>\))
    | (?P<dot>\.)
    | (?P<lam>\\|λ)
    | (?P<mu>μ)
    | (?P<top>⊤)
    | (?P<ident>[A-Za-z][A-Za-z0-9_']*)
    )""",
    re.VERBOSE,
)

KEYWORDS = {"mu", "Top", "lam"}


def _tokenize(text: str) -> List[Tuple[str, str, int]]:
    toks = []
    i = 0
    n = len(text)
    while True:
        while i < n and text[i].isspace():
            i += 1
        if i >= n:
            break
        m = _TOKEN.match(text, i)
        if not m or m.end() == i:
            raise ParseError(f"unexpected character {text[i]!r}", i)
        kind = m.lastgroup
        val = m.group(kind)
        start = m.start(kind)
        if kind == "ident":
            if val == "mu":
                kind = "mu"
            elif val == "Top":
                kind = "top"
            elif val == "lam":
                kind = "lam"
        toks.append((kind, val, start))
        i = m.end()
    toks.append(("eof", "", n))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind: str, what: str):
        t = self.next()
        if t[0] != kind:
            got = "end of input" if t[0] == "eof" else repr(t[1])
            raise ParseError(f"expected {what}, got {got}", t[2])
        return t

    def done(self):
        t = self.peek()
        if t[0] != "eof":
            raise ParseError(f"unexpected {t[1]!r}", t[2])

    # types; mu nodes are built unchecked and validated afterwards
    def arrow(self):
        left = self.prefix()
        if self.peek()[0] == "arrow":
            self.next()
            return Arrow(left, self.arrow())
        return left

    def prefix(self):
        n = 0
        while self.peek()[0] == "later":
            self.next()
            n += 1
        return later_n(self.atom(), n)

    def atom(self):
        t = self.next()
        kind = t[0]
        if kind == "top":
            return TOP
        if kind == "ident":
            return TVar(t[1])
        if kind == "mu":
            name = self.expect("ident", "identifier after mu")[1]
            self.expect("dot", "'.'")
            return Mu(name, self.arrow(), check=False)
        if kind == "lp":
            a = self.arrow()
            self.expect("rp", "')'")
            return a
        got = "end of input" if kind == "eof" else repr(t[1])
        raise ParseError(f"expected a type, got {got}", t[2])

    # terms
    def term(self):
        if self.peek()[0] == "lam":
            self.next()
            name = self.expect("ident", "identifier after lambda")[1]
            self.expect("dot", "'.'")
            return Lam(name, self.term())
        head = self.tatom()
        while self.peek()[0] in ("ident", "lp", "lam"):
            if self.peek()[0] == "lam":
                # a trailing abstraction extends to the right
                head = App(head, self.term())
                break
            head = App(head, self.tatom())
        return head

    def tatom(self):
        t = self.next()
        if t[0] == "ident":
            return Var(t[1])
        if t[0] == "lp":
            m = self.term()
            self.expect("rp", "')'")
            return m
        got = "end of input" if t[0] == "eof" else repr(t[1])
        raise ParseError(f"expected a term, got {got}", t[2])


def _validate(A: Type) -> Type:
    """Rebuild A bottom-up with properness checks on every mu."""
    if isinstance(A, TVar):
        return A
    if isinstance(A, Later):
        return Later(_validate(A.body))
    if isinstance(A, Arrow):
        return Arrow(_validate(A.dom), _validate(A.cod))
    if A is TOP:
        return A
    return Mu(A.binder, _validate(A.body))


def parse_type(text: str) -> Type:
    p = _Parser(text)
    a = p.arrow()
    p.done()
    return _validate(a)


def parse_term(text: str) -> Term:
    p = _Parser(text)
    m = p.term()
    p.done()
    return m


def as_type(x) -> Type:
    return parse_type(x) if isinstance(x, str) else x


def as_term(x) -> Term:
    return parse_term(x) if isinstance(x, str) else x
