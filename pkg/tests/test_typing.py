import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from approxmod import kripke as kp
from approxmod import subtyping as sb
from approxmod import typing as ty
from approxmod.gen import derivation_corpus, random_derivation
from approxmod.lam import leftmost_redex_path, redex_paths, step_at
from approxmod.logic import erase
from approxmod.syntax import TOP, Later, TVar, alpha_eq, parse_term, parse_type, print_term, print_type, term_alpha_eq
from approxmod.syntax import Var, subst_term

P = parse_type
X = TVar("X")


def ok(d):
    res = ty.check_typderiv(d)
    assert res.ok, res.messages()
    return d


def test_y_derivation(root):
    d = ok(ty.y_combinator_derivation())
    assert print_term(d.term) == "\\f.(\\x.f (x x)) (\\x.f (x x))"
    assert print_type(d.type) == "(#X -> X) -> X"
    shipped = ty.TypDeriv.from_json(json.loads((root / "examples" / "y_combinator.json").read_text()))
    assert ok(shipped).to_json() == d.to_json()


def test_small_examples():
    ok(ty.var({"x": P("#X -> Y")}, "x"))
    d = ok(ty.arrow_i(ty.var({"x": X}, "x"), "x"))
    assert print_type(d.type) == "X -> X" and d.ctx == {}


def test_checker_rejects():
    bad = ty.TypDeriv("Var", {"x": X}, parse_term("y"), X)
    assert not ty.check_typderiv(bad).ok
    # Shift must see exactly the later context
    inner = ty.var({"x": X}, "x")
    bad = ty.TypDeriv("Shift", {"x": X}, inner.term, X, (inner,))
    assert not ty.check_typderiv(bad).ok
    # Subsume with a broken certificate
    bad = ty.TypDeriv("Subsume", {"x": X}, inner.term, P("Y"), (inner,), {"sub": sb.approx(frozenset(), X)})
    res = ty.check_typderiv(bad)
    assert not res.ok
    # ArrowI binder already in the context
    d = ty.var({"x": X}, "x")
    bad = ty.TypDeriv("ArrowI", {"x": X}, parse_term("\\x.x"), P("X -> X"), (d,))
    assert not ty.check_typderiv(bad).ok


def test_json_roundtrip():
    d = ty.y_combinator_derivation()
    d2 = ty.TypDeriv.from_json(json.loads(json.dumps(d.to_json())))
    assert ok(d2).to_json() == d.to_json()


def test_nec_examples():
    A = P("#X -> Y")
    n = ok(ty.elab_nec(ty.var({"x": A}, "x")))
    assert n.ctx == {"x": Later(A)} and alpha_eq(n.type, Later(A))
    n = ok(ty.elab_nec(ty.arrow_i(ty.var({"x": X}, "x"), "x")))
    assert print_type(n.type) == "#(X -> X)"
    t = ty.top_i({}, parse_term("z"))
    n = ok(ty.elab_nec(t))
    assert n.rule == "Subsume" and n.premises[0].rule == "TopI"
    n = ok(ty.elab_nec(ty.var({"x": X}, "x"), {"y": P("Y")}))
    assert set(n.ctx) == {"x", "y"}


def test_nec_clash():
    with pytest.raises(ValueError):
        ty.elab_nec(ty.var({"x": X}, "x"), {"x": X})


def test_subst_examples():
    d1 = ty.var({"f": P("X -> X")}, "f")
    d2 = ty.arrow_i(ty.var({"y": X}, "y"), "y")
    out = ok(ty.elab_subst(d1, "f", d2))
    assert print_term(out.term) == "\\y.y" and print_type(out.type) == "X -> X" and out.ctx == {}
    # through a Shift node
    sh = ty.shift(ty.elab_nec(ty.var({"f": P("X -> X")}, "f")))
    out = ok(ty.elab_subst(sh, "f", d2))
    assert print_term(out.term) == "\\y.y"
    # x not free: term unchanged
    d1 = ty.weaken(ty.var({"g": X}, "g"), {"f": P("X -> X")})
    out = ok(ty.elab_subst(d1, "f", d2))
    assert print_term(out.term) == "g"


def test_subject_reduce_examples():
    fn = ty.arrow_i(ty.var({"x": X}, "x"), "x")
    d = ok(ty.arrow_e(fn, ty.var({"y": X}, "y")))
    out = ok(ty.subject_reduce(d, ()))
    assert print_term(out.term) == "y" and out.ctx == {"y": X} and alpha_eq(out.type, X)
    with pytest.raises(ValueError):
        ty.subject_reduce(out, ())
    # Top shortcut
    out = ok(ty.subject_reduce(ty.top_i({}, parse_term("(\\x.x x) (\\x.x x)")), ()))
    assert out.rule == "TopI"


def test_y_chain_three_steps():
    d = ty.y_combinator_derivation()
    for _ in range(3):
        p = leftmost_redex_path(d.term)
        d = ok(ty.subject_reduce(d, p))
        assert print_type(d.type) == "(#X -> X) -> X"
    assert print_term(d.term).startswith("\\f.f (f (f ")


def test_transform_shapes():
    d = ty.y_combinator_derivation()
    w = ok(ty.weaken(d, {"z": P("Y")}))
    assert w.height() == d.height() and w.ctx == {"z": P("Y")}
    r = ok(ty.rename_var(ty.var({"x": X}, "x"), "x", "u"))
    assert print_term(r.term) == "u"


def test_retype_and_inversion():
    d = ty.var({"x": X}, "x")
    out = ok(ty.retype_var(d, "x", sb.reflex(frozenset(), X, X)))
    assert alpha_eq(out.type, X)
    fn = ty.arrow_i(ty.var({"x": X}, "x"), "x")
    n, dL, s = ty.anti_abstraction(fn)
    assert n == 0 and sb.check_subderiv(s).ok


# -- corpus properties ---------------------------------------------------------

seeds = st.integers(0, 2**32 - 1)


@settings(max_examples=60)
@given(seeds)
def test_generated_derivations_validate(seed):
    ok(random_derivation(random.Random(seed), closed=seed % 2 == 0))


@settings(max_examples=60)
@given(seeds)
def test_nec_subst_and_reduction_revalidate(seed):
    rng = random.Random(seed)
    d = random_derivation(rng)
    n = ok(ty.elab_nec(d, {"extra": P("Y")}))
    assert n.term == d.term and alpha_eq(n.type, Later(d.type))
    for p in redex_paths(d.term)[:3]:
        out = ok(ty.subject_reduce(d, p))
        assert term_alpha_eq(out.term, step_at(d.term, p)) and alpha_eq(out.type, d.type) and ty.ctx_eq(out.ctx, d.ctx)
    # substitute a closed derivation for one context variable
    if d.ctx:
        x = sorted(d.ctx)[0]
        arg = random_derivation(rng, closed=True)
        if alpha_eq(arg.type, d.ctx[x]):
            ok(ty.elab_subst(d, x, arg))


@settings(max_examples=40)
@given(seeds)
def test_subst_by_variable_revalidates(seed):
    rng = random.Random(seed)
    d = random_derivation(rng)
    if not d.ctx:
        return
    x = sorted(d.ctx)[0]
    d2 = ty.var({"fresh_v": d.ctx[x]}, "fresh_v")
    out = ok(ty.elab_subst(d, x, d2))
    assert term_alpha_eq(out.term, subst_term(d.term, x, Var("fresh_v")))
    assert alpha_eq(out.type, d.type)


@settings(max_examples=40)
@given(seeds)
def test_weaken_rename_keep_skeleton(seed):
    d = random_derivation(random.Random(seed))
    w = ok(ty.weaken(d, {"w_extra": TOP}))
    assert w.height() == d.height() and w.term == d.term
    if d.ctx:
        x = sorted(d.ctx)[0]
        r = ok(ty.rename_var(d, x, "renamed"))
        assert r.height() == d.height() and "renamed" in r.ctx


def test_erased_sequents_hold_in_frames():
    corpus = derivation_corpus(seed=3, n=60)
    frames = [kp.random_frame("la", 1 + i % 5, seed=i) for i in range(40)]
    for f in frames:
        val = kp.random_valuation(f, ["X", "Y", "Z"], seed=f.size)
        for d in corpus:
            ctx, A = erase(d)
            for p in range(f.size):
                assert kp.sequent_holds(f, val, p, ctx, A)
