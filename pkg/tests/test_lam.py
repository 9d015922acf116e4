import random

import pytest
from hypothesis import given, strategies as st

from approxmod.lam import (
    HEAD,
    LEFTMOST,
    OMEGA,
    Y_COMBINATOR,
    BHead,
    Elided,
    FuelExhausted,
    HNF,
    Pending,
    beta_step,
    bohm_tree,
    count_pending,
    head_normalize,
    hnf_shape,
    is_normal,
    normalize,
    print_bohm,
    random_step,
    redex_paths,
    step_at,
)
from approxmod.syntax import App, Var, free_vars, parse_term, print_term, term_alpha_eq
from conftest import terms
from oracles import db_normalize, to_db

T = parse_term
Y = T(Y_COMBINATOR)
W = T(OMEGA)


def test_beta_examples():
    assert beta_step(T("(\\x.x) y")) == Var("y")
    assert term_alpha_eq(beta_step(W), W)
    # head step goes under the binder to the inner redex
    assert print_term(beta_step(Y, HEAD)) == "\\f.f ((\\x.f (x x)) (\\x.f (x x)))"
    assert beta_step(T("x ((\\y.y) z)"), HEAD) is None
    assert beta_step(T("x ((\\y.y) z)"), LEFTMOST) == T("x z")
    with pytest.raises(ValueError):
        beta_step(W, "random")


def test_capture_avoidance():
    out = beta_step(T("(\\x.\\y.x) y"))
    assert term_alpha_eq(out, T("\\z.y"))


def test_head_normalize_examples():
    assert isinstance(head_normalize(T("\\x.x"), 0), HNF)
    r = head_normalize(W, 100)
    assert isinstance(r, FuelExhausted) and not r
    r = head_normalize(App(Y, Var("f")), 20)
    assert r and r.steps == 2
    assert print_term(r.term) == "f ((\\x.f (x x)) (\\x.f (x x)))"
    binders, head, args = hnf_shape(r.term)
    assert (binders, head, len(args)) == ([], "f", 1)


def test_normalize():
    r = normalize(T("(\\x.\\y.x) a ((\\z.z) b)"), 100)
    assert r and r.term == Var("a")
    assert not normalize(W, 50)
    assert is_normal(T("\\x.x y"))


def test_bohm_examples():
    t = bohm_tree(T("\\x.x"), 1)
    assert isinstance(t, BHead) and (t.binders, t.head, t.children) == (["x"], "x", [])
    assert isinstance(bohm_tree(W, 1, 100), Pending)
    t = bohm_tree(Y, 3, 1000)
    assert count_pending(t) == 0
    assert print_bohm(t) == "\\f.f (f (f ...))"
    node = t
    for _ in range(3):
        assert isinstance(node, BHead) and node.head == "f"
        node = node.children[0] if node.children else None
    assert isinstance(node, Elided)
    assert bohm_tree(Y, 3, 1000).to_json()["head"] == "f"


def test_redex_paths_order():
    M = T("(\\x.x) ((\\y.y) z)")
    assert redex_paths(M) == [(), (1,)]
    assert step_at(M, (1,)) == T("(\\x.x) z")


# -- properties ---------------------------------------------------------------


@given(terms())
def test_step_keeps_free_vars(M):
    for strategy in (LEFTMOST, HEAD):
        N = beta_step(M, strategy)
        if N is not None:
            assert free_vars(N) <= free_vars(M)


@given(terms())
def test_hnf_has_no_head_redex(M):
    r = head_normalize(M, 200)
    if r:
        assert beta_step(r.term, HEAD) is None


@given(terms(), st.integers(0, 2**32 - 1))
def test_confluence_smoke(M, seed):
    r = normalize(M, 300)
    if not r:
        return
    # random-order reduction reaches the same normal form
    rng = random.Random(seed)
    N = M
    for _ in range(300):
        nxt = random_step(N, rng)
        if nxt is None:
            break
        N = nxt
    else:
        return
    assert term_alpha_eq(N, r.term)


@given(terms())
def test_normalize_matches_de_bruijn_oracle(M):
    r = normalize(M, 300)
    ref = db_normalize(to_db(M), 300)
    if r and ref is not None:
        assert to_db(r.term) == ref
