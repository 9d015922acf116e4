import pytest
from hypothesis import given

from approxmod.measures import is_proper
from approxmod.syntax import (
    TOP,
    App,
    Arrow,
    Lam,
    Later,
    Mu,
    NotProperError,
    ParseError,
    TVar,
    Var,
    alpha_eq,
    closure,
    free_tvars,
    free_vars,
    parse_term,
    parse_type,
    print_term,
    print_type,
    rename_bound_away,
    subst_type,
    term_alpha_eq,
)
from conftest import terms, types
from oracles import ftv, naive_subst

X, Y, Z = TVar("X"), TVar("Y"), TVar("Z")


def test_parse_top_sugar():
    assert parse_type("mu X. #X") == Mu("X", Later(X))
    assert alpha_eq(parse_type("Top"), TOP)


def test_parse_precedence():
    A = parse_type("mu X. #(X -> #Y) -> Z")
    assert A == Mu("X", Arrow(Later(Arrow(X, Later(Y))), Z))
    assert parse_type("X -> Y -> Z") == Arrow(X, Arrow(Y, Z))
    assert parse_type("#X -> Y") == Arrow(Later(X), Y)


@pytest.mark.parametrize("text", ["mu X. X -> Y", "mu X. mu Y. X -> Y", "mu X. X"])
def test_parse_rejects_improper(text):
    with pytest.raises(NotProperError) as e:
        parse_type(text)
    assert "X" in str(e.value)


@pytest.mark.parametrize("text", ["", "X ->", "(X", "mu . X", "mu X X", "X Y", "#", "Top Top", "mu mu. #mu"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse_type(text)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_type("X -> )")
    assert e.value.pos == 5


def test_improper_mu_constructor():
    with pytest.raises(NotProperError):
        Mu("X", Arrow(X, Y))


def test_subst_examples():
    assert subst_type(Arrow(X, Y), [("X", TOP)]) == Arrow(TOP, Y)
    out = subst_type(parse_type("mu Y. X -> #Y"), [("X", Y)])
    assert alpha_eq(out, parse_type("mu W. Y -> #W"))
    assert out.ftv == {"Y"}
    # oracle: naive substitution with explicit renaming
    assert alpha_eq(subst_type(TOP.body, [("X", TOP)]), Later(TOP))
    assert alpha_eq(naive_subst(TOP.body, "X", TOP), Later(TOP))


def test_simultaneous_subst():
    A = subst_type(Arrow(X, Y), [("X", Y), ("Y", X)])
    assert A == Arrow(Y, X)


def test_alpha_and_free():
    assert alpha_eq(parse_type("mu X.#X"), parse_type("mu Y.#Y"))
    assert not alpha_eq(parse_type("mu X.#X -> Y"), parse_type("mu X.#X -> Z"))
    assert free_tvars(parse_type("mu X. #(X -> Y) -> Z")) == {"Y", "Z"}
    assert free_vars(parse_term("\\x. x y (\\y. y z)")) == {"y", "z"}


def test_term_parse_and_print():
    M = parse_term("\\f.(\\x.f (x x)) (\\x.f (x x))")
    assert isinstance(M, Lam) and isinstance(M.body, App)
    assert print_term(M) == "\\f.(\\x.f (x x)) (\\x.f (x x))"
    assert parse_term("a b c") == App(App(Var("a"), Var("b")), Var("c"))
    with pytest.raises(ParseError):
        parse_term("\\x.")


def test_unicode_printing():
    assert print_type(parse_type("#X -> Top"), unicode=True) == "•X → ⊤"


@given(types())
def test_roundtrip(A):
    assert alpha_eq(parse_type(print_type(A)), A)


@given(terms())
def test_term_roundtrip(M):
    assert term_alpha_eq(parse_term(print_term(M)), M)


@given(types())
def test_ftv_matches_oracle(A):
    assert A.ftv == ftv(A)


@given(types(), types())
def test_subst_matches_naive(A, B):
    assert alpha_eq(subst_type(A, [("X", B)]), naive_subst(A, "X", B))


@given(types(), types())
def test_subst_preserves_properness(A, B):
    # building the result re-validates every mu
    C = subst_type(A, [("X", B)])
    for x in ("Y", "Z"):
        if is_proper(A, x) and is_proper(B, x):
            assert is_proper(C, x)


@given(types(), types())
def test_subst_commutes_with_renaming(A, B):
    A2 = rename_bound_away(A, {"X", "Y", "Z"} | B.ftv)
    assert alpha_eq(A, A2)
    assert alpha_eq(subst_type(A, [("Y", B)]), subst_type(A2, [("Y", B)]))


@given(types())
def test_closure_expands_to_itself(A):
    assert closure(A).expand() == A
