from hypothesis import given, strategies as st

from revisos.core import (
    App, Clauses, Fold, InjL, InjLT, InjR, IsoType, Let, LetT, Mu, PPair, PVar, Pair, Prod,
    Subst, Sum, TVar, Unit, UnitT, UnitV, Val, VarT, VarV, apply_subst, free_term_vars,
    from_pylist, list_type, term_to_value, to_pylist, tuple_value, type_unfold, val_of_expr,
    value_components, value_to_term,
)

from gen import typed_values

NAT = Mu("X", Sum(Unit(), TVar("X")))
SWAP = Clauses(((Pair(VarV("x"), VarV("y")), Val(Pair(VarV("y"), VarV("x")))),))


def test_unfold_nat():
    assert type_unfold(NAT) == Sum(Unit(), NAT)


def test_unfold_without_binder_occurrence():
    assert type_unfold(Mu("X", Unit())) == Unit()


def test_unfold_list():
    lst = Mu("X", Sum(Unit(), Prod(Unit(), TVar("X"))))
    assert type_unfold(lst) == Sum(Unit(), Prod(Unit(), lst))
    assert list_type(Unit()) == lst


def test_free_vars():
    assert free_term_vars(VarV("x")) == {"x"}
    assert free_term_vars(Pair(VarV("x"), VarV("y"))) == {"x", "y"}
    assert free_term_vars(Let(PVar("y"), SWAP, PVar("x"), Val(VarV("y")))) == {"x"}
    assert free_term_vars(LetT(PPair(PVar("a"), PVar("b")), VarT("c"), VarT("a"))) == {"c"}


def test_substitution():
    assert apply_subst({"x": UnitV()}, InjLT(VarT("x"))) == InjLT(UnitT())
    v = Pair(InjL(UnitV()), UnitV())
    assert apply_subst({"x": v}, App(SWAP, VarT("x"))) == App(SWAP, value_to_term(v))


def test_substitutions_commute_on_disjoint_supports():
    v = Pair(VarV("x"), Pair(VarV("y"), VarV("z")))
    s1, s2 = Subst({"x": UnitV()}), Subst({"y": InjR(UnitV()), "z": UnitV()})
    assert apply_subst(s1, apply_subst(s2, v)) == apply_subst(s2, apply_subst(s1, v))
    assert apply_subst(s1.union(s2), v) == tuple_value(UnitV(), InjR(UnitV()), UnitV())


def test_val_of_expr():
    v = Pair(VarV("x"), VarV("y"))
    assert val_of_expr(Val(v)) == v
    assert val_of_expr(Let(PVar("a"), SWAP, PVar("b"), Val(v))) == v
    nested = Let(PVar("a"), SWAP, PVar("b"), Let(PVar("c"), SWAP, PVar("a"), Val(v)))
    assert val_of_expr(nested) == v


def test_clauses_must_be_nonempty():
    import pytest
    with pytest.raises(ValueError):
        Clauses(())


def test_annotation_does_not_affect_equality():
    typed = Clauses(SWAP.clauses, IsoType(Unit(), Unit()))
    assert typed == SWAP


@given(typed_values())
def test_value_term_round_trip(pair):
    _, v = pair
    assert term_to_value(value_to_term(v)) == v


@given(st.lists(st.sampled_from([UnitV(), InjL(UnitV()), InjR(UnitV())]), max_size=6))
def test_lists(items):
    assert to_pylist(from_pylist(items)) == items
    assert from_pylist([]) == Fold(InjL(UnitV()))


def test_tuples():
    v = tuple_value(UnitV(), InjL(UnitV()), InjR(UnitV()))
    assert v == Pair(UnitV(), Pair(InjL(UnitV()), InjR(UnitV())))
    assert value_components(v, 3) == [UnitV(), InjL(UnitV()), InjR(UnitV())]
