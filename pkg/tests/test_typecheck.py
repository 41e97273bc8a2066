import random

import pytest
from hypothesis import given

from revisos.core import (
    App, Clauses, Fix, InjL, InjR, IsoType, Let, Mu, Pair, PairT, Prod, PVar, Sum, TVar, Unit,
    UnitT, UnitV, Val, VarT, VarV, Fold, IsoVar,
)
from revisos.rpp import compile_rpp, random_rpp, z_power, arity
from revisos.parser import parse_annotated_iso
from revisos.typecheck import (
    EMPTY_PSI, TermCtx, TypeCheckError, check_od, check_structural_recursion, match_unique,
    od_holds, type_iso, type_term, type_value,
)

from gen import Names, enumerate_values_cached, load_corpus, od_sets, rng_pattern, types
from oracles import count_matches, enumerate_values

A, B, C, D, E = (TVar(n) for n in "ABCDE")
NAT = Mu("X", Sum(Unit(), TVar("X")))
x, y = VarV("x"), VarV("y")


def remark_clauses():
    """Exhaustive and non-overlapping over ((A + B) + C) * (D + E), yet not OD."""
    return [Pair(InjR(x), InjL(y)), Pair(InjR(x), InjR(y)), Pair(InjL(x), InjR(y)),
            Pair(InjL(InjL(x)), InjL(y)), Pair(InjL(InjR(x)), InjL(y))]


def test_od_examples():
    assert check_od(Sum(Unit(), Unit()), [InjL(UnitV()), InjR(UnitV())])
    assert check_od(NAT, [x])
    with pytest.raises(TypeCheckError) as info:
        check_od(Prod(Sum(Sum(A, B), C), Sum(D, E)), remark_clauses())
    assert info.value.kind == "od"


def test_remark_set_is_exhaustive_and_disjoint_on_ground_instance():
    ground = Prod(Sum(Sum(Unit(), Unit()), Unit()), Sum(Unit(), Unit()))
    for v in enumerate_values(ground, 6):
        assert count_matches(remark_clauses(), v) == 1
    assert not od_holds(ground, remark_clauses())


def test_match_unique():
    assert match_unique([InjL(x), InjR(y)], InjR(UnitV())) == (1, {"y": UnitV()})
    iso1 = load_corpus("iso1.iso").lookup("iso1").iso
    patterns = [v for v, _ in iso1.clauses]
    b0 = InjL(UnitV())
    assert match_unique(patterns, InjR(InjL(b0))) == (1, {"b": b0})


def test_iso1_patterns_cover_each_value_once():
    ty = Sum(Unit(), Sum(Unit(), Unit()))
    pats = [InjL(VarV("a")), InjR(InjL(VarV("b"))), InjR(InjR(VarV("c")))]
    values = enumerate_values(ty, 3)
    assert len(values) == 3
    for v in values:
        assert count_matches(pats, v) == 1


def test_type_value():
    nat_body = Sum(Unit(), NAT)
    assert type_value(Pair(x, Fold(y)), Prod(Unit(), NAT)) == {"x": Unit(), "y": nat_body}
    assert type_value(UnitV(), Unit()) == {}
    with pytest.raises(TypeCheckError):
        type_value(InjL(UnitV()), Prod(Unit(), Unit()))


def test_type_term():
    swap = Clauses(((Pair(x, y), Val(Pair(y, x))),), IsoType(Prod(A, Unit()), Prod(Unit(), A)))
    assert type_term(TermCtx({"x": A}), EMPTY_PSI, App(swap, PairT(VarT("x"), UnitT()))) == Prod(Unit(), A)
    assert type_term(TermCtx({"x": A, "y": B}), EMPTY_PSI, PairT(VarT("x"), VarT("y"))) == Prod(A, B)
    with pytest.raises(TypeCheckError):
        type_term(TermCtx({"x": A}), EMPTY_PSI, PairT(VarT("x"), VarT("x")))


def test_unused_variable_is_rejected():
    bad = Clauses(((Pair(x, y), Val(x)),))
    with pytest.raises(TypeCheckError, match="linearity|not used"):
        type_iso(EMPTY_PSI, bad, IsoType(Prod(Unit(), Unit()), Unit()))


def test_structural_recursion_of_map():
    d = load_corpus("map_swap.iso").lookup("map_swap")
    info = check_structural_recursion(d.iso, d.type)
    assert info.decreasing_index == 1
    assert info.focus[1] == "t"


def test_loop_and_cantor_are_rejected():
    loop = load_corpus("loop.iso").lookup("loop")
    with pytest.raises(TypeCheckError) as info:
        type_iso(EMPTY_PSI, loop.iso, loop.type)
    assert info.value.kind == "recursion"
    cantor = load_corpus("cantor.iso").lookup("cantor")
    with pytest.raises(TypeCheckError, match="structurally recursive"):
        type_iso(EMPTY_PSI, cantor.iso, cantor.type)


def test_iso1_type():
    d = load_corpus("iso1.iso").lookup("iso1")
    b, c = Sum(Unit(), Unit()), Sum(Unit(), Sum(Unit(), Unit()))
    assert type_iso(EMPTY_PSI, d.iso, d.type) == IsoType(Sum(Unit(), Sum(b, c)), Sum(c, Sum(Unit(), b)))


def test_successor_is_typed_at_z():
    from revisos.rpp import S, Z
    assert type_iso(EMPTY_PSI, compile_rpp(S())) == IsoType(Z, Z)


def test_random_compiled_rpp_are_typed():
    rng = random.Random(3)
    for _ in range(100):
        f = random_rpp(rng, depth=4)
        k = arity(f)
        assert type_iso(EMPTY_PSI, compile_rpp(f)) == IsoType(z_power(k), z_power(k))


def test_unknown_iso_variable():
    with pytest.raises(TypeCheckError):
        type_iso(EMPTY_PSI, Fix("f", Clauses(((x, Let(PVar("y"), IsoVar("g"), PVar("x"), Val(y))),))),
                 IsoType(NAT, NAT))


def test_right_hand_sides_must_be_od():
    bad, _ = parse_annotated_iso("{ injl () <-> injl () | injr () <-> injl () } :: 1 + 1 <-> 1 + 1")
    with pytest.raises(TypeCheckError, match="right-hand"):
        type_iso(EMPTY_PSI, bad, IsoType(Sum(Unit(), Unit()), Sum(Unit(), Unit())))


@given(od_sets())
def test_generated_od_sets_pass_and_partition(case):
    a, patterns = case
    assert od_holds(a, patterns)
    for v in enumerate_values_cached(a, 5):
        assert count_matches(patterns, v) == 1


@given(types(4))
def test_od_is_sound_on_random_pattern_sets(a):
    rng = random.Random(hash(a) & 0xFFFF)
    names = Names()
    patterns = [rng_pattern(rng, a, names) for _ in range(rng.randint(1, 4))]
    if od_holds(a, patterns):
        for v in enumerate_values_cached(a, 5):
            assert count_matches(patterns, v) == 1
