import random

import pytest
from hypothesis import given, strategies as st

from revisos.core import (
    App, Clauses, Fold, InjL, InjR, LetT, PPair, PVar, Pair, PairT, UnitV, Val, VarT, VarV,
    from_pylist, term_to_value, value_to_term,
)
from revisos.eval import (
    EvalConfig, FuelExhausted, NoMatch, System, apply_iso, elet, evaluate, match_value, step,
    step_explicit, step_with_info, _match,
)
from revisos.rpp import compile_rpp, encode_int, encode_vec, parse_rpp

from gen import Names, load_corpus, rng_term, term_types, typed_pool
from oracles import run_term

x, y = VarV("x"), VarV("y")
SWAP = Clauses(((Pair(x, y), Val(Pair(y, x))),))


def run_naive(t, stepper, limit=100_000):
    for _ in range(limit):
        nxt = stepper(t)
        if nxt is None:
            return term_to_value(t)
        t = nxt
    raise AssertionError("naive stepper did not finish")


def test_matching():
    assert match_value(x, InjL(UnitV())) == {"x": InjL(UnitV())}
    assert match_value(Pair(x, y), Pair(UnitV(), UnitV())) == {"x": UnitV(), "y": UnitV()}
    assert match_value(InjL(x), InjR(UnitV())) is None
    with pytest.raises(NoMatch):
        _match(InjL(x), InjR(UnitV()))


def test_swap_application():
    t = App(SWAP, value_to_term(Pair(UnitV(), InjL(UnitV()))))
    res = evaluate(t)
    assert res.value == Pair(InjL(UnitV()), UnitV()) and res.steps == 1


def test_successor_of_zero():
    one = InjR(InjL(Fold(InjL(UnitV()))))
    assert apply_iso(compile_rpp(parse_rpp("S")), InjL(UnitV())) == one == encode_int(1)


def test_map_swap_one_element():
    d = load_corpus("map_swap.iso").lookup("map_swap")
    out = apply_iso(d.iso, from_pylist([Pair(UnitV(), InjL(UnitV()))]))
    assert out == from_pylist([Pair(InjL(UnitV()), UnitV())])


def test_values_take_no_steps():
    v = value_to_term(Pair(UnitV(), InjR(UnitV())))
    for system in System:
        res = evaluate(v, system=system)
        assert res.steps == 0 and res.value == term_to_value(v)


def test_loop_runs_out_of_fuel():
    loop = load_corpus("loop.iso").lookup("loop").iso
    res = evaluate(App(loop, value_to_term(Fold(InjL(UnitV())))), fuel=1000)
    assert res.exhausted and isinstance(res.outcome, FuelExhausted)
    with pytest.raises(RuntimeError):
        res.value



def test_deep_residual_term_is_rebuilt():
    loop = load_corpus("loop.iso").lookup("loop").iso
    res = evaluate(App(loop, value_to_term(Fold(InjL(UnitV())))), fuel=50_000)
    assert res.exhausted and res.outcome.steps == 50_000
    assert isinstance(res.outcome.term, LetT)


def test_iterated_successor():
    out = apply_iso(compile_rpp(parse_rpp("It[S]")), encode_vec([2, 3]))
    assert out == encode_vec([5, 3])


def test_let_rules():
    v = value_to_term(InjL(UnitV()))
    assert step_explicit(LetT(PVar("x"), v, VarT("x"))) == v
    t1, t2 = value_to_term(UnitV()), value_to_term(InjR(UnitV()))
    split = LetT(PPair(PVar("x1"), PVar("p")), PairT(t1, t2), PairT(VarT("p"), VarT("x1")))
    assert elet(split)[0] == LetT(PVar("x1"), t1, LetT(PVar("p"), t2, PairT(VarT("p"), VarT("x1"))))
    assert elet(split)[1] == "ELetSplit"


def test_iso_application_goes_through_a_let_chain():
    t = App(SWAP, value_to_term(Pair(UnitV(), InjL(UnitV()))))
    after, rule, _ = step_with_info(t, System.EXPLICIT)
    assert rule == "IsoApp" and isinstance(after, LetT) and after.pattern == PVar("x")
    assert run_naive(t, step_explicit) == run_naive(t, step)


def test_trace_records_every_step():
    t = load_corpus("map_swap.iso").main
    res = evaluate(t, EvalConfig(trace=True, system=System.EXPLICIT))
    assert len(res.trace) == res.steps
    assert term_to_value(res.trace[-1].after) == res.value


@given(st.integers(0, 2**32 - 1))
def test_systems_agree_on_random_terms(seed):
    rng = random.Random(seed)
    pool = typed_pool()
    a = rng.choice(term_types(pool))
    t = rng_term(rng, a, pool, Names("t"), 3)
    expected = run_term(t)
    assert evaluate(t).value == expected
    assert evaluate(t, system=System.EXPLICIT).value == expected
    assert run_naive(t, step) == expected
    assert run_naive(t, lambda u: step_explicit(u, use_beta_lete=True)) == expected
