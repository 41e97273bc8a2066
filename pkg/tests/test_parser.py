import random

import pytest
from hypothesis import given, strategies as st

from revisos.core import Clauses, Fix, IsoType, Let, Mu, Pair, Prod, Sum, TVar, Unit, UnitT, Val, VarV
from revisos.parser import (
    ParseError, parse, parse_annotated_iso, parse_iso, parse_term, parse_type, parse_value, pretty,
)

from gen import Names, load_corpus, rng_iso, typed_values

NAT = Mu("X", Sum(Unit(), TVar("X")))


def test_swap_source():
    iso, ty = parse_annotated_iso("{ (x, y) <-> (y, x) } :: (1 + 1) * 1 <-> 1 * (1 + 1)")
    x, y = VarV("x"), VarV("y")
    assert iso == Clauses(((Pair(x, y), Val(Pair(y, x))),))
    assert ty == IsoType(Prod(Sum(Unit(), Unit()), Unit()), Prod(Unit(), Sum(Unit(), Unit())))


def test_unit_term():
    assert parse_term("()") == UnitT()
    assert pretty(UnitT()) == "()"


def test_map_source():
    d = load_corpus("map_swap.iso").lookup("map_swap")
    assert isinstance(d.iso, Fix) and d.iso.var == "f"
    nil_clause, cons_clause = d.iso.body.clauses
    assert isinstance(nil_clause[1], Val)
    body = cons_clause[1]
    assert isinstance(body, Let) and isinstance(body.body, Let) and isinstance(body.body.body, Val)


def test_type_printing():
    assert pretty(NAT) == "mu X. 1 + X"
    assert parse_type("mu X. 1 + X") == NAT
    assert parse_type("1 + 1 * 1") == Sum(Unit(), Prod(Unit(), Unit()))


def test_aliases_expand():
    src = parse("type B = 1 + 1\ndef not :: B <-> B = { injl () <-> injr () | injr () <-> injl () }\n")
    assert src.lookup("not").type == IsoType(Sum(Unit(), Unit()), Sum(Unit(), Unit()))


@pytest.mark.parametrize("text", ["{ x <-> }", "def f :: 1 <-> = { x <-> x }", "((", "{ x <-> x"])
def test_errors_carry_positions(text):
    with pytest.raises(ParseError) as info:
        parse(text) if text.startswith("def") else parse_iso(text)
    assert info.value.line >= 1 and info.value.col >= 1


def test_corpus_round_trip():
    for name in ["iso1.iso", "swap.iso", "map_swap.iso", "nat_list.iso", "cantor.iso", "loop.iso"]:
        src = load_corpus(name)
        again = parse(pretty(src))
        assert [d.iso for d in again.definitions] == [d.iso for d in src.definitions]
        assert [d.type for d in again.definitions] == [d.type for d in src.definitions]
        assert again.main == src.main


def _round_trip(iso):
    text = pretty(iso)
    back = parse_iso(text)
    assert back == iso, text
    assert pretty(back) == text


def test_round_trip_fuzzed_isos():
    rng = random.Random(7)
    for _ in range(1000):
        _round_trip(rng_iso(rng, 3, names=Names("v")))


@given(st.integers(0, 2**32 - 1))
def test_round_trip_property(seed):
    _round_trip(rng_iso(random.Random(seed), 3))


@given(typed_values())
def test_value_round_trip(pair):
    _, v = pair
    assert parse_value(pretty(v)) == v
