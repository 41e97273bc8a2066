import random

import pytest
from hypothesis import given, strategies as st

from revisos.core import Clauses, IsoType, Pair, Val, VarV
from revisos.eval import apply_iso
from revisos.invert import invert
from revisos.rpp import (
    ArityError, Id, It, P, S, Seq, Sign, Swap, arity, compile_rpp, decode_int, decode_vec,
    encode_int, encode_vec, parse_rpp, random_rpp, rpp_eval, rpp_invert, simulate_rpp, to_text,
    z_power, Z,
)
from revisos.typecheck import EMPTY_PSI, type_iso

from oracles import int_to_value, rpp_denote, rpp_width, run_iso

small_ints = st.integers(-8, 8)


def test_reference_examples():
    assert rpp_eval(S(), [5]) == [6]
    assert rpp_eval(parse_rpp("It[S]"), [2, 3]) == [5, 3]
    assert rpp_eval(parse_rpp("If[S,Id,P]"), [4, -1]) == [3, -1]
    with pytest.raises(ArityError):
        rpp_eval(Swap(), [1])


def test_inversion_table():
    assert rpp_invert(S()) == P()
    assert rpp_invert(Seq(S(), Sign())) == Seq(Sign(), P())
    assert rpp_invert(parse_rpp("Perm[2,3,1]")) == parse_rpp("Perm[3,1,2]")


def test_integer_encoding():
    assert encode_int(0) == int_to_value(0)
    assert encode_int(1) == int_to_value(1)
    for z in range(-64, 65):
        assert decode_int(encode_int(z)) == z
        assert encode_int(z) == int_to_value(z)
    with pytest.raises(ValueError):
        decode_int(Pair(encode_int(0), encode_int(0)))


def test_primitive_encodings():
    x, y = VarV("x"), VarV("y")
    assert compile_rpp(Id()) == Clauses(((x, Val(x)),))
    assert compile_rpp(Swap()) == Clauses(((Pair(x, y), Val(Pair(y, x))),))
    assert compile_rpp(S()).ann == IsoType(Z, Z)


def test_iterated_successor_against_oracle():
    f = It(S())
    iso = compile_rpp(f)
    assert type_iso(EMPTY_PSI, iso) == IsoType(z_power(2), z_power(2))
    rng = random.Random(11)
    for _ in range(200):
        xs = [rng.randint(-8, 8), rng.randint(-8, 8)]
        assert decode_vec(apply_iso(iso, encode_vec(xs)), 2) == list(rpp_denote(f)(tuple(xs)))


def test_text_round_trip():
    for text in ["S", "S ; P", "S || P ; Swap", "It[If[S, Id, P]]", "Weaken[Sign, 2]", "Perm[2,1,3]"]:
        f = parse_rpp(text)
        assert parse_rpp(to_text(f)) == f
    assert parse_rpp("S || P ; Swap") == Seq(parse_rpp("S || P"), Swap())


def test_inverse_isos_differ_but_agree():
    f = parse_rpp("S ; S")
    assert invert(compile_rpp(f)) != compile_rpp(rpp_invert(f))
    for z in range(-5, 6):
        v = encode_int(z)
        assert apply_iso(invert(compile_rpp(f)), v) == apply_iso(compile_rpp(rpp_invert(f)), v)


@given(st.integers(0, 2**32 - 1), st.data())
def test_reference_matches_denotation(seed, data):
    f = random_rpp(random.Random(seed), depth=4)
    assert arity(f) == rpp_width(f)
    xs = data.draw(st.lists(small_ints, min_size=arity(f), max_size=arity(f)))
    assert rpp_eval(f, xs) == list(rpp_denote(f)(tuple(xs)))
    assert rpp_eval(Seq(f, rpp_invert(f)), xs) == xs
    assert rpp_invert(rpp_invert(f)) == f


@given(st.integers(0, 2**32 - 1), st.data())
def test_compiled_iso_simulates(seed, data):
    f = random_rpp(random.Random(seed), depth=3)
    k = arity(f)
    xs = data.draw(st.lists(st.integers(-4, 4), min_size=k, max_size=k))
    assert simulate_rpp(f, xs) == list(rpp_denote(f)(tuple(xs)))
    out = run_iso(compile_rpp(f), encode_vec(xs))
    assert decode_vec(out, k) == list(rpp_denote(f)(tuple(xs)))
