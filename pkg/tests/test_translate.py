import pathlib

import pytest
from hypothesis import given

from revisos.core import Fix, Fold, InjL, InjR, Pair, Unit, UnitV, VarV, value_to_term
from revisos.proofs import (
    Derivation, Sequent, check_bouncing_cuts, check_well_formed, circ, dumps, equal_modulo_addresses,
    extract, floor, translate_term, type_to_formula, Address,
)
from revisos.proofs.derivation import is_closed_value_proof, is_purely_positive
from revisos.parser import load
from revisos.rpp import Z, compile_aux, encode_int, parse_rpp

from gen import corpus_definitions, rpp_isos, typed_values
from golden_proofs import iso1_proof, swap_proof

HERE = pathlib.Path(__file__).parent
ALL = corpus_definitions() + [(label, iso, ty) for label, iso, ty, _ in rpp_isos()]


def fixture(name):
    d = load(HERE / "fixtures" / f"{name}_atoms.iso").definitions[-1]
    return d.iso, d.type


@pytest.mark.parametrize("name,builder", [("swap", swap_proof), ("iso1", iso1_proof)])
def test_goldens(name, builder):
    d = extract(*fixture(name))
    assert dumps(d) == (HERE / "golden" / f"{name}.json").read_text()
    assert equal_modulo_addresses(d, builder())
    check_well_formed(d)


def test_swap_proof_is_not_purely_positive():
    assert not is_purely_positive(swap_proof())


def test_circ_of_map_has_a_bouncing_cut():
    label, iso, ty = next(x for x in ALL if x[0] == "map_swap")
    d = extract(iso, ty)
    assert d.label == "f"
    edges = [n for n in d if n.rule == "be"]
    assert len(edges) == 1 and edges[0].arg == "f"
    cuts = [n for n in d if n.rule == "cut" and n.premises[1].rule == "be"]
    assert len(cuts) == 1


@pytest.mark.parametrize("label,iso,ty", ALL, ids=[x[0] for x in ALL])
def test_translations_are_well_formed(label, iso, ty):
    raw = circ(iso, ty)
    check_well_formed(raw)
    check_well_formed(floor(raw))
    check_bouncing_cuts(floor(raw))
    assert floor(floor(raw)) == floor(raw)
    assert equal_modulo_addresses(floor(raw), extract(iso, ty))


def test_auxiliary_iterator_translates():
    aux = compile_aux(parse_rpp("S"))
    d = extract(aux)
    check_well_formed(d)
    check_bouncing_cuts(d)
    assert d.label == aux.var


def test_floor_of_exchange_over_axiom():
    a = type_to_formula(Unit(), Address(0))
    goal = a.at(Address(1))
    leaf = Derivation("id", Sequent((), (("x", a),), goal))
    ex = Derivation("ex", Sequent((a,), (), goal), (leaf,), "x")
    assert floor(ex) == Derivation("id", Sequent((a,), (), goal))


def test_closed_value_translates_to_purely_positive_proof():
    d = floor(translate_term(value_to_term(encode_int(1)), Z))
    assert is_closed_value_proof(d)


@given(typed_values())
def test_values_are_purely_positive(case):
    a, v = case
    d = floor(translate_term(value_to_term(v), a))
    assert is_closed_value_proof(d)
    check_well_formed(d)


def _branches(d, chosen=None, names=None):
    """Per negative-phase branch: the with-choices and exchanged variables by address."""
    chosen, names = dict(chosen or {}), dict(names or {})
    if d.rule == "ex":
        names[d.premises[0].conclusion.theta[-1][1].addr] = d.arg
        yield from _branches(d.premises[0], chosen, names)
    elif d.rule == "with":
        principal = d.conclusion.upsilon[0]
        for k, letter in enumerate("lr"):
            yield from _branches(d.premises[k], {**chosen, principal.addr: letter}, names)
    elif d.rule in ("par", "nu", "bot"):
        chosen[d.conclusion.upsilon[0].addr] = d.rule
        yield from _branches(d.premises[0], chosen, names)
    else:
        yield chosen, names


def _rebuild(addr, chosen, names):
    if addr in names:
        return VarV(names[addr])
    how = chosen[addr]
    if how == "bot":
        return UnitV()
    if how == "par":
        return Pair(_rebuild(addr.extend("l"), chosen, names), _rebuild(addr.extend("r"), chosen, names))
    if how == "nu":
        return Fold(_rebuild(addr.extend("i"), chosen, names))
    ctor = InjL if how == "l" else InjR
    return ctor(_rebuild(addr.extend(how), chosen, names))


@pytest.mark.parametrize("label,iso,ty", ALL, ids=[x[0] for x in ALL])
def test_negative_phase_rebuilds_each_clause_pattern(label, iso, ty):
    d = circ(iso, ty)
    clauses = iso.body.clauses if isinstance(iso, Fix) else iso.clauses
    root = d.conclusion.upsilon[0].addr
    rebuilt = [_rebuild(root, c, n) for c, n in _branches(d)]
    assert sorted(map(repr, rebuilt)) == sorted(repr(v) for v, _ in clauses)
