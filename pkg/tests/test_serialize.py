import json

import jsonschema
import pytest

from revisos.core import value_to_term
from revisos.proofs import circ, dumps, extract, from_json, loads, render, to_json, translate_term
from revisos.proofs.serialize import formula_from_json, formula_to_json, schema
from revisos.proofs.formulas import Address, type_to_formula

from gen import NAT, corpus_definitions, rpp_isos, typed_values
from hypothesis import given

ALL = corpus_definitions() + [(label, iso, ty) for label, iso, ty, _ in rpp_isos()]


@pytest.mark.parametrize("label,iso,ty", ALL, ids=[x[0] for x in ALL])
def test_round_trip_and_schema(label, iso, ty):
    for d in (extract(iso, ty), circ(iso, ty)):
        text = dumps(d)
        assert loads(text) == d
        assert dumps(loads(text)) == text
        jsonschema.validate(json.loads(text), schema())


def test_field_order_is_fixed():
    label, iso, ty = ALL[0]
    obj = to_json(extract(iso, ty))
    assert list(obj) == ["rule", "sequent", "premises"]
    assert list(obj["sequent"]) == ["upsilon", "theta", "goal", "label"]
    assert from_json(obj) == extract(iso, ty)


def test_formula_json():
    f = type_to_formula(NAT, Address(3, False, "lir"))
    obj = formula_to_json(f)
    assert obj["shape"] == "mu" and obj["addr"] == "a3:lir"
    assert obj["body"]["right"] == {"shape": "var", "name": "X"}
    assert formula_from_json(obj) == f
    assert formula_from_json(formula_to_json(f.dual())) == f.dual()


@given(typed_values())
def test_value_proofs_serialize(case):
    a, v = case
    d = translate_term(value_to_term(v), a)
    assert loads(dumps(d)) == d


def test_text_rendering():
    label, iso, ty = next(x for x in ALL if x[0] == "map_swap")
    text = render(extract(iso, ty))
    first = text.splitlines()[0]
    assert first.startswith("nu: μX.") and " ⊢^f μX." in first and first.endswith("@a1")
    assert "\n  with: " in text and "be(f): " in text
    assert "mu: ⊢ μX." in text
