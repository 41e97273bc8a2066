"""Isos as circular proofs of linear logic with fixed points."""
from .cutelim import NoRedex, compose_check, cut_step, normalize, simulate
from .derivation import (
    Derivation, DerivationError, Sequent, check_bouncing_cuts, check_well_formed,
    equal_modulo_addresses, floor, unfold,
)
from .formulas import Address, AddressSupply, Formula, type_to_formula
from .serialize import dumps, from_json, loads, render, to_json
from .translate import TranslationError, circ, extract, translate_term
from .validity import Invalid, Valid, build_prethread, check_validity

__all__ = [
    "Address", "AddressSupply", "Formula", "type_to_formula",
    "Derivation", "DerivationError", "Sequent", "floor", "unfold", "equal_modulo_addresses",
    "check_well_formed", "check_bouncing_cuts",
    "TranslationError", "circ", "extract", "translate_term",
    "Valid", "Invalid", "check_validity", "build_prethread",
    "NoRedex", "cut_step", "normalize", "simulate", "compose_check",
    "to_json", "from_json", "dumps", "loads", "render",
]
