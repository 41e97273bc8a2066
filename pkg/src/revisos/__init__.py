"""A linear reversible language of isos, with an RPP compiler and circular proof extraction."""
from .core import IsoType, Mu, Prod, Sum, TVar, Unit
from .eval import EvalConfig, System, apply_iso, evaluate
from .invert import invert
from .parser import load, parse, pretty
from .rpp import compile_rpp, parse_rpp, rpp_eval
from .typecheck import TypeCheckError, check_od, type_iso, type_term

__version__ = "0.1.0"

__all__ = [
    "IsoType", "Unit", "Sum", "Prod", "Mu", "TVar",
    "EvalConfig", "System", "evaluate", "apply_iso", "invert",
    "load", "parse", "pretty", "compile_rpp", "parse_rpp", "rpp_eval",
    "TypeCheckError", "check_od", "type_iso", "type_term",
]
