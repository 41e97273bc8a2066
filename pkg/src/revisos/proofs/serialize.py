"""Proof JSON and a plain-text rendering.

Key order is fixed so that dumps are byte-stable and can be diffed against
checked-in goldens.
"""
from __future__ import annotations

import json
from importlib import resources

from ..core import Mu, Prod, Sum, TVar, Unit
from .derivation import Derivation, Sequent
from .formulas import NEGATIVE_SHAPE, POSITIVE_SHAPE, Address, Formula

_SHAPE_TO_TYPE = {"one": Unit, "bot": Unit, "plus": Sum, "with": Sum, "tensor": Prod, "par": Prod,
                  "mu": Mu, "nu": Mu}


def _type_json(a, negated, bound):
    table = NEGATIVE_SHAPE if negated else POSITIVE_SHAPE
    if isinstance(a, TVar):
        if a.name in bound:
            return {"shape": "var", "name": a.name}
        return {"shape": "atom", "name": a.name}
    out = {"shape": table[type(a)]}
    if isinstance(a, (Sum, Prod)):
        out["left"] = _type_json(a.left, negated, bound)
        out["right"] = _type_json(a.right, negated, bound)
    elif isinstance(a, Mu):
        out["binder"] = a.binder
        out["body"] = _type_json(a.body, negated, bound | {a.binder})
    return out


def formula_to_json(f: Formula) -> dict:
    body = _type_json(f.type, f.negated, frozenset())
    return {"shape": body.pop("shape"), "addr": str(f.addr), **body}


def _type_from_json(obj):
    shape = obj["shape"]
    if shape in ("atom", "var"):
        return TVar(obj["name"])
    kind = _SHAPE_TO_TYPE[shape]
    if kind is Unit:
        return Unit()
    if kind is Mu:
        return Mu(obj["binder"], _type_from_json(obj["body"]))
    return kind(_type_from_json(obj["left"]), _type_from_json(obj["right"]))


def formula_from_json(obj: dict) -> Formula:
    negated = obj["shape"] in ("bot", "with", "par", "nu")
    return Formula(_type_from_json(obj), Address.parse(obj["addr"]), negated)


def to_json(d: Derivation) -> dict:
    s = d.conclusion
    sequent = {
        "upsilon": [formula_to_json(f) for f in s.upsilon],
        "theta": [{"var": x, "formula": formula_to_json(f)} for x, f in s.theta],
        "goal": formula_to_json(s.goal) if s.goal is not None else None,
        "label": s.label,
    }
    out = {"rule": d.rule, "sequent": sequent}
    if d.rule == "ex":
        out["var"] = d.arg
    elif d.rule in ("be", "trunc") and d.arg is not None:
        out["target"] = d.arg
    out["premises"] = [to_json(p) for p in d.premises]
    return out


def from_json(obj: dict) -> Derivation:
    s = obj["sequent"]
    sequent = Sequent(
        tuple(formula_from_json(f) for f in s["upsilon"]),
        tuple((t["var"], formula_from_json(t["formula"])) for t in s["theta"]),
        formula_from_json(s["goal"]) if s["goal"] is not None else None,
        s["label"],
    )
    arg = obj.get("var", obj.get("target"))
    return Derivation(obj["rule"], sequent, tuple(from_json(p) for p in obj["premises"]), arg)


def dumps(d: Derivation) -> str:
    return json.dumps(to_json(d), indent=2) + "\n"


def loads(text: str) -> Derivation:
    return from_json(json.loads(text))


def schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("proof.schema.json").read_text())


# ---------------------------------------------------------------- text

_SYMBOL = {"one": "1", "bot": "⊥", "plus": "⊕", "with": "&", "tensor": "⊗", "par": "⅋",
           "mu": "μ", "nu": "ν"}


def render_type(a, negated=False, bound=frozenset()) -> str:
    if isinstance(a, TVar):
        return a.name + ("⊥" if negated and a.name not in bound else "")
    table = NEGATIVE_SHAPE if negated else POSITIVE_SHAPE
    sym = _SYMBOL[table[type(a)]]
    if isinstance(a, Unit):
        return sym
    if isinstance(a, Mu):
        return f"{sym}{a.binder}.{render_type(a.body, negated, bound | {a.binder})}"
    return f"({render_type(a.left, negated, bound)} {sym} {render_type(a.right, negated, bound)})"


def render_formula(f: Formula) -> str:
    return f"{render_type(f.type)}@{f.addr}"


def render(d: Derivation, indent: int = 0) -> str:
    """One line per rule, premises indented below their conclusion."""
    s = d.conclusion
    upsilon = ", ".join(render_formula(f) for f in s.upsilon)
    theta = ", ".join(f"{x}: {render_formula(f)}" for x, f in s.theta)
    left = f"{upsilon} ; {theta}" if s.theta else upsilon
    turnstile = f"⊢^{s.label}" if s.label else "⊢"
    goal = render_formula(s.goal) if s.goal is not None else ""
    name = f"{d.rule}({d.arg})" if d.arg else d.rule
    body = " ".join(part for part in (left, turnstile, goal) if part)
    lines = [f"{' ' * indent}{name}: {body}"]
    lines += [render(p, indent + 2) for p in d.premises]
    return "\n".join(lines)
