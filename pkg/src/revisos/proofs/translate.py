"""Isos and terms to circular derivations.

``circ`` walks an iso keeping the last fixpoint variable seen, ``neg``
decomposes the input formula along the clause patterns and ``pos`` builds the
output from a term. Lets and applications become cuts.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..core import (
    App, BaseType, Fix, FoldT, InjL, InjLT, InjR, InjRT, IsoType, IsoVar, Let,
    LetT, Mu, PVar, Pair, PairT, Prod, Sum, UnitT, UnitV, Val, VarT, VarV, Fold,
    expr_to_term, free_iso_vars, free_term_vars, pattern_to_value, type_unfold,
)
from ..typecheck import EMPTY_PSI, TermCtx, TypeCheckError, type_iso, type_term
from .derivation import Derivation, Sequent, floor
from .formulas import AddressSupply, Formula, type_to_formula


class TranslationError(Exception):
    pass


@dataclass
class _Row:
    values: tuple
    term: object


class Translator:
    """Holds the fresh-address supply and the types of iso-variables in scope."""

    def __init__(self, supply: AddressSupply | None = None):
        self.supply = supply or AddressSupply()
        self.iso_types = {}

    # -- iso phase
    def circ(self, iso, source: Formula, target: Formula, last_var=None) -> Derivation:
        if isinstance(iso, Fix):
            saved = self.iso_types
            self.iso_types = {**saved, iso.var: IsoType(source.type, target.type)}
            try:
                return self.circ(iso.body, source, target, iso.var)
            finally:
                self.iso_types = saved
        if isinstance(iso, IsoVar):
            if iso.name != last_var:
                raise TranslationError(f"iso-variable {iso.name!r} is not the enclosing fixpoint")
            return Derivation("be", Sequent((source,), (), target), (), iso.name)
        # an applied iso never mentions the enclosing variable, so it only
        # carries a label when it is the body of its own fixpoint
        label = last_var if last_var in free_iso_vars(iso) else None
        rows = [_Row((v,), expr_to_term(e)) for v, e in iso.clauses]
        d = self.neg(rows, (source,), (), target)
        return d.relabel(label)

    # -- negative phase
    def neg(self, rows, upsilon, theta, goal) -> Derivation:
        seq = Sequent(tuple(upsilon), tuple(theta), goal)
        if not upsilon:
            if len(rows) != 1:
                raise TranslationError("overlapping clauses reached the positive phase")
            return self.pos(rows[0].term, theta, goal)
        column = self._column(rows)
        if column:
            # bring the first column that is not all variables to the front
            upsilon = (upsilon[column],) + upsilon[:column] + upsilon[column + 1:]
            rows = [_Row((r.values[column],) + r.values[:column] + r.values[column + 1:], r.term)
                    for r in rows]
            seq = Sequent(tuple(upsilon), tuple(theta), goal)
        first, rest = upsilon[0], tuple(upsilon[1:])
        heads = [r.values[0] for r in rows]
        if all(isinstance(h, VarV) for h in heads):
            if len(rows) != 1:
                raise TranslationError("clauses overlap on a variable pattern")
            row = rows[0]
            prem = self.neg([_Row(row.values[1:], row.term)], rest, theta + ((heads[0].name, first),), goal)
            return Derivation("ex", seq, (prem,), heads[0].name)
        kind = type(heads[0])
        if any(type(h) is not kind and not {type(h), kind} <= {InjL, InjR} for h in heads):
            raise TranslationError("clause patterns disagree on a constructor")
        if kind is UnitV:
            if len(rows) != 1:
                raise TranslationError("clauses overlap on ()")
            prem = self.neg([_Row(rows[0].values[1:], rows[0].term)], rest, theta, goal)
            return Derivation("bot", seq, (prem,))
        if kind is Pair:
            left, right = first.children
            new = [_Row((h.left, h.right) + r.values[1:], r.term) for h, r in zip(heads, rows)]
            return Derivation("par", seq, (self.neg(new, (left, right) + rest, theta, goal),))
        if kind is Fold:
            new = [_Row((h.value,) + r.values[1:], r.term) for h, r in zip(heads, rows)]
            return Derivation("nu", seq, (self.neg(new, first.children + rest, theta, goal),))
        left, right = first.children
        lefts = [_Row((h.value,) + r.values[1:], r.term) for h, r in zip(heads, rows) if isinstance(h, InjL)]
        rights = [_Row((h.value,) + r.values[1:], r.term) for h, r in zip(heads, rows) if isinstance(h, InjR)]
        if not lefts or not rights:
            raise TranslationError("clauses are not exhaustive on a sum")
        return Derivation("with", seq, (self.neg(lefts, (left,) + rest, theta, goal),
                                        self.neg(rights, (right,) + rest, theta, goal)))

    @staticmethod
    def _column(rows):
        if len(rows) == 1:
            return 0
        for k in range(len(rows[0].values)):
            if not all(isinstance(r.values[k], VarV) for r in rows):
                return k
        raise TranslationError("clauses overlap: every remaining pattern is a variable")

    # -- positive phase
    def pos(self, t, theta, goal: Formula) -> Derivation:
        if isinstance(t, (Val, Let)):
            t = expr_to_term(t)
        theta = tuple(theta)
        seq = Sequent((), theta, goal)
        if isinstance(t, UnitT):
            self._expect(theta, (), t)
            return Derivation("one", seq)
        if isinstance(t, VarT):
            if [x for x, _ in theta] != [t.name]:
                raise TranslationError(f"variable {t.name!r} used with context {[x for x, _ in theta]}")
            if not theta[0][1].same_formula(goal):
                raise TranslationError(f"variable {t.name!r} has the wrong type")
            return Derivation("id", seq)
        if isinstance(t, (InjLT, InjRT)):
            if not isinstance(goal.type, Sum):
                raise TranslationError("injection at a non-sum type")
            k = 0 if isinstance(t, InjLT) else 1
            return Derivation(("plus1", "plus2")[k], seq, (self.pos(t.term, theta, goal.children[k]),))
        if isinstance(t, FoldT):
            if not isinstance(goal.type, Mu):
                raise TranslationError("fold at a non-recursive type")
            return Derivation("mu", seq, (self.pos(t.term, theta, goal.children[0]),))
        if isinstance(t, PairT):
            if not isinstance(goal.type, Prod):
                raise TranslationError("pair at a non-product type")
            left_theta, right_theta = _split(theta, t.left)
            left, right = goal.children
            return Derivation("tensor", seq, (self.pos(t.left, left_theta, left),
                                              self.pos(t.right, right_theta, right)))
        if isinstance(t, App):
            alpha = self.iso_type(t.iso, t.arg, theta, goal.type)
            cut = type_to_formula(alpha.lhs, self.supply.fresh())
            arg = self.pos(t.arg, theta, cut)
            body = self.circ(t.iso, cut, goal, t.iso.name if isinstance(t.iso, IsoVar) else None)
            return Derivation("cut", seq, (arg, body))
        if isinstance(t, LetT):
            bound_theta, body_theta = _split(theta, t.bound)
            bound_type = self.bound_type(t, bound_theta, body_theta, goal.type)
            cut = type_to_formula(bound_type, self.supply.fresh())
            bound = self.pos(t.bound, bound_theta, cut)
            body = self.neg([_Row((pattern_to_value(t.pattern),), t.body)], (cut,), body_theta, goal)
            return Derivation("cut", seq, (bound, body))
        raise TranslationError(f"cannot translate {t!r}")

    @staticmethod
    def _expect(theta, names, t):
        if tuple(x for x, _ in theta) != tuple(names):
            raise TranslationError(f"context {[x for x, _ in theta]} does not fit {t!r}")

    # -- types
    def iso_type(self, iso, arg, theta, out: BaseType) -> IsoType:
        if isinstance(iso, IsoVar):
            return self.iso_types[iso.name]
        if iso.ann is not None:
            return iso.ann
        ctx = TermCtx({x: f.type for x, f in theta})
        try:
            return IsoType(type_term(ctx, EMPTY_PSI, arg), out)
        except TypeCheckError as e:
            raise TranslationError(f"cannot type an unannotated iso: {e}") from None

    def bound_type(self, t: LetT, bound_theta, body_theta, out: BaseType) -> BaseType:
        names = {x: f.type for x, f in body_theta}
        found = self.var_types(t.body, out, names)
        return _pattern_type(t.pattern, found)

    def var_types(self, t, goal_type, known) -> dict:
        """Types of the free variables of ``t`` when ``t`` has type ``goal_type``."""
        out = {}
        self._collect(t, goal_type, known, out)
        return out

    def _collect(self, t, a, known, out):
        if isinstance(t, VarT):
            out[t.name] = a
        elif isinstance(t, UnitT):
            pass
        elif isinstance(t, (InjLT, InjRT)):
            self._collect(t.term, a.left if isinstance(t, InjLT) else a.right, known, out)
        elif isinstance(t, FoldT):
            self._collect(t.term, type_unfold(a), known, out)
        elif isinstance(t, PairT):
            self._collect(t.left, a.left, known, out)
            self._collect(t.right, a.right, known, out)
        elif isinstance(t, App):
            if isinstance(t.iso, IsoVar):
                lhs = self.iso_types[t.iso.name].lhs
            elif t.iso.ann is not None:
                lhs = t.iso.ann.lhs
            else:
                ctx = TermCtx({x: known[x] for x in free_term_vars(t.arg) if x in known})
                lhs = type_term(ctx, EMPTY_PSI, t.arg)
            self._collect(t.arg, lhs, known, out)
        elif isinstance(t, LetT):
            inner = {}
            self._collect(t.body, a, known, inner)
            bound = _pattern_type(t.pattern, inner)
            for x in _pattern_names(t.pattern):
                inner.pop(x, None)
            out.update(inner)
            self._collect(t.bound, bound, known, out)
        elif isinstance(t, (Val, Let)):
            self._collect(expr_to_term(t), a, known, out)
        else:
            raise TranslationError(f"cannot type {t!r}")


def _pattern_names(p):
    if isinstance(p, PVar):
        return [p.name]
    return _pattern_names(p.left) + _pattern_names(p.right)


def _pattern_type(p, types):
    if isinstance(p, PVar):
        if p.name not in types:
            raise TranslationError(f"let-bound {p.name!r} is never used")
        return types[p.name]
    return Prod(_pattern_type(p.left, types), _pattern_type(p.right, types))


def _split(theta, left_term):
    names = free_term_vars(left_term)
    return (tuple((x, f) for x, f in theta if x in names),
            tuple((x, f) for x, f in theta if x not in names))


# ---------------------------------------------------------------- entry points

def circ(iso, alpha: IsoType | None = None, supply: AddressSupply | None = None,
         last_var=None) -> Derivation:
    """Circular derivation of ``[A_a] ; . |- B_b`` for fresh ``a`` and ``b``."""
    alpha = alpha or iso_type_of(iso)
    tr = Translator(supply)
    source = type_to_formula(alpha.lhs, tr.supply.fresh())
    target = type_to_formula(alpha.rhs, tr.supply.fresh())
    return tr.circ(iso, source, target, last_var)


def iso_type_of(iso) -> IsoType:
    if iso.ann is not None:
        return iso.ann
    return type_iso(EMPTY_PSI, iso)


def translate_term(t, goal_type: BaseType | None = None, supply: AddressSupply | None = None) -> Derivation:
    """``Pos(t)`` for a closed term at a fresh goal address."""
    if goal_type is None:
        goal_type = type_term(TermCtx(), EMPTY_PSI, t)
    tr = Translator(supply)
    return tr.pos(t, (), type_to_formula(goal_type, tr.supply.fresh()))


def extract(iso, alpha: IsoType | None = None, raw: bool = False) -> Derivation:
    """The derivation of an iso, floored unless ``raw``."""
    d = circ(iso, alpha)
    return d if raw else floor(d)
