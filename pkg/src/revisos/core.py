"""Abstract syntax shared by every other module.

Types, values, patterns, expressions, isos and terms are immutable
dataclasses. Type equality is alpha-equality on ``mu`` binders.
"""
from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Union


# ---------------------------------------------------------------- types

class BaseType:
    __slots__ = ()

    def _key(self, env=()):
        raise NotImplementedError

    def __eq__(self, other):
        if not isinstance(other, BaseType):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())


@dataclass(frozen=True, eq=False)
class Unit(BaseType):
    def _key(self, env=()):
        return ("1",)


@dataclass(frozen=True, eq=False)
class Sum(BaseType):
    left: BaseType
    right: BaseType

    def _key(self, env=()):
        return ("+", self.left._key(env), self.right._key(env))


@dataclass(frozen=True, eq=False)
class Prod(BaseType):
    left: BaseType
    right: BaseType

    def _key(self, env=()):
        return ("*", self.left._key(env), self.right._key(env))


@dataclass(frozen=True, eq=False)
class Mu(BaseType):
    binder: str
    body: BaseType

    def _key(self, env=()):
        return ("mu", self.body._key((self.binder,) + env))


@dataclass(frozen=True, eq=False)
class TVar(BaseType):
    name: str

    def _key(self, env=()):
        # locally nameless: bound variables become de Bruijn indices
        if self.name in env:
            return ("bv", env.index(self.name))
        return ("fv", self.name)


@dataclass(frozen=True)
class IsoType:
    lhs: BaseType
    rhs: BaseType

    def flip(self):
        return IsoType(self.rhs, self.lhs)


def free_type_vars(t: BaseType) -> set:
    if isinstance(t, TVar):
        return {t.name}
    if isinstance(t, (Sum, Prod)):
        return free_type_vars(t.left) | free_type_vars(t.right)
    if isinstance(t, Mu):
        return free_type_vars(t.body) - {t.binder}
    return set()


def subst_type(t: BaseType, name: str, repl: BaseType) -> BaseType:
    """Replace free ``name`` in ``t`` by a closed type ``repl``."""
    if isinstance(t, TVar):
        return repl if t.name == name else t
    if isinstance(t, Sum):
        return Sum(subst_type(t.left, name, repl), subst_type(t.right, name, repl))
    if isinstance(t, Prod):
        return Prod(subst_type(t.left, name, repl), subst_type(t.right, name, repl))
    if isinstance(t, Mu):
        if t.binder == name:
            return t
        return Mu(t.binder, subst_type(t.body, name, repl))
    return t


def type_unfold(t: BaseType) -> BaseType:
    if not isinstance(t, Mu):
        raise TypeError(f"cannot unfold non-recursive type {t!r}")
    return subst_type(t.body, t.binder, t)


def tensor(*types: BaseType) -> BaseType:
    """Right-nested A1 * ... * An."""
    if not types:
        return Unit()
    out = types[-1]
    for t in reversed(types[:-1]):
        out = Prod(t, out)
    return out


def tensor_components(t: BaseType, width: int) -> list:
    """Split a right-nested tensor spine into ``width`` components."""
    out = []
    while width > 1:
        if not isinstance(t, Prod):
            raise TypeError(f"expected a {width}-fold tensor, got {t!r}")
        out.append(t.left)
        t = t.right
        width -= 1
    out.append(t)
    return out


def tensor_width(t: BaseType) -> int:
    n = 1
    while isinstance(t, Prod):
        n += 1
        t = t.right
    return n


# ---------------------------------------------------------------- values

@dataclass(frozen=True)
class UnitV:
    pass


@dataclass(frozen=True)
class VarV:
    name: str


@dataclass(frozen=True)
class InjL:
    value: "Value"


@dataclass(frozen=True)
class InjR:
    value: "Value"


@dataclass(frozen=True)
class Pair:
    left: "Value"
    right: "Value"


@dataclass(frozen=True)
class Fold:
    value: "Value"


Value = Union[UnitV, VarV, InjL, InjR, Pair, Fold]
VALUE_CLASSES = (UnitV, VarV, InjL, InjR, Pair, Fold)


def tuple_value(*vs) -> Value:
    out = vs[-1]
    for v in reversed(vs[:-1]):
        out = Pair(v, out)
    return out


def value_components(v, width: int) -> list | None:
    out = []
    while width > 1:
        if not isinstance(v, Pair):
            return None
        out.append(v.left)
        v = v.right
        width -= 1
    out.append(v)
    return out


def is_closed_value(v) -> bool:
    return not value_vars(v)


# ---------------------------------------------------------------- patterns

@dataclass(frozen=True)
class PVar:
    name: str


@dataclass(frozen=True)
class PPair:
    left: "Pattern"
    right: "Pattern"


Pattern = Union[PVar, PPair]


def tuple_pattern(*names) -> Pattern:
    out = PVar(names[-1])
    for n in reversed(names[:-1]):
        out = PPair(PVar(n), out)
    return out


def pattern_vars(p) -> list:
    if isinstance(p, PVar):
        return [p.name]
    return pattern_vars(p.left) + pattern_vars(p.right)


def pattern_to_value(p) -> Value:
    if isinstance(p, PVar):
        return VarV(p.name)
    return Pair(pattern_to_value(p.left), pattern_to_value(p.right))


def value_to_pattern(v) -> Pattern | None:
    if isinstance(v, VarV):
        return PVar(v.name)
    if isinstance(v, Pair):
        left, right = value_to_pattern(v.left), value_to_pattern(v.right)
        if left is None or right is None:
            return None
        return PPair(left, right)
    return None


# ---------------------------------------------------------------- isos and expressions

@dataclass(frozen=True)
class Val:
    value: Value


@dataclass(frozen=True)
class Let:
    pattern: Pattern
    iso: "Iso"
    arg: Pattern
    body: "Expr"


Expr = Union[Val, Let]


@dataclass(frozen=True)
class Clauses:
    clauses: tuple  # of (Value, Expr)
    ann: "IsoType | None" = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(c) for c in self.clauses))
        if not self.clauses:
            raise ValueError("an iso needs at least one clause")


@dataclass(frozen=True)
class Fix:
    var: str
    body: "Iso"
    ann: "IsoType | None" = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class IsoVar:
    name: str


Iso = Union[Clauses, Fix, IsoVar]


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class UnitT:
    pass


@dataclass(frozen=True)
class VarT:
    name: str


@dataclass(frozen=True)
class InjLT:
    term: "Term"


@dataclass(frozen=True)
class InjRT:
    term: "Term"


@dataclass(frozen=True)
class PairT:
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class FoldT:
    term: "Term"


@dataclass(frozen=True)
class App:
    iso: Iso
    arg: "Term"


@dataclass(frozen=True)
class LetT:
    pattern: Pattern
    bound: "Term"
    body: "Term"


Term = Union[UnitT, VarT, InjLT, InjRT, PairT, FoldT, App, LetT]
TERM_CLASSES = (UnitT, VarT, InjLT, InjRT, PairT, FoldT, App, LetT)


def value_to_term(v) -> Term:
    if isinstance(v, UnitV):
        return UnitT()
    if isinstance(v, VarV):
        return VarT(v.name)
    if isinstance(v, InjL):
        return InjLT(value_to_term(v.value))
    if isinstance(v, InjR):
        return InjRT(value_to_term(v.value))
    if isinstance(v, Fold):
        return FoldT(value_to_term(v.value))
    if isinstance(v, Pair):
        return PairT(value_to_term(v.left), value_to_term(v.right))
    raise TypeError(f"not a value: {v!r}")


def term_to_value(t) -> Value | None:
    """The value a term denotes syntactically, or None if it is not one."""
    if isinstance(t, UnitT):
        return UnitV()
    if isinstance(t, VarT):
        return VarV(t.name)
    if isinstance(t, (InjLT, InjRT, FoldT)):
        inner = term_to_value(t.term)
        if inner is None:
            return None
        return {InjLT: InjL, InjRT: InjR, FoldT: Fold}[type(t)](inner)
    if isinstance(t, PairT):
        left = term_to_value(t.left)
        if left is None:
            return None
        right = term_to_value(t.right)
        if right is None:
            return None
        return Pair(left, right)
    return None


def is_value_term(t) -> bool:
    if isinstance(t, (UnitT, VarT)):
        return True
    if isinstance(t, (InjLT, InjRT, FoldT)):
        return is_value_term(t.term)
    if isinstance(t, PairT):
        return is_value_term(t.left) and is_value_term(t.right)
    return False


def expr_to_term(e) -> Term:
    if isinstance(e, Val):
        return value_to_term(e.value)
    return LetT(e.pattern, App(e.iso, value_to_term(pattern_to_value(e.arg))),
                expr_to_term(e.body))


def val_of_expr(e) -> Value:
    while isinstance(e, Let):
        e = e.body
    return e.value


# ---------------------------------------------------------------- free variables

def value_vars(v) -> list:
    """Variables of a value in left-to-right order."""
    if isinstance(v, VarV):
        return [v.name]
    if isinstance(v, (InjL, InjR, Fold)):
        return value_vars(v.value)
    if isinstance(v, Pair):
        return value_vars(v.left) + value_vars(v.right)
    return []


def free_term_vars(x) -> set:
    if isinstance(x, VALUE_CLASSES):
        return set(value_vars(x))
    if isinstance(x, Val):
        return set(value_vars(x.value))
    if isinstance(x, Let):
        return set(pattern_vars(x.arg)) | (free_term_vars(x.body) - set(pattern_vars(x.pattern)))
    if isinstance(x, VarT):
        return {x.name}
    if isinstance(x, UnitT):
        return set()
    if isinstance(x, (InjLT, InjRT, FoldT)):
        return free_term_vars(x.term)
    if isinstance(x, PairT):
        return free_term_vars(x.left) | free_term_vars(x.right)
    if isinstance(x, App):
        return free_term_vars(x.arg)
    if isinstance(x, LetT):
        return free_term_vars(x.bound) | (free_term_vars(x.body) - set(pattern_vars(x.pattern)))
    raise TypeError(f"no free variables for {x!r}")


def free_iso_vars(x) -> set:
    if isinstance(x, IsoVar):
        return {x.name}
    if isinstance(x, Fix):
        return free_iso_vars(x.body) - {x.var}
    if isinstance(x, Clauses):
        out = set()
        for _, e in x.clauses:
            out |= free_iso_vars(e)
        return out
    if isinstance(x, Let):
        return free_iso_vars(x.iso) | free_iso_vars(x.body)
    if isinstance(x, Val):
        return set()
    if isinstance(x, App):
        return free_iso_vars(x.iso) | free_iso_vars(x.arg)
    if isinstance(x, LetT):
        return free_iso_vars(x.bound) | free_iso_vars(x.body)
    if isinstance(x, (InjLT, InjRT, FoldT)):
        return free_iso_vars(x.term)
    if isinstance(x, PairT):
        return free_iso_vars(x.left) | free_iso_vars(x.right)
    return set()


# ---------------------------------------------------------------- substitution

class Subst(Mapping):
    """Finite map from term variables to values; unions need disjoint support."""

    __slots__ = ("_bindings",)

    def __init__(self, bindings=()):
        self._bindings = dict(bindings)

    def __getitem__(self, k):
        return self._bindings[k]

    def __iter__(self):
        return iter(self._bindings)

    def __len__(self):
        return len(self._bindings)

    def __repr__(self):
        return f"Subst({self._bindings!r})"

    def __eq__(self, other):
        if isinstance(other, Mapping):
            return dict(self) == dict(other)
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._bindings.items()))

    def union(self, other: "Subst") -> "Subst":
        clash = set(self._bindings) & set(other)
        if clash:
            raise ValueError(f"substitution supports overlap on {sorted(clash)}")
        return Subst({**self._bindings, **dict(other)})

    def without(self, names: Iterable[str]) -> "Subst":
        drop = set(names)
        return Subst({k: v for k, v in self._bindings.items() if k not in drop})


def apply_subst(s, x):
    if not isinstance(s, Subst):
        s = Subst(s)
    if not s:
        return x
    if isinstance(x, VarV):
        return s.get(x.name, x)
    if isinstance(x, UnitV):
        return x
    if isinstance(x, (InjL, InjR, Fold)):
        return type(x)(apply_subst(s, x.value))
    if isinstance(x, Pair):
        return Pair(apply_subst(s, x.left), apply_subst(s, x.right))
    if isinstance(x, Val):
        return Val(apply_subst(s, x.value))
    if isinstance(x, Let):
        arg = value_to_pattern(apply_subst(s, pattern_to_value(x.arg)))
        if arg is None:
            raise ValueError("substitution would put a non-variable in a let argument")
        return Let(x.pattern, x.iso, arg, apply_subst(s.without(pattern_vars(x.pattern)), x.body))
    if isinstance(x, VarT):
        return value_to_term(s[x.name]) if x.name in s else x
    if isinstance(x, UnitT):
        return x
    if isinstance(x, (InjLT, InjRT, FoldT)):
        return type(x)(apply_subst(s, x.term))
    if isinstance(x, PairT):
        return PairT(apply_subst(s, x.left), apply_subst(s, x.right))
    if isinstance(x, App):
        return App(x.iso, apply_subst(s, x.arg))
    if isinstance(x, LetT):
        return LetT(x.pattern, apply_subst(s, x.bound),
                    apply_subst(s.without(pattern_vars(x.pattern)), x.body))
    raise TypeError(f"cannot substitute into {x!r}")


def subst_iso(x, name: str, repl):
    """Replace the free iso-variable ``name`` by ``repl``."""
    if isinstance(x, IsoVar):
        return repl if x.name == name else x
    if isinstance(x, Fix):
        return x if x.var == name else Fix(x.var, subst_iso(x.body, name, repl), x.ann)
    if isinstance(x, Clauses):
        return Clauses(tuple((v, subst_iso(e, name, repl)) for v, e in x.clauses), x.ann)
    if isinstance(x, Let):
        return Let(x.pattern, subst_iso(x.iso, name, repl), x.arg, subst_iso(x.body, name, repl))
    if isinstance(x, Val):
        return x
    if isinstance(x, App):
        return App(subst_iso(x.iso, name, repl), subst_iso(x.arg, name, repl))
    if isinstance(x, LetT):
        return LetT(x.pattern, subst_iso(x.bound, name, repl), subst_iso(x.body, name, repl))
    if isinstance(x, (InjLT, InjRT, FoldT)):
        return type(x)(subst_iso(x.term, name, repl))
    if isinstance(x, PairT):
        return PairT(subst_iso(x.left, name, repl), subst_iso(x.right, name, repl))
    return x


def annotate(iso, ann):
    """Attach a declared type to a clause set or fixpoint."""
    if isinstance(iso, (Clauses, Fix)) and ann is not None:
        return dataclasses.replace(iso, ann=ann)
    return iso


_fresh = itertools.count()


def fresh(base: str = "x") -> str:
    return f"{base.split('__')[0]}__{next(_fresh)}"


# ---------------------------------------------------------------- encodings used everywhere

NAT = Mu("X", Sum(Unit(), TVar("X")))


def list_type(elem: BaseType) -> BaseType:
    return Mu("X", Sum(Unit(), Prod(elem, TVar("X"))))


def nil() -> Value:
    return Fold(InjL(UnitV()))


def cons(head, tail) -> Value:
    return Fold(InjR(Pair(head, tail)))


def from_pylist(items) -> Value:
    out = nil()
    for item in reversed(list(items)):
        out = cons(item, out)
    return out


def to_pylist(v) -> list:
    out = []
    while isinstance(v, Fold) and isinstance(v.value, InjR):
        out.append(v.value.value.left)
        v = v.value.value.right
    if v != nil():
        raise ValueError("not a closed list value")
    return out
