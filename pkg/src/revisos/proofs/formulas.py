"""Formula occurrences: a closed type placed at an address.

An address is an atom (a fresh integer with a polarity bit) followed by a
word over ``l``, ``r`` and ``i``. A formula's children sit at the same
address extended by one letter, so only the root address is stored.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from ..core import BaseType, Mu, Prod, Sum, TVar, Unit, free_type_vars, type_unfold


@dataclass(frozen=True, order=True)
class Address:
    atom: int
    dual: bool = False
    path: str = ""

    def __post_init__(self):
        if set(self.path) - set("lri"):
            raise ValueError(f"bad address path {self.path!r}")

    def extend(self, letters: str) -> "Address":
        return Address(self.atom, self.dual, self.path + letters)

    def negate(self) -> "Address":
        return Address(self.atom, not self.dual, self.path)

    def has_prefix(self, other: "Address") -> bool:
        return (self.atom, self.dual) == (other.atom, other.dual) and self.path.startswith(other.path)

    def rebase(self, old: "Address", new: "Address") -> "Address":
        """Swap prefix ``old`` for ``new``; assumes ``has_prefix(old)``."""
        return Address(new.atom, new.dual, new.path + self.path[len(old.path):])

    def __str__(self):
        head = f"a{self.atom}{'^' if self.dual else ''}"
        return f"{head}:{self.path}" if self.path else head

    @classmethod
    def parse(cls, text: str) -> "Address":
        head, _, path = text.partition(":")
        if not head.startswith("a"):
            raise ValueError(f"bad address {text!r}")
        dual = head.endswith("^")
        return cls(int(head[1:-1] if dual else head[1:]), dual, path)


class AddressSupply:
    """Hands out fresh atomic addresses; one per translation run."""

    def __init__(self, start: int = 0):
        self._counter = itertools.count(start)

    def fresh(self) -> Address:
        return Address(next(self._counter))


POSITIVE_SHAPE = {Unit: "one", Sum: "plus", Prod: "tensor", Mu: "mu", TVar: "atom"}
NEGATIVE_SHAPE = {Unit: "bot", Sum: "with", Prod: "par", Mu: "nu", TVar: "atom"}


@dataclass(frozen=True)
class Formula:
    """``type`` at ``addr``; ``negated`` selects the dual connective."""

    type: BaseType
    addr: Address
    negated: bool = False

    @property
    def shape(self) -> str:
        table = NEGATIVE_SHAPE if self.negated else POSITIVE_SHAPE
        return table[type(self.type)]

    @property
    def children(self) -> tuple:
        t = self.type
        if isinstance(t, (Sum, Prod)):
            return (Formula(t.left, self.addr.extend("l"), self.negated),
                    Formula(t.right, self.addr.extend("r"), self.negated))
        if isinstance(t, Mu):
            return (Formula(type_unfold(t), self.addr.extend("i"), self.negated),)
        return ()

    def child(self, letter: str) -> "Formula":
        index = {"l": 0, "r": 1, "i": 0}[letter]
        return self.children[index]

    def dual(self) -> "Formula":
        return Formula(self.type, self.addr.negate(), not self.negated)

    def at(self, addr: Address) -> "Formula":
        return Formula(self.type, addr, self.negated)

    def same_formula(self, other: "Formula") -> bool:
        """Equal as formulas, ignoring the occurrence."""
        return self.type == other.type and self.negated == other.negated


def type_to_formula(a: BaseType, addr: Address) -> Formula:
    """Embed a type as a positive formula; free type variables become atoms."""
    if not isinstance(a, BaseType):
        raise TypeError(f"not a type: {a!r}")
    return Formula(a, addr)


def is_atomic(f: Formula) -> bool:
    return isinstance(f.type, TVar)


def has_atoms(a: BaseType) -> bool:
    return bool(free_type_vars(a))
