"""Hand transcriptions of the two printed derivations used as goldens.

Addresses: the input formula sits at a0 and the output at a1. The tensor
rule lists the premise proving the left component first.
"""
from revisos.core import Mu, Prod, Sum, TVar, Unit
from revisos.proofs.derivation import Derivation, flat
from revisos.proofs.formulas import Address, Formula

A, B, C = TVar("A"), TVar("B"), TVar("C")
IN, OUT = Address(0), Address(1)
NAT = Mu("X", Sum(Unit(), TVar("X")))


def at(t, root, path=""):
    return Formula(t, root.extend(path))


def rule(name, ctx, goal, *premises):
    return Derivation(name, flat(ctx, goal), tuple(premises))


def swap_proof():
    src, dst = Prod(A, B), Prod(B, A)
    a, b = at(A, IN, "l"), at(B, IN, "r")
    return rule("par", [at(src, IN)], at(dst, OUT),
                rule("tensor", [a, b], at(dst, OUT),
                     rule("id", [b], at(B, OUT, "l")),
                     rule("id", [a], at(A, OUT, "r"))))


def iso1_proof():
    src, dst = Sum(A, Sum(B, C)), Sum(C, Sum(A, B))
    f, g, h = at(A, IN, "l"), at(B, IN, "rl"), at(C, IN, "rr")
    goal = at(dst, OUT)
    inner = at(dst.right, OUT, "r")
    first = rule("plus2", [f], goal, rule("plus1", [f], inner, rule("id", [f], at(A, OUT, "rl"))))
    second = rule("plus2", [g], goal, rule("plus2", [g], inner, rule("id", [g], at(B, OUT, "rr"))))
    third = rule("plus1", [h], goal, rule("id", [h], at(C, OUT, "l")))
    return rule("with", [at(src, IN)], goal,
                first,
                rule("with", [at(src.right, IN, "r")], goal, second, third))


def loop_by_hand():
    """The floored translation of ``fix f. { x <-> let y = f x in y }`` at N <-> N."""
    a0, a1, a2, a3 = (Address(k) for k in range(4))
    inner = Derivation("cut", flat([at(NAT, a0)], at(NAT, a3)), (
        Derivation("id", flat([at(NAT, a0)], at(NAT, a2))),
        Derivation("be", flat([at(NAT, a2)], at(NAT, a3)), (), "f")))
    return Derivation("cut", flat([at(NAT, a0)], at(NAT, a1), "f"), (
        inner, Derivation("id", flat([at(NAT, a3)], at(NAT, a1)))))
