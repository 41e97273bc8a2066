"""Reversible primitive permutations: a reference interpreter, inversion,
and a compiler into isos over Z = 1 + (npos + npos)."""
from __future__ import annotations

import random
import re
from dataclasses import dataclass

from .core import (
    Clauses, Fix, Fold, InjL, InjR, IsoType, IsoVar, Let, Mu, Pair, Sum, TVar, Unit,
    UnitV, Val, VarV, tensor, tuple_pattern, tuple_value,
)
from .invert import invert

NPOS = Mu("X", Sum(Unit(), TVar("X")))
Z = Sum(Unit(), Sum(NPOS, NPOS))


# ---------------------------------------------------------------- syntax

class RppFun:
    def __str__(self):
        return to_text(self)


@dataclass(frozen=True)
class S(RppFun):
    pass


@dataclass(frozen=True)
class P(RppFun):
    pass


@dataclass(frozen=True)
class Id(RppFun):
    pass


@dataclass(frozen=True)
class Sign(RppFun):
    pass


@dataclass(frozen=True)
class Swap(RppFun):
    pass


@dataclass(frozen=True)
class Seq(RppFun):
    first: RppFun
    second: RppFun


@dataclass(frozen=True)
class Par(RppFun):
    left: RppFun
    right: RppFun


@dataclass(frozen=True)
class It(RppFun):
    body: RppFun


@dataclass(frozen=True)
class If(RppFun):
    pos: RppFun
    zero: RppFun
    neg: RppFun


@dataclass(frozen=True)
class Perm(RppFun):
    perm: tuple  # 1-based: output i takes input perm[i-1]

    def __post_init__(self):
        object.__setattr__(self, "perm", tuple(self.perm))
        if sorted(self.perm) != list(range(1, len(self.perm) + 1)):
            raise ValueError(f"not a permutation of 1..{len(self.perm)}: {self.perm}")


@dataclass(frozen=True)
class Weaken(RppFun):
    body: RppFun
    extra: int

    def __post_init__(self):
        if self.extra < 1:
            raise ValueError("weakening adds at least one wire")


class ArityError(ValueError):
    pass


def arity(f) -> int:
    if isinstance(f, (S, P, Id, Sign)):
        return 1
    if isinstance(f, Swap):
        return 2
    if isinstance(f, Seq):
        a, b = arity(f.first), arity(f.second)
        if a != b:
            raise ArityError(f"sequential composition of arities {a} and {b}")
        return a
    if isinstance(f, Par):
        return arity(f.left) + arity(f.right)
    if isinstance(f, It):
        return arity(f.body) + 1
    if isinstance(f, If):
        arities = {arity(f.pos), arity(f.zero), arity(f.neg)}
        if len(arities) != 1:
            raise ArityError(f"selection branches have arities {sorted(arities)}")
        return arities.pop() + 1
    if isinstance(f, Perm):
        return len(f.perm)
    if isinstance(f, Weaken):
        return arity(f.body) + f.extra
    raise TypeError(f"not an RPP function: {f!r}")


# ---------------------------------------------------------------- reference semantics

def rpp_eval(f, xs) -> list:
    xs = list(xs)
    if len(xs) != arity(f):
        raise ArityError(f"{to_text(f)} has arity {arity(f)}, got {len(xs)} inputs")
    return _run(f, xs)


def _run(f, xs):
    if isinstance(f, S):
        return [xs[0] + 1]
    if isinstance(f, P):
        return [xs[0] - 1]
    if isinstance(f, Id):
        return xs
    if isinstance(f, Sign):
        return [-xs[0]]
    if isinstance(f, Swap):
        return [xs[1], xs[0]]
    if isinstance(f, Seq):
        return _run(f.second, _run(f.first, xs))
    if isinstance(f, Par):
        k = arity(f.left)
        return _run(f.left, xs[:k]) + _run(f.right, xs[k:])
    if isinstance(f, It):
        body, count = xs[:-1], xs[-1]
        for _ in range(abs(count)):
            body = _run(f.body, body)
        return body + [count]
    if isinstance(f, If):
        body, test = xs[:-1], xs[-1]
        branch = f.pos if test > 0 else f.zero if test == 0 else f.neg
        return _run(branch, body) + [test]
    if isinstance(f, Perm):
        return [xs[i - 1] for i in f.perm]
    if isinstance(f, Weaken):
        k = arity(f.body)
        return _run(f.body, xs[:k]) + xs[k:]
    raise TypeError(f"not an RPP function: {f!r}")


def rpp_invert(f):
    if isinstance(f, S):
        return P()
    if isinstance(f, P):
        return S()
    if isinstance(f, (Id, Sign, Swap)):
        return f
    if isinstance(f, Seq):
        return Seq(rpp_invert(f.second), rpp_invert(f.first))
    if isinstance(f, Par):
        return Par(rpp_invert(f.left), rpp_invert(f.right))
    if isinstance(f, It):
        return It(rpp_invert(f.body))
    if isinstance(f, If):
        return If(rpp_invert(f.pos), rpp_invert(f.zero), rpp_invert(f.neg))
    if isinstance(f, Perm):
        inverse = [0] * len(f.perm)
        for i, j in enumerate(f.perm, start=1):
            inverse[j - 1] = i
        return Perm(tuple(inverse))
    if isinstance(f, Weaken):
        return Weaken(rpp_invert(f.body), f.extra)
    raise TypeError(f"not an RPP function: {f!r}")


# ---------------------------------------------------------------- integers as values

def encode_npos(n: int):
    if n < 1:
        raise ValueError("npos encodes strictly positive integers")
    v = Fold(InjL(UnitV()))
    for _ in range(n - 1):
        v = Fold(InjR(v))
    return v


def decode_npos(v) -> int:
    n = 0
    while isinstance(v, Fold) and isinstance(v.value, InjR):
        n += 1
        v = v.value.value
    if v != Fold(InjL(UnitV())):
        raise ValueError(f"malformed positive numeral: {v!r}")
    return n + 1


def encode_int(z: int):
    if z == 0:
        return InjL(UnitV())
    if z > 0:
        return InjR(InjL(encode_npos(z)))
    return InjR(InjR(encode_npos(-z)))


def decode_int(v) -> int:
    if v == InjL(UnitV()):
        return 0
    if isinstance(v, InjR) and isinstance(v.value, InjL):
        return decode_npos(v.value.value)
    if isinstance(v, InjR) and isinstance(v.value, InjR):
        return -decode_npos(v.value.value)
    raise ValueError(f"malformed integer encoding: {v!r}")


def encode_vec(xs):
    return tuple_value(*[encode_int(x) for x in xs])


def decode_vec(v, k: int) -> list:
    out = []
    for _ in range(k - 1):
        if not isinstance(v, Pair):
            raise ValueError("malformed integer tuple")
        out.append(decode_int(v.left))
        v = v.right
    out.append(decode_int(v))
    return out


def z_power(k: int):
    return tensor(*([Z] * k))


# ---------------------------------------------------------------- compilation

def _names(prefix, k):
    return [f"{prefix}{i}" for i in range(1, k + 1)]


def _vals(names):
    return tuple_value(*[VarV(n) for n in names])


def _pat(names):
    return tuple_pattern(*names)


def _iso(clauses, k):
    return Clauses(tuple(clauses), IsoType(z_power(k), z_power(k)))


def _succ():
    one = Fold(InjL(UnitV()))
    x = VarV("x")
    return [
        (InjL(UnitV()), Val(InjR(InjL(one)))),
        (InjR(InjL(x)), Val(InjR(InjL(Fold(InjR(x)))))),
        (InjR(InjR(one)), Val(InjL(UnitV()))),
        (InjR(InjR(Fold(InjR(x)))), Val(InjR(InjR(x)))),
    ]


def compile_rpp(f):
    """The iso simulating ``f``, typed Z^k <-> Z^k."""
    k = arity(f)
    if isinstance(f, S):
        return _iso(_succ(), 1)
    if isinstance(f, P):
        return invert(_iso(_succ(), 1))
    if isinstance(f, Sign):
        x = VarV("x")
        return _iso([(InjR(InjL(x)), Val(InjR(InjR(x)))),
                     (InjR(InjR(x)), Val(InjR(InjL(x)))),
                     (InjL(UnitV()), Val(InjL(UnitV())))], 1)
    if isinstance(f, Id):
        return _iso([(VarV("x"), Val(VarV("x")))], 1)
    if isinstance(f, Swap):
        x, y = VarV("x"), VarV("y")
        return _iso([(Pair(x, y), Val(Pair(y, x)))], 2)
    if isinstance(f, Seq):
        xs, ys, zs = _names("x", k), _names("y", k), _names("z", k)
        body = Let(_pat(ys), compile_rpp(f.first), _pat(xs),
                   Let(_pat(zs), compile_rpp(f.second), _pat(ys), Val(_vals(zs))))
        return _iso([(_vals(xs), body)], k)
    if isinstance(f, Par):
        j = arity(f.left)
        xs, ys = _names("x", j), _names("y", k - j)
        xs2, ys2 = [x + "'" for x in xs], [y + "'" for y in ys]
        body = Let(_pat(xs2), compile_rpp(f.left), _pat(xs),
                   Let(_pat(ys2), compile_rpp(f.right), _pat(ys), Val(_vals(xs2 + ys2))))
        return _iso([(_vals(xs + ys), body)], k)
    if isinstance(f, It):
        return _compile_it(f, k)
    if isinstance(f, If):
        xs, xs2 = _names("x", k - 1), [x + "'" for x in _names("x", k - 1)]
        z = VarV("z")
        clauses = []
        for branch, tag in ((f.pos, InjR(InjL(z))), (f.zero, InjL(UnitV())),
                            (f.neg, InjR(InjR(z)))):
            body = Let(_pat(xs2), compile_rpp(branch), _pat(xs),
                       Val(tuple_value(*[VarV(n) for n in xs2], tag)))
            clauses.append((tuple_value(*[VarV(n) for n in xs], tag), body))
        return _iso(clauses, k)
    if isinstance(f, Perm):
        xs = _names("x", k)
        return _iso([(_vals(xs), Val(_vals([xs[i - 1] for i in f.perm])))], k)
    if isinstance(f, Weaken):
        j = arity(f.body)
        xs = _names("x", k)
        xs2 = [x + "'" for x in xs[:j]]
        body = Let(_pat(xs2), compile_rpp(f.body), _pat(xs[:j]), Val(_vals(xs2 + xs[j:])))
        return _iso([(_vals(xs), body)], k)
    raise TypeError(f"not an RPP function: {f!r}")


def compile_aux(body_fun):
    """The fixpoint iterating ``isos(f)`` n times on (x1..xk, n) with n : npos."""
    k = arity(body_fun)
    depth = _it_depth(body_fun)
    name = f"g{depth}" if depth else "g"  # nested iterations get distinct fixpoint names
    omega = compile_rpp(body_fun)
    xs, ys, zs = _names("x", k), _names("y", k), _names("z", k)
    one = Fold(InjL(UnitV()))
    n, n2 = VarV("n"), VarV("n'")
    base = (tuple_value(*[VarV(x) for x in xs], one),
            Let(_pat(ys), omega, _pat(xs), Val(tuple_value(*[VarV(y) for y in ys], one))))
    step = (tuple_value(*[VarV(x) for x in xs], Fold(InjR(n))),
            Let(_pat(ys), omega, _pat(xs),
                Let(_pat(zs + ["n'"]), IsoVar(name), _pat(ys + ["n"]),
                    Val(tuple_value(*[VarV(z) for z in zs], Fold(InjR(n2)))))))
    aux_type = tensor(*([Z] * k), NPOS)
    return Fix(name, Clauses((base, step)), IsoType(aux_type, aux_type))


def _it_depth(f) -> int:
    inner = max((_it_depth(getattr(f, a)) for a in ("first", "second", "left", "right", "body",
                                                      "pos", "zero", "neg") if hasattr(f, a)), default=0)
    return inner + 1 if isinstance(f, It) else inner


def _compile_it(f, k):
    aux = compile_aux(f.body)
    xs, ys = _names("x", k - 1), _names("y", k - 1)
    z, z2 = VarV("z"), VarV("z'")

    def tagged(names, tag):
        return tuple_value(*[VarV(x) for x in names], tag)

    clauses = [(tagged(xs, InjL(UnitV())), Val(tagged(xs, InjL(UnitV()))))]
    for wrap in (lambda v: InjR(InjL(v)), lambda v: InjR(InjR(v))):
        clauses.append((tagged(xs, wrap(z)),
                        Let(_pat(ys + ["z'"]), aux, _pat(xs + ["z"]), Val(tagged(ys, wrap(z2))))))
    return _iso(clauses, k)


# ---------------------------------------------------------------- textual syntax

_RPP_TOKEN = re.compile(r"\s*(\|\||[;\[\],()]|\d+|[A-Za-z]+)")


class RppSyntaxError(ValueError):
    pass


def parse_rpp(text: str):
    tokens, pos = [], 0
    text = text.strip()
    while pos < len(text):
        m = _RPP_TOKEN.match(text, pos)
        if m is None:
            raise RppSyntaxError(f"unexpected character {text[pos]!r} at offset {pos}")
        tokens.append(m.group(1))
        pos = m.end()
    tokens.append("")
    state = {"i": 0}

    def peek():
        return tokens[state["i"]]

    def eat(expected=None):
        tok = tokens[state["i"]]
        if expected is not None and tok != expected:
            raise RppSyntaxError(f"expected {expected!r}, found {tok or 'end of input'!r}")
        state["i"] += 1
        return tok

    def seq():
        left = par()
        if peek() == ";":
            eat()
            return Seq(left, seq())
        return left

    def par():
        left = atom()
        if peek() == "||":
            eat()
            return Par(left, par())
        return left

    def atom():
        tok = eat()
        simple = {"S": S, "P": P, "Id": Id, "Sign": Sign, "Swap": Swap}
        if tok in simple:
            return simple[tok]()
        if tok == "(":
            inner = seq()
            eat(")")
            return inner
        if tok == "It":
            eat("[")
            inner = seq()
            eat("]")
            return It(inner)
        if tok == "If":
            eat("[")
            branches = [seq()]
            for _ in range(2):
                eat(",")
                branches.append(seq())
            eat("]")
            return If(*branches)
        if tok == "Perm":
            eat("[")
            nums = [int(eat())]
            while peek() == ",":
                eat()
                nums.append(int(eat()))
            eat("]")
            return Perm(tuple(nums))
        if tok == "Weaken":
            eat("[")
            inner = seq()
            eat(",")
            n = eat()
            if not n.isdigit():
                raise RppSyntaxError(f"expected a wire count, found {n!r}")
            eat("]")
            return Weaken(inner, int(n))
        raise RppSyntaxError(f"unexpected {tok or 'end of input'!r}")

    out = seq()
    if peek() != "":
        raise RppSyntaxError(f"trailing input at {peek()!r}")
    arity(out)
    return out


def to_text(f, ctx="seq") -> str:
    if isinstance(f, (S, P, Id, Sign, Swap)):
        return type(f).__name__
    if isinstance(f, Seq):
        s = f"{to_text(f.first, 'par')} ; {to_text(f.second, 'seq')}"
        return s if ctx == "seq" else f"({s})"
    if isinstance(f, Par):
        s = f"{to_text(f.left, 'atom')} || {to_text(f.right, 'par')}"
        return s if ctx in ("seq", "par") else f"({s})"
    if isinstance(f, It):
        return f"It[{to_text(f.body)}]"
    if isinstance(f, If):
        return f"If[{to_text(f.pos)}, {to_text(f.zero)}, {to_text(f.neg)}]"
    if isinstance(f, Perm):
        return f"Perm[{','.join(map(str, f.perm))}]"
    if isinstance(f, Weaken):
        return f"Weaken[{to_text(f.body)}, {f.extra}]"
    raise TypeError(f"not an RPP function: {f!r}")


# ---------------------------------------------------------------- random functions

def random_rpp(rng: random.Random, depth: int = 4, arity_: int | None = None,
               max_arity: int = 4, it_budget: int = 2):
    """A random function; leaves and combinators are drawn 60/40, ``It`` nests at most twice."""
    k = arity_ if arity_ is not None else rng.randint(1, max_arity)
    if depth <= 0 or rng.random() < 0.6:
        return _random_leaf(rng, k)
    options = ["seq"]
    if k >= 2:
        options += ["par", "if", "weaken"]
        if it_budget > 0:
            options.append("it")
    kind = rng.choice(options)
    sub = depth - 1
    if kind == "seq":
        return Seq(random_rpp(rng, sub, k, max_arity, it_budget),
                   random_rpp(rng, sub, k, max_arity, it_budget))
    if kind == "par":
        j = rng.randint(1, k - 1)
        return Par(random_rpp(rng, sub, j, max_arity, it_budget),
                   random_rpp(rng, sub, k - j, max_arity, it_budget))
    if kind == "it":
        return It(random_rpp(rng, sub, k - 1, max_arity, it_budget - 1))
    if kind == "if":
        return If(*(random_rpp(rng, sub, k - 1, max_arity, it_budget) for _ in range(3)))
    j = rng.randint(1, k - 1)
    return Weaken(random_rpp(rng, sub, j, max_arity, it_budget), k - j)


def _random_leaf(rng, k):
    if k == 1:
        return rng.choice([S(), P(), Id(), Sign()])
    if k == 2 and rng.random() < 0.5:
        return Swap()
    perm = list(range(1, k + 1))
    rng.shuffle(perm)
    return Perm(tuple(perm))


def simulate_rpp(f, xs, fuel=None):
    """Run ``compile_rpp(f)`` on the encoding of ``xs`` and decode the result."""
    from .eval import DEFAULT_FUEL, apply_iso
    out = apply_iso(compile_rpp(f), encode_vec(xs), fuel or DEFAULT_FUEL)
    return decode_vec(out, arity(f))
