"""Circular derivations: sequents, rules, back-edges and tree utilities.

Sequents are two-sided, ``upsilon ; theta |- goal``, with every formula
written positively; a left formula stands for its dual in the one-sided
calculus. Left rules are named after the dual connective they introduce
(``with`` for a sum on the left, ``par`` for a product, ``nu`` for a
fixpoint, ``bot`` for unit).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

from ..core import Mu, Prod, Sum, Unit
from .formulas import Address, AddressSupply, Formula

RIGHT_RULES = {"one", "plus1", "plus2", "tensor", "mu"}
LEFT_RULES = {"bot", "with", "par", "nu"}
ALL_RULES = RIGHT_RULES | LEFT_RULES | {"id", "cut", "ex", "be", "trunc"}
LEFT_RULE_FOR = {Unit: "bot", Sum: "with", Prod: "par", Mu: "nu"}
RIGHT_RULE_FOR = {Unit: "one", Prod: "tensor", Mu: "mu"}


class DerivationError(Exception):
    pass


@dataclass(frozen=True)
class Sequent:
    upsilon: tuple = ()
    theta: tuple = ()  # of (variable name, Formula)
    goal: Formula | None = None
    label: str | None = None

    @property
    def context(self) -> tuple:
        """The flat left context: upsilon first, then theta's formulas."""
        return tuple(self.upsilon) + tuple(f for _, f in self.theta)

    def with_label(self, label):
        return replace(self, label=label)


@dataclass(frozen=True)
class Derivation:
    rule: str
    conclusion: Sequent
    premises: tuple = ()
    arg: str | None = None  # variable of ex(x), target of be(f)

    def __post_init__(self):
        if self.rule not in ALL_RULES:
            raise DerivationError(f"unknown rule {self.rule!r}")

    @property
    def label(self):
        return self.conclusion.label

    @property
    def context(self):
        return self.conclusion.context

    @property
    def goal(self):
        return self.conclusion.goal

    def relabel(self, label):
        return replace(self, conclusion=self.conclusion.with_label(label))

    def __iter__(self):
        """Pre-order walk."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.premises))

    def size(self):
        return sum(1 for _ in self)


def flat(context, goal, label=None) -> Sequent:
    return Sequent(tuple(context), (), goal, label)


# ---------------------------------------------------------------- contexts

def remove_formula(context, f: Formula) -> tuple:
    out = list(context)
    for k, g in enumerate(out):
        if g.addr == f.addr:
            del out[k]
            return tuple(out)
    raise DerivationError(f"formula at {f.addr} is not in the context")


def find_formula(context, addr: Address):
    for g in context:
        if g.addr == addr:
            return g
    return None


def left_principal(d: Derivation) -> Formula | None:
    """The context formula a left rule decomposes."""
    if d.rule not in LEFT_RULES:
        return None
    premise_addrs = {g.addr for p in d.premises for g in p.context}
    for g in d.context:
        if g.addr not in premise_addrs:
            return g
    raise DerivationError(f"{d.rule} rule with no principal formula")


# ---------------------------------------------------------------- floor

def floor(d: Derivation) -> Derivation:
    """Erase ``ex`` steps and flatten ``upsilon ; theta`` into one context."""
    if d.rule == "ex":
        inner = floor(d.premises[0])
        return inner.relabel(d.label) if d.label else inner
    return Derivation(d.rule, flat(d.context, d.goal, d.label),
                      tuple(floor(p) for p in d.premises), d.arg)


# ---------------------------------------------------------------- addresses

def atoms_of(d: Derivation) -> set:
    out = set()
    for node in d:
        for f in node.context + ((node.goal,) if node.goal else ()):
            out.add((f.addr.atom, f.addr.dual))
    return out


def map_addresses(d: Derivation, fn) -> Derivation:
    def fix(f):
        return f.at(fn(f.addr))

    def seq(s):
        return Sequent(tuple(fix(f) for f in s.upsilon),
                       tuple((x, fix(f)) for x, f in s.theta),
                       fix(s.goal) if s.goal is not None else None, s.label)

    def go(node):
        return Derivation(node.rule, seq(node.conclusion), tuple(go(p) for p in node.premises), node.arg)

    return go(d)


def rebase(d: Derivation, pairs) -> Derivation:
    """Replace each address prefix ``old`` by ``new`` for ``(old, new)`` in pairs."""
    pairs = list(pairs)

    def fn(a):
        for old, new in pairs:
            if a.has_prefix(old):
                return a.rebase(old, new)
        return a

    return map_addresses(d, fn)


def refresh(d: Derivation, supply: AddressSupply, keep=()) -> Derivation:
    """Give every atom outside ``keep`` a fresh name."""
    keep = set(keep)
    table = {}

    def fn(a):
        key = (a.atom, a.dual)
        if key in keep:
            return a
        if key not in table:
            table[key] = supply.fresh().atom
        return Address(table[key], a.dual, a.path)

    return map_addresses(d, fn)


def max_atom(d: Derivation) -> int:
    return max((atom for atom, _ in atoms_of(d)), default=-1)


# ---------------------------------------------------------------- unfolding

def back_edge_copy(target: Derivation, edge: Derivation, supply: AddressSupply) -> Derivation:
    """A copy of ``target`` moved to the sequent of the back-edge ``edge``."""
    old_ctx, new_ctx = target.context, edge.context
    if len(old_ctx) != len(new_ctx) or not target.goal.same_formula(edge.goal):
        raise DerivationError(f"back-edge {edge.arg!r} does not match its target sequent")
    pairs = [(o.addr, n.addr) for o, n in zip(old_ctx, new_ctx)] + [(target.goal.addr, edge.goal.addr)]
    keep = {(o.atom, o.dual) for o, _ in pairs}
    moved = refresh(target, supply, keep)
    return rebase(moved, pairs)


def unroll(root: Derivation, supply: AddressSupply) -> Derivation:
    """One unfolding of the labeled ``root``: its back-edges become labeled copies.

    The result carries no label at the root, matching the term obtained by
    substituting a fixpoint for its own variable.
    """
    label = root.label
    if label is None:
        raise DerivationError("only a labeled sequent can be unrolled")

    def go(node):
        if node.rule == "be" and node.arg == label:
            return back_edge_copy(root, node, supply)
        if node is not root and node.label == label:
            return node  # shadowed by an inner sequent with the same label
        return replace(node, premises=tuple(go(p) for p in node.premises))

    return go(root).relabel(None)


def unfold(d: Derivation, depth: int, supply: AddressSupply | None = None) -> Derivation:
    """Replace back-edges by copies of their targets ``depth`` times.

    After the last layer labels are dropped and any remaining back-edge
    becomes a ``trunc`` leaf.
    """
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if depth == 0:
        return d
    supply = supply or AddressSupply(max_atom(d) + 1)
    _check_targets(d)

    def go(node, env, budget):
        if node.rule == "be":
            target, left = env[node.arg]
            if left == 0:
                return Derivation("trunc", node.conclusion.with_label(None), (), node.arg)
            copy = back_edge_copy(target, node, supply)
            return go(copy, env, left - 1)
        if node.label is not None:
            env = {**env, node.label: (node, budget)}
        return Derivation(node.rule, node.conclusion.with_label(None),
                          tuple(go(p, env, budget) for p in node.premises), node.arg)

    return go(d, {}, depth)


def _check_targets(d: Derivation):
    def go(node, seen):
        if node.rule == "be" and node.arg not in seen:
            raise DerivationError(f"dangling back-edge {node.arg!r}")
        if node.label is not None:
            seen = seen | {node.label}
        for p in node.premises:
            go(p, seen)

    go(d, frozenset())


def prefix(d: Derivation, height: int) -> Derivation:
    """Cut the tree at ``height`` rule applications; cut points become ``trunc``."""
    if height == 0:
        return Derivation("trunc", d.conclusion.with_label(None))
    return Derivation(d.rule, d.conclusion.with_label(None),
                      tuple(prefix(p, height - 1) for p in d.premises), d.arg)


def height(d: Derivation) -> int:
    return 1 + max((height(p) for p in d.premises), default=0)


# ---------------------------------------------------------------- shapes

def is_purely_positive(d: Derivation) -> bool:
    """Finite, cut-free, and built only from right rules and axioms."""
    for node in d:
        if node.rule == "id":
            continue
        if node.rule not in RIGHT_RULES:
            return False
    return True


def is_closed_value_proof(d: Derivation) -> bool:
    """A purely positive proof with an empty context: the image of a closed value."""
    return not d.context and is_purely_positive(d)


def back_edges(d: Derivation) -> list:
    return [node for node in d if node.rule == "be"]


# ---------------------------------------------------------------- equality

def equal_modulo_addresses(d1: Derivation, d2: Derivation) -> bool:
    """Structural equality up to a renaming of addresses.

    Binding ``a`` to ``b`` also binds every extension ``a.w`` to ``b.w``, so
    a formula and its subformulas move together.
    """
    return _Matcher().run(d1, d2)


class _Matcher:
    def __init__(self):
        self.fwd, self.bwd = {}, {}

    @staticmethod
    def _lookup(table, a: Address):
        for k in range(len(a.path), -1, -1):
            root = Address(a.atom, a.dual, a.path[:k])
            if root in table:
                return table[root].extend(a.path[k:])
        return None

    def bind(self, a: Address, b: Address) -> bool:
        there, back = self._lookup(self.fwd, a), self._lookup(self.bwd, b)
        if there is not None or back is not None:
            return there == b and back == a
        self.fwd[a], self.bwd[b] = b, a
        return True

    def formula(self, f, g) -> bool:
        return f.same_formula(g) and self.bind(f.addr, g.addr)

    def run(self, d1, d2) -> bool:
        pairs = []
        stack = [(d1, d2)]
        while stack:
            a, b = stack.pop()
            if (a.rule, a.arg, a.label, len(a.premises)) != (b.rule, b.arg, b.label, len(b.premises)):
                return False
            if (a.goal is None) != (b.goal is None):
                return False
            if a.goal is not None and not self.formula(a.goal, b.goal):
                return False
            if len(a.context) != len(b.context):
                return False
            pairs.append((a, b))
            stack.extend(reversed(list(zip(a.premises, b.premises))))
        # left principals are determined by the goals seen so far; bind them first
        for a, b in pairs:
            pa, pb = left_principal(a), left_principal(b)
            if pa is not None and not self.formula(pa, pb):
                return False
        for a, b in pairs:
            if not self.context(a.context, b.context):
                return False
        return True

    def context(self, c1, c2) -> bool:
        rest1, rest2 = [], list(c2)
        for f in c1:
            target = self._lookup(self.fwd, f.addr)
            if target is None:
                rest1.append(f)
                continue
            hit = next((g for g in rest2 if g.addr == target), None)
            if hit is None or not f.same_formula(hit):
                return False
            rest2.remove(hit)
        for f in rest1:
            hit = next((g for g in rest2 if self._lookup(self.bwd, g.addr) is None and f.same_formula(g)), None)
            if hit is None or not self.bind(f.addr, hit.addr):
                return False
            rest2.remove(hit)
        return not rest2


# ---------------------------------------------------------------- well-formedness

def check_well_formed(d: Derivation) -> None:
    """Raise DerivationError unless every rule application has a legal shape."""
    _check_node(d, ())


def _same_multiset(c1, c2):
    return Counter(f.addr for f in c1) == Counter(f.addr for f in c2) and \
        all(f.same_formula(find_formula(c2, f.addr)) for f in c1)


def _fail(node, why):
    raise DerivationError(f"{node.rule}: {why}")


def _check_node(node, labels):
    if node.label is not None:
        if node.label in labels:
            _fail(node, f"label {node.label!r} occurs twice on one path")
        labels = labels + (node.label,)
    rule, ctx, goal, ps = node.rule, node.context, node.goal, node.premises
    arity = {"id": 0, "one": 0, "be": 0, "trunc": 0, "cut": 2, "tensor": 2, "with": 2}.get(rule, 1)
    if len(ps) != arity:
        _fail(node, f"expected {arity} premises, found {len(ps)}")
    if rule == "id":
        if len(ctx) != 1 or not ctx[0].same_formula(goal):
            _fail(node, "axiom needs one context formula equal to the goal")
    elif rule == "one":
        if ctx or not isinstance(goal.type, Unit):
            _fail(node, "unit needs an empty context and goal 1")
    elif rule == "be":
        if node.arg not in labels:
            _fail(node, f"dangling back-edge {node.arg!r}")
    elif rule in ("plus1", "plus2", "mu"):
        expect = Sum if rule != "mu" else Mu
        if not isinstance(goal.type, expect):
            _fail(node, "goal has the wrong connective")
        child = goal.children[{"plus1": 0, "plus2": 1, "mu": 0}[rule]]
        if ps[0].goal != child or not _same_multiset(ps[0].context, ctx):
            _fail(node, "premise does not follow the address lifting laws")
    elif rule == "tensor":
        if not isinstance(goal.type, Prod):
            _fail(node, "goal is not a product")
        if (ps[0].goal, ps[1].goal) != goal.children:
            _fail(node, "premise goals are not the two components")
        if not _same_multiset(ps[0].context + ps[1].context, ctx):
            _fail(node, "premise contexts do not split the conclusion's")
    elif rule in LEFT_RULES:
        principal = left_principal(node)
        expect = {"bot": Unit, "with": Sum, "par": Prod, "nu": Mu}[rule]
        if not isinstance(principal.type, expect):
            _fail(node, "principal formula has the wrong connective")
        rest = remove_formula(ctx, principal)
        kids = principal.children
        if rule == "par":
            wanted = [kids]
        elif rule == "with":
            wanted = [(kids[0],), (kids[1],)]
        elif rule == "nu":
            wanted = [kids]
        else:
            wanted = [()]
        for p, extra in zip(ps, wanted):
            if p.goal != goal or not _same_multiset(p.context, tuple(extra) + rest):
                _fail(node, "premise does not follow the address lifting laws")
    elif rule == "cut":
        left, right = ps
        cut = left.goal
        if find_formula(right.context, cut.addr) is None:
            _fail(node, "cut formula missing from the right premise")
        if right.goal != goal:
            _fail(node, "goal differs from the right premise's")
        if not _same_multiset(left.context + remove_formula(right.context, cut), ctx):
            _fail(node, "premise contexts do not split the conclusion's")
    elif rule == "ex":
        up, th = node.conclusion.upsilon, node.conclusion.theta
        pu, pt = ps[0].conclusion.upsilon, ps[0].conclusion.theta
        if not up or tuple(pu) != tuple(up[1:]) or tuple(pt) != tuple(th) + ((node.arg, up[0]),):
            _fail(node, "exchange must move the first formula into theta")
    for p in ps:
        _check_node(p, labels)


def check_bouncing_cuts(d: Derivation) -> None:
    """Every back-edge must be the right premise of a cut."""
    def go(node, parent_ok):
        if node.rule == "be" and not parent_ok:
            raise DerivationError(f"back-edge {node.arg!r} is not under a bouncing cut")
        for k, p in enumerate(node.premises):
            go(p, node.rule == "cut" and k == 1)

    go(d, False)
