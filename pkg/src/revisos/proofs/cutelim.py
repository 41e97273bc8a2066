"""Cut elimination on floored derivations, and its lockstep with evaluation.

A cut is reduced only when its left premise is a value proof (purely
positive). The default strategy follows the evaluation contexts of the
explicit system, so every evaluation step is matched by a short sequence of
reduction steps; ``simulate`` checks this on every intermediate term.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..core import App, LetT, PPair
from ..eval import System, step_with_info
from ..typecheck import EMPTY_PSI, TermCtx, type_term
from .derivation import (
    LEFT_RULES, RIGHT_RULES, Derivation, DerivationError, back_edge_copy, equal_modulo_addresses,
    find_formula, flat, floor, is_purely_positive, left_principal, max_atom, rebase, remove_formula, unroll,
)
from .formulas import AddressSupply
from .translate import translate_term


class NoRedex:
    """Returned by ``cut_step`` when nothing can be reduced."""

    def __init__(self, reason: str = "no reducible cut"):
        self.reason = reason

    def __bool__(self):
        return False

    def __repr__(self):
        return f"NoRedex({self.reason!r})"


class Reducer:
    """One reduction step at a given node; counts steps and supplies fresh atoms."""

    def __init__(self, supply: AddressSupply):
        self.supply = supply
        self.steps = 0

    # -- building blocks
    @staticmethod
    def cut(left: Derivation, right: Derivation) -> Derivation:
        ctx = left.context + remove_formula(right.context, left.goal)
        return Derivation("cut", flat(ctx, right.goal), (left, right))

    def reduce(self, node: Derivation, targets=None) -> Derivation | None:
        """The contractum of the cut ``node``, or None when it is not a redex."""
        if node.rule != "cut":
            return None
        left, right = node.premises
        cut_f = left.goal
        if right.rule == "id":
            self.steps += 1
            return rebase(left, [(cut_f.addr, right.goal.addr)]).relabel(node.label)
        if not is_purely_positive(left):
            return None
        if left.rule == "id":
            self.steps += 1
            return rebase(right, [(cut_f.addr, left.context[0].addr)]).relabel(node.label)
        if right.label is not None:
            self.steps += 1
            return replace(node, premises=(left, unroll(right, self.supply)))
        if right.rule == "be":
            target = (targets or {}).get(right.arg)
            if target is None:
                return None
            self.steps += 1
            return replace(node, premises=(left, back_edge_copy(target, right, self.supply)))
        if right.rule in LEFT_RULES:
            principal = left_principal(right)
            if principal.addr == cut_f.addr:
                return self._principal(node, left, right)
            return self._commute(node, left, right)
        if right.rule in RIGHT_RULES:
            self.steps += 1
            premises = tuple(self.cut(left, p) if find_formula(p.context, cut_f.addr) else p
                             for p in right.premises)
            return Derivation(right.rule, node.conclusion, premises)
        if right.rule == "cut":
            inner_l, inner_r = right.premises
            self.steps += 1
            if find_formula(inner_l.context, cut_f.addr):
                return replace(self.cut(self.cut(left, inner_l), inner_r), conclusion=node.conclusion)
            return replace(self.cut(inner_l, self.cut(left, inner_r)), conclusion=node.conclusion)
        return None

    def _principal(self, node, left, right):
        pair = (left.rule, right.rule)
        self.steps += 1
        if pair == ("one", "bot"):
            out = right.premises[0]
        elif pair in (("plus1", "with"), ("plus2", "with")):
            out = self.cut(left.premises[0], right.premises[0 if left.rule == "plus1" else 1])
        elif pair == ("mu", "nu"):
            out = self.cut(left.premises[0], right.premises[0])
        elif pair == ("tensor", "par"):
            first, second = left.premises
            out = self.cut(first, self.cut(second, right.premises[0]))
        else:
            raise DerivationError(f"cut between {left.rule} and {right.rule} on the same formula")
        return replace(out, conclusion=node.conclusion)

    def _commute(self, node, left, right):
        self.steps += 1
        premises = tuple(self.cut(left, p) for p in right.premises)
        return Derivation(right.rule, node.conclusion, premises)

    # -- composite moves used by the simulation
    def match(self, node):
        """Run a value through a clause set: principal steps and commutations.

        In a tensor split the second component is pushed through first, so the
        first component's cut ends up outermost.
        """
        if node.rule != "cut":
            return node
        left, right = node.premises
        if not is_purely_positive(left) or right.rule not in LEFT_RULES or right.label is not None:
            return node
        if left_principal(right).addr != left.goal.addr:
            out = self._commute(node, left, right)
            return replace(out, premises=tuple(self.match(p) for p in out.premises))
        out = self._principal(node, left, right)
        if left.rule == "tensor":
            first, inner = out.premises
            return self.match(replace(out, premises=(first, self.match(inner))))
        return self.match(out)

    def sink(self, node):
        """Commute a cut up through left rules that do not touch it."""
        if node.rule != "cut":
            return node
        left, right = node.premises
        if not is_purely_positive(left) or right.rule not in LEFT_RULES:
            return node
        if left_principal(right).addr == left.goal.addr:
            return node
        out = self._commute(node, left, right)
        return replace(out, premises=tuple(self.sink(p) for p in out.premises))


# ---------------------------------------------------------------- locating redexes

def _get(d: Derivation, path):
    for k in path:
        d = d.premises[k]
    return d


def _put(d: Derivation, path, new: Derivation) -> Derivation:
    if not path:
        return new
    k = path[0]
    premises = list(d.premises)
    premises[k] = _put(premises[k], path[1:], new)
    return replace(d, premises=tuple(premises))


def _targets_on(d: Derivation, path):
    env = {}
    node = d
    for k in path:
        if node.label is not None:
            env[node.label] = node
        node = node.premises[k]
    return env


def find_redex(d: Derivation, path=()):
    """Path to the cut the default strategy reduces next, or None."""
    reducer = Reducer(AddressSupply())
    return _find(d, tuple(path), reducer)


def _find(node, path, reducer):
    if node.rule == "cut":
        left, right = node.premises
        if not is_purely_positive(left):
            return _find(left, path + (0,), reducer)
        if right.rule == "cut" and is_purely_positive(right.premises[0]):
            hit = _find(right, path + (1,), reducer)
            if hit is not None:
                return hit
        return path if _reducible(node) else None
    if node.rule in RIGHT_RULES:
        for k, p in enumerate(node.premises):
            hit = _find(p, path + (k,), reducer)
            if hit is not None:
                return hit
    return None


def _reducible(node):
    left, right = node.premises
    if right.rule == "id" or left.rule == "id":
        return True
    if right.label is not None:
        return True
    return right.rule in LEFT_RULES | RIGHT_RULES | {"cut"}


def cut_step(d: Derivation, at=None, supply: AddressSupply | None = None):
    """One reduction step, at ``at`` or where the default strategy points.

    Returns the new derivation, or a ``NoRedex``.
    """
    if at is None:
        at = find_redex(d)
        if at is None:
            return NoRedex()
    supply = supply or AddressSupply(max_atom(d) + 1)
    node = _get(d, at)
    out = Reducer(supply).reduce(node, _targets_on(d, at))
    if out is None:
        return NoRedex(f"the {node.rule} at {list(at)} is not a redex")
    return _put(d, at, out)


def normalize(d: Derivation, limit: int = 100_000, supply: AddressSupply | None = None):
    """Reduce with the default strategy until no redex is left: (derivation, steps)."""
    supply = supply or AddressSupply(max_atom(d) + 1)
    for n in range(limit):
        nxt = cut_step(d, supply=supply)
        if isinstance(nxt, NoRedex):
            return d, n
        d = nxt
    raise RuntimeError(f"no normal form within {limit} steps")


# ---------------------------------------------------------------- simulation

def proof_path(t, term_path):
    """Where the redex at ``term_path`` of ``t`` sits in ``floor(translate_term(t))``."""
    out = []
    for k in term_path:
        if isinstance(t, App):
            t = t.arg
            out.append(0)
        elif isinstance(t, LetT):
            if k == 0:
                t = t.bound
                out.append(0)
            else:
                out.extend([1] + [0] * _pairs(t.pattern))
                t = t.body
        elif hasattr(t, "term"):
            t = t.term
            out.append(0)
        else:
            t = t.left if k == 0 else t.right
            out.append(k)
    return tuple(out)


def _pairs(p):
    return 1 + _pairs(p.left) + _pairs(p.right) if isinstance(p, PPair) else 0


@dataclass
class Checkpoint:
    rule: str
    term_path: tuple
    proof_steps: int
    agrees: bool


@dataclass
class SimulationReport:
    term_steps: int = 0
    proof_steps: int = 0
    checkpoints: list = field(default_factory=list)
    final_term: object = None
    final_proof: Derivation | None = None
    initial_proof: Derivation | None = None
    finished: bool = False
    failure: str | None = None

    @property
    def agrees(self) -> bool:
        return self.failure is None and all(c.agrees for c in self.checkpoints)


def simulate(t, steps: int = 10_000, goal_type=None, check: bool = True) -> SimulationReport:
    """Evaluate ``t`` in the explicit system and mirror every step on its proof.

    After each step the reduced proof is compared, modulo addresses, with the
    translation of the new term.
    """
    goal_type = goal_type or type_term(TermCtx(), EMPTY_PSI, t)
    proof = floor(translate_term(t, goal_type))
    supply = AddressSupply(max_atom(proof) + 1)
    report = SimulationReport(initial_proof=proof)
    for _ in range(steps):
        hit = step_with_info(t, System.EXPLICIT)
        if hit is None:
            report.finished = True
            break
        new_t, rule, term_path = hit
        at = proof_path(t, term_path)
        reducer = Reducer(supply)
        try:
            proof = _put(proof, at, _mirror(reducer, rule, _get(proof, at), _targets_on(proof, at)))
        except (DerivationError, IndexError, AttributeError) as e:
            report.failure = f"{rule} at {list(term_path)}: {e}"
            break
        t = new_t
        report.term_steps += 1
        report.proof_steps += reducer.steps
        agrees = True
        if check:
            agrees = equal_modulo_addresses(proof, floor(translate_term(t, goal_type)))
        report.checkpoints.append(Checkpoint(rule, tuple(term_path), reducer.steps, agrees))
        if not agrees:
            report.failure = f"proof and term disagree after {rule} at {list(term_path)}"
            break
    report.final_term, report.final_proof = t, proof
    return report


def _mirror(reducer, rule, node, targets):
    if node.rule != "cut":
        raise DerivationError(f"{rule} landed on a {node.rule} rule")
    if rule == "IsoApp":
        return reducer.match(node)
    if rule == "ELetSplit":
        out = reducer.reduce(node)
        return replace(out, premises=(out.premises[0], reducer.sink(out.premises[1])))
    if rule == "ELetLetR":
        out = reducer.reduce(node)
        return replace(out, premises=(out.premises[0], reducer.sink(out.premises[1])))
    out = reducer.reduce(node, targets)
    if out is None:
        raise DerivationError(f"{rule}: the matching cut is not a redex")
    return out


def compose_check(iso, value, steps: int = 10_000):
    """``iso`` then its inverse on ``value``: the proof reduces back to the value's."""
    from ..core import value_to_term
    from ..invert import invert

    term = App(invert(iso), App(iso, value_to_term(value)))
    report = simulate(term, steps)
    expected = floor(translate_term(value_to_term(value), report.final_proof.goal.type))
    return report, equal_modulo_addresses(report.final_proof, expected)
