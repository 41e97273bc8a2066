"""Validity of translated isos through pre-threads.

The checker is specialised to derivations produced by ``circ`` and ``floor``:
every infinite branch cycles through a single labeled sequent, so it is enough
to exhibit, for every back-edge, one period of a thread that starts on the
labeled sequent's input formula, climbs to the axiom on the recursive
argument, bounces down the argument tuple and re-enters at the back-edge.

Weights use ``l``, ``r``, ``i`` for climbing into a subformula, ``W`` for
a step that leaves the followed formula alone, ``A`` for the axiom bounce,
``~l``, ``~r``, ``~i`` for descending out of a subformula and ``C`` for the
bounce at the cut above a back-edge.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..core import BaseType, Mu, Prod, Sum, tensor_width, type_unfold
from ..typecheck import RecInfo
from .derivation import LEFT_RULES, RIGHT_RULES, Derivation, back_edges, find_formula, left_principal

UP, DOWN = "up", "down"
CLIMB = {"l", "r", "i"}
DESCEND = {"~l", "~r", "~i"}


@dataclass(frozen=True)
class PreThread:
    elements: tuple  # of (Formula, Sequent, direction)
    weight: tuple

    def word(self) -> str:
        return " ".join(self.weight)


@dataclass(frozen=True)
class Period:
    """One lap of a thread, from a labeled sequent to one of its back-edges."""

    thread: PreThread
    edge: Derivation
    climb: tuple  # p: letters before the axiom
    descent: tuple  # q: letters between the axiom and the bouncing cut

    @property
    def visible_letters(self):
        return [w for w in self.climb if w != "W"]

    @property
    def descent_letters(self):
        return [w for w in self.descent if w != "W"]


@dataclass(frozen=True)
class Valid:
    witness: tuple = ()  # of (label, decreasing index, Period)
    reason: str = ""

    def __bool__(self):
        return True


@dataclass(frozen=True)
class Invalid:
    reason: str

    def __bool__(self):
        return False


# ---------------------------------------------------------------- pre-threads

def build_periods(root: Derivation) -> list:
    """Every period starting on ``root``'s input formula and ending at one of its back-edges."""
    if root.label is None:
        raise ValueError("periods start on a labeled sequent")
    (start,) = root.context
    out = []
    _climb(root, start, [root], [], [], root.label, out)
    return out


def _climb(node, tracked, stack, weight, elements, label, out):
    elements = elements + [(tracked, node.conclusion, UP)]
    rule = node.rule
    if rule == "id":
        _descend(stack, node.goal, weight + ["A"], elements, label, out, len(weight))
        return
    if rule in LEFT_RULES:
        principal = left_principal(node)
        if principal.addr == tracked.addr:
            if rule == "bot":
                return
            if rule == "with":
                for k, letter in ((0, "l"), (1, "r")):
                    _climb(node.premises[k], tracked.child(letter), stack + [node.premises[k]],
                           weight + [letter], elements, label, out)
            elif rule == "par":
                for letter in ("l", "r"):
                    _climb(node.premises[0], tracked.child(letter), stack + [node.premises[0]],
                           weight + [letter], elements, label, out)
            else:
                _climb(node.premises[0], tracked.child("i"), stack + [node.premises[0]],
                       weight + ["i"], elements, label, out)
            return
        for p in node.premises:
            _climb(p, tracked, stack + [p], weight + ["W"], elements, label, out)
        return
    for p in node.premises:
        if find_formula(p.context, tracked.addr) is not None:
            _climb(p, tracked, stack + [p], weight + ["W"], elements, label, out)
            return


def _descend(stack, goal, weight, elements, label, out, axiom_at):
    node = stack[-1]
    for depth in range(len(stack) - 2, -1, -1):
        parent = stack[depth]
        if parent.rule in RIGHT_RULES:
            letter = _last_letter(parent.goal, goal)
            goal = parent.goal
            weight = weight + ["~" + letter]
        elif parent.rule == "cut" and node is parent.premises[0]:
            edge = parent.premises[1]
            weight = weight + ["C"]
            if edge.rule != "be" or edge.arg != label:
                return
            elements = elements + [(goal, parent.conclusion, DOWN), (edge.context[0], edge.conclusion, UP)]
            thread = PreThread(tuple(elements), tuple(weight))
            out.append(Period(thread, edge, tuple(weight[:axiom_at]), tuple(weight[axiom_at + 1:-1])))
            return
        else:
            weight = weight + ["W"]
        elements = elements + [(goal, parent.conclusion, DOWN)]
        node = parent
    # the thread left through the root's goal: no back-edge on this lap


def _last_letter(parent_goal, child_goal):
    path = child_goal.addr.path
    if child_goal.addr.atom != parent_goal.addr.atom or path[:-1] != parent_goal.addr.path:
        raise ValueError("descent left the purely positive proof")
    return path[-1]


def build_prethread(root: Derivation, rec: RecInfo | None = None) -> PreThread:
    """The first period following the decreasing argument (see ``check_validity``)."""
    report = _check_root(root, rec)
    if isinstance(report, Invalid):
        raise ValueError(report.reason)
    return report[1][0].thread


# ---------------------------------------------------------------- the criterion

def component_path(width: int, index: int) -> str:
    """Address suffix of the ``index``-th (1-based) component of a right-nested tuple."""
    return "r" * (index - 1) + ("l" if index < width else "")


def _contains(big: BaseType, small: BaseType) -> bool:
    if big == small:
        return True
    if isinstance(big, (Sum, Prod)):
        return _contains(big.left, small) or _contains(big.right, small)
    return False


def _judge(period: Period, path: str, component: BaseType):
    """None if the period satisfies conditions (a)-(c), else the reason it fails."""
    p, q = period.visible_letters, period.descent_letters
    if any(w not in CLIMB | {"W"} for w in period.climb):
        return "(a) the climbing part leaves {l, r, i, W}"
    if any(w not in DESCEND | {"W"} for w in period.descent):
        return "(a) the descending part leaves {~l, ~r, ~i, W}"
    if len(p) <= len(q):
        return f"(b) no strict decrease: |p| = {len(p)} is not greater than |q| = {len(q)}"
    unbarred = "".join(w[1] for w in reversed(q))
    if unbarred != path or not "".join(p).startswith(unbarred):
        return f"(b) the descent {unbarred!r} does not retrace the climb {''.join(p)!r}"
    if not isinstance(component, Mu):
        return "(c) the recurring formula is not a fixpoint"
    # visible part: after the climb letters that compensate the descent
    seen, visible = 0, []
    for (formula, _, direction), w in zip(period.thread.elements, period.climb + ("A",)):
        if seen >= len(q) and direction == UP:
            visible.append(formula)
        if w in CLIMB:
            seen += 1
    if not visible or visible[0].type != component:
        return "(c) the visible part does not start on the decreasing component"
    for f in visible:
        if not _contains(f.type, component) and not _contains(f.type, type_unfold(component)):
            return "(c) the visible part leaves the decreasing component"
    return None


def _check_root(root: Derivation, rec):
    (start,) = root.context
    width = tensor_width(start.type)
    components = _components(start.type, width)
    if isinstance(rec, RecInfo):
        candidates = [rec.decreasing_index]
    else:
        candidates = [j for j in range(1, width + 1) if isinstance(components[j - 1], Mu)]
    edges = [e for e in _own_back_edges(root)]
    periods = build_periods(root)
    first_reason = None
    for j in candidates:
        path, component = component_path(width, j), components[j - 1]
        chosen, missing = [], None
        for edge in edges:
            reasons = []
            good = None
            for per in periods:
                if per.edge is not edge:
                    continue
                why = _judge(per, path, component)
                if why is None:
                    good = per
                    break
                reasons.append(why)
            if good is None:
                missing = reasons[0] if reasons else "(a) no thread reaches the back-edge"
                break
            chosen.append(good)
        if missing is None:
            return j, chosen
        first_reason = first_reason or f"component {j}: {missing}"
    return Invalid(f"{root.label}: {first_reason or 'no recursive input component'}")


def _components(a, width):
    out = []
    for _ in range(width - 1):
        out.append(a.left)
        a = a.right
    out.append(a)
    return out


def _own_back_edges(root):
    out = []

    def go(node):
        if node is not root and node.label == root.label:
            return
        if node.rule == "be" and node.arg == root.label:
            out.append(node)
        for p in node.premises:
            go(p)

    go(root)
    return out


def check_validity(d: Derivation, rec=None):
    """Valid with one period per back-edge, or Invalid naming the failed condition.

    ``rec`` may be a RecInfo applied to every labeled sequent, a mapping from
    labels to RecInfo, or None to search for a decreasing component.
    """
    if not back_edges(d):
        return Valid((), "finite derivation")
    witness = []
    for node in d:
        if node.label is None:
            continue
        info = rec.get(node.label) if isinstance(rec, dict) else rec
        report = _check_root(node, info)
        if isinstance(report, Invalid):
            return report
        j, periods = report
        witness.extend((node.label, j, per) for per in periods)
    return Valid(tuple(witness), "every back-edge closes a thread period")
