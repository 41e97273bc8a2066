"""Small-step evaluation.

Two systems share one call-by-value context grammar::

    C ::= [] | let p = C in t | (C, t) | (v, C) | injl C | injr C | fold C | w C

``MAIN`` substitutes eagerly (LetE, IsoRec, IsoApp). ``EXPLICIT`` turns each
match into a chain of single-variable lets and pushes them down one
constructor at a time.

Redex paths index the children of each node: ``let`` has bound 0 and body 1,
pairs have 0 and 1, injections, ``fold`` and application have a single child 0.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .core import (
    App, Clauses, Fix, Fold, FoldT, InjL, InjLT, InjR, InjRT, LetT, PPair,
    PVar, Pair, PairT, Subst, UnitT, UnitV, VarT, VarV, apply_subst, expr_to_term,
    annotate, free_term_vars, is_value_term, subst_iso, term_to_value, value_to_term, value_vars,
)

DEFAULT_FUEL = 100000


class NoMatch(Exception):
    pass


class Stuck(Exception):
    """A closed non-value term with no redex; impossible for well-typed input."""


class NonLinearPattern(Exception):
    pass


def match_value(pattern, v) -> Subst | None:
    """``sigma`` with ``sigma[pattern] = v``, or None on a constructor clash."""
    try:
        return _match(pattern, v)
    except NoMatch:
        return None


def _match(pattern, v) -> Subst:
    if isinstance(pattern, (VarV, PVar)):
        return Subst({pattern.name: v})
    if isinstance(pattern, UnitV):
        if isinstance(v, UnitV):
            return Subst()
        raise NoMatch
    if isinstance(pattern, (InjL, InjR, Fold)):
        if type(v) is type(pattern):
            return _match(pattern.value, v.value)
        raise NoMatch
    if isinstance(pattern, (Pair, PPair)):
        if not isinstance(v, Pair):
            raise NoMatch
        left, right = _match(pattern.left, v.left), _match(pattern.right, v.right)
        if set(left) & set(right):
            raise NonLinearPattern(f"variables {sorted(set(left) & set(right))} bound twice")
        return left.union(right)
    raise TypeError(f"not a pattern: {pattern!r}")


def select_clause(iso: Clauses, v):
    """First clause whose left value matches ``v``: (index, sigma)."""
    for i, (lhs, _) in enumerate(iso.clauses):
        sigma = match_value(lhs, v)
        if sigma is not None:
            return i, sigma
    raise Stuck(f"no clause matches {v!r}")


def let_chain(sigma: Subst, order, body):
    """``let x1 = v1 in ... let xn = vn in body`` in the given variable order."""
    for name in reversed(order):
        body = LetT(PVar(name), value_to_term(sigma[name]), body)
    return body


# ---------------------------------------------------------------- configuration and traces

class System(Enum):
    MAIN = "main"
    EXPLICIT = "explicit"


@dataclass
class EvalConfig:
    fuel: int = DEFAULT_FUEL
    trace: bool = False
    system: System = System.MAIN


@dataclass(frozen=True)
class TraceEntry:
    rule: str
    path: tuple
    before: object
    after: object


@dataclass(frozen=True)
class FuelExhausted:
    term: object
    steps: int


@dataclass
class EvalResult:
    outcome: object  # a closed Value or FuelExhausted
    steps: int
    trace: list = field(default_factory=list)

    @property
    def exhausted(self):
        return isinstance(self.outcome, FuelExhausted)

    @property
    def value(self):
        if self.exhausted:
            raise RuntimeError(f"fuel exhausted after {self.steps} steps")
        return self.outcome


def trace_to_jsonl(trace) -> str:
    from .parser import pretty
    return "\n".join(
        json.dumps({"step": n, "rule": e.rule, "path": list(e.path), "term": pretty(e.after)})
        for n, e in enumerate(trace, start=1))


# ---------------------------------------------------------------- one step

def _redex(t, path, fire, explicit=False):
    """Locate the unique redex of ``t``; returns (new term, rule, path) or None."""
    if isinstance(t, (UnitT, VarT)):
        return None
    if isinstance(t, (InjLT, InjRT, FoldT)):
        hit = _redex(t.term, path + (0,), fire, explicit)
        if hit is None:
            return None
        return type(t)(hit[0]), hit[1], hit[2]
    if isinstance(t, PairT):
        hit = _redex(t.left, path + (0,), fire, explicit)
        if hit is not None:
            return PairT(hit[0], t.right), hit[1], hit[2]
        hit = _redex(t.right, path + (1,), fire, explicit)
        if hit is not None:
            return PairT(t.left, hit[0]), hit[1], hit[2]
        return None
    if isinstance(t, App):
        if not is_value_term(t.arg):
            hit = _redex(t.arg, path + (0,), fire, explicit)
            if hit is None:
                raise Stuck(f"argument is a stuck non-value: {t.arg!r}")
            return App(t.iso, hit[0]), hit[1], hit[2]
        new, rule = fire(t)
        return new, rule, path
    if isinstance(t, LetT):
        if not is_value_term(t.bound):
            hit = _redex(t.bound, path + (0,), fire, explicit)
            if hit is None:
                raise Stuck(f"let-bound term is a stuck non-value: {t.bound!r}")
            return LetT(t.pattern, hit[0], t.body), hit[1], hit[2]
        if explicit and _value_let(t.body):
            # a chain of value lets resolves innermost first
            hit = _redex(t.body, path + (1,), fire, explicit)
            return LetT(t.pattern, t.bound, hit[0]), hit[1], hit[2]
        new, rule = fire(t)
        return new, rule, path
    raise TypeError(f"not a term: {t!r}")


def _value_let(t):
    return isinstance(t, LetT) and (isinstance(t.bound, _Done) or is_value_term(t.bound))


def _iso_rec(t):
    w = t.iso
    return App(annotate(subst_iso(w.body, w.var, w), w.ann), t.arg), "IsoRec"


def _fire_main(t):
    if isinstance(t, App):
        if isinstance(t.iso, Fix):
            return _iso_rec(t)
        if isinstance(t.iso, Clauses):
            i, sigma = select_clause(t.iso, term_to_value(t.arg))
            return apply_subst(sigma, expr_to_term(t.iso.clauses[i][1])), "IsoApp"
        raise Stuck(f"free iso-variable {t.iso.name!r} in application")
    sigma = match_value(t.pattern, term_to_value(t.bound))
    if sigma is None:
        raise Stuck("let pattern does not match its value")
    return apply_subst(sigma, t.body), "LetE"


def beta_lete(t):
    """``let p = v in t`` to the let-chain of its matching substitution."""
    from .core import pattern_vars
    sigma = match_value(t.pattern, term_to_value(t.bound))
    if sigma is None:
        raise Stuck("let pattern does not match its value")
    return let_chain(sigma, pattern_vars(t.pattern), t.body)


def elet(t):
    """One structural let-pushing step on ``let p = v in body``: (term, rule)."""
    p, v, body = t.pattern, t.bound, t.body
    if isinstance(p, PPair):
        if not isinstance(v, PairT):
            raise Stuck("pair pattern bound to a non-pair")
        return LetT(p.left, v.left, LetT(p.right, v.right, body)), "ELetSplit"
    x = p.name
    if isinstance(body, VarT):
        if body.name != x:
            raise Stuck(f"let-bound {x!r} is unused")
        return v, "ELetVar"
    if isinstance(body, PairT):
        if x in free_term_vars(body.left):
            return PairT(LetT(p, v, body.left), body.right), "ELetPairL"
        if x in free_term_vars(body.right):
            return PairT(body.left, LetT(p, v, body.right)), "ELetPairR"
        raise Stuck(f"let-bound {x!r} is unused")
    if isinstance(body, (InjLT, InjRT, FoldT)):
        rule = {InjLT: "ELetInjL", InjRT: "ELetInjR", FoldT: "ELetFold"}[type(body)]
        return type(body)(LetT(p, v, body.term)), rule
    if isinstance(body, App):
        return App(body.iso, LetT(p, v, body.arg)), "ELetApp"
    if isinstance(body, LetT):
        # not among the listed rules, but needed whenever a clause body is a let
        if x in free_term_vars(body.bound):
            return LetT(body.pattern, LetT(p, v, body.bound), body.body), "ELetLetL"
        return LetT(body.pattern, body.bound, LetT(p, v, body.body)), "ELetLetR"
    raise Stuck(f"let-bound {x!r} is unused")


def _fire_explicit(use_beta_lete):
    def fire(t):
        if isinstance(t, App):
            if isinstance(t.iso, Fix):
                return _iso_rec(t)
            if isinstance(t.iso, Clauses):
                i, sigma = select_clause(t.iso, term_to_value(t.arg))
                lhs, e = t.iso.clauses[i]
                return let_chain(sigma, value_vars(lhs), expr_to_term(e)), "IsoApp"
            raise Stuck(f"free iso-variable {t.iso.name!r} in application")
        if use_beta_lete and isinstance(t.pattern, PPair):
            return beta_lete(t), "LetE"
        return elet(t)
    return fire


def step_with_info(t, system=System.MAIN, use_beta_lete=False):
    """(term, rule, path) for one step, or None if ``t`` is a value."""
    if is_value_term(t):
        return None
    fire = _fire_main if system is System.MAIN else _fire_explicit(use_beta_lete)
    hit = _redex(t, (), fire, system is System.EXPLICIT)
    if hit is None:
        raise Stuck(f"stuck term {t!r}")
    return hit


def step(t):
    hit = step_with_info(t, System.MAIN)
    return None if hit is None else hit[0]


def step_explicit(t, use_beta_lete=False):
    hit = step_with_info(t, System.EXPLICIT, use_beta_lete)
    return None if hit is None else hit[0]


# ---------------------------------------------------------------- the driver
#
# ``evaluate`` walks the same context grammar with an explicit frame stack and
# resumes the search at the contracted position, so each step costs the size of
# the contractum rather than of the whole term.  Closed values already known to
# be values travel as ``_Done`` nodes; full terms are rebuilt only for traces.

@dataclass(frozen=True)
class _Done:
    value: object


def _plug(frames, t):
    """``t`` put back into its evaluation context, as an ordinary term.

    Frames are converted one at a time so that a deep context (a long chain of
    pending lets) never drives the recursion in ``_unmachine``.
    """
    t = _unmachine(t)
    for frame in reversed(frames):
        kind = frame[0]
        if kind == "inj":
            t = frame[1](t)
        elif kind == "pairL":
            t = PairT(t, _unmachine(frame[1]))
        elif kind == "pairR":
            t = PairT(value_to_term(frame[1]), t)
        elif kind == "app":
            t = App(frame[1], t)
        elif kind == "letBody":
            t = LetT(frame[1], value_to_term(frame[2]), t)
        else:
            t = LetT(frame[1], t, _unmachine(frame[2]))
    return t


def _path(frames):
    return tuple(1 if f[0] in ("pairR", "letBody") else 0 for f in frames)


def _unmachine(t):
    """Replace ``_Done`` nodes by ordinary value terms."""
    if isinstance(t, _Done):
        return value_to_term(t.value)
    if isinstance(t, (InjLT, InjRT, FoldT)):
        return type(t)(_unmachine(t.term))
    if isinstance(t, PairT):
        return PairT(_unmachine(t.left), _unmachine(t.right))
    if isinstance(t, App):
        return App(t.iso, _unmachine(t.arg))
    if isinstance(t, LetT):
        return LetT(t.pattern, _unmachine(t.bound), _unmachine(t.body))
    return t


def _inst(x, sigma):
    """Substitute closed values into a term or expression, keeping them as ``_Done``."""
    from .core import Let, Val, pattern_to_value, pattern_vars
    if isinstance(x, Val):
        return _inst_value(x.value, sigma)
    if isinstance(x, Let):
        arg_t = _inst_value(pattern_to_value(x.arg), sigma)
        return LetT(x.pattern, App(x.iso, arg_t), _inst(x.body, sigma.without(pattern_vars(x.pattern))))
    if isinstance(x, VarT):
        return _Done(sigma[x.name]) if x.name in sigma else x
    if isinstance(x, (_Done, UnitT)):
        return x
    if isinstance(x, (InjLT, InjRT, FoldT)):
        return type(x)(_inst(x.term, sigma))
    if isinstance(x, PairT):
        return PairT(_inst(x.left, sigma), _inst(x.right, sigma))
    if isinstance(x, App):
        return App(x.iso, _inst(x.arg, sigma))
    if isinstance(x, LetT):
        from .core import pattern_vars
        return LetT(x.pattern, _inst(x.bound, sigma), _inst(x.body, sigma.without(pattern_vars(x.pattern))))
    raise TypeError(f"not a term: {x!r}")


def _inst_value(v, sigma):
    if set(value_vars(v)) <= set(sigma):
        return _Done(apply_subst(sigma, v))
    return value_to_term(apply_subst(sigma, v))


def _machine_fv(t):
    if isinstance(t, _Done):
        return set()
    if isinstance(t, (InjLT, InjRT, FoldT)):
        return _machine_fv(t.term)
    if isinstance(t, PairT):
        return _machine_fv(t.left) | _machine_fv(t.right)
    if isinstance(t, App):
        return _machine_fv(t.arg)
    if isinstance(t, LetT):
        from .core import pattern_vars
        return _machine_fv(t.bound) | (_machine_fv(t.body) - set(pattern_vars(t.pattern)))
    if isinstance(t, VarT):
        return {t.name}
    return set()


_INJ_VALUE = {InjLT: InjL, InjRT: InjR, FoldT: Fold}


def _contract(frame, v, explicit):
    """Fire the redex formed by ``frame`` around value ``v``: (new focus, rule)."""
    if frame[0] == "app":
        iso = frame[1]
        if isinstance(iso, Fix):
            return ("app", annotate(subst_iso(iso.body, iso.var, iso), iso.ann), v), "IsoRec"
        if not isinstance(iso, Clauses):
            raise Stuck(f"free iso-variable {iso.name!r} in application")
        i, sigma = select_clause(iso, v)
        lhs, e = iso.clauses[i]
        if not explicit:
            return _inst(e, sigma), "IsoApp"
        body = _inst(e, Subst())
        for name in reversed(value_vars(lhs)):
            body = LetT(PVar(name), _Done(sigma[name]), body)
        return body, "IsoApp"
    pattern, body = frame[1], frame[2]
    if not explicit:
        sigma = match_value(pattern, v)
        if sigma is None:
            raise Stuck("let pattern does not match its value")
        return _inst(body, sigma), "LetE"
    return _elet_machine(pattern, v, body)


def _elet_machine(p, v, body):
    if isinstance(p, PPair):
        return LetT(p.left, _Done(v.left), LetT(p.right, _Done(v.right), body)), "ELetSplit"
    x, bound = p.name, _Done(v)
    if isinstance(body, VarT) and body.name == x:
        return bound, "ELetVar"
    if isinstance(body, PairT):
        if x in _machine_fv(body.left):
            return PairT(LetT(p, bound, body.left), body.right), "ELetPairL"
        if x in _machine_fv(body.right):
            return PairT(body.left, LetT(p, bound, body.right)), "ELetPairR"
    elif isinstance(body, (InjLT, InjRT, FoldT)):
        rule = {InjLT: "ELetInjL", InjRT: "ELetInjR", FoldT: "ELetFold"}[type(body)]
        return type(body)(LetT(p, bound, body.term)), rule
    elif isinstance(body, App):
        return App(body.iso, LetT(p, bound, body.arg)), "ELetApp"
    elif isinstance(body, LetT):
        if x in _machine_fv(body.bound):
            return LetT(body.pattern, LetT(p, bound, body.bound), body.body), "ELetLetL"
        return LetT(body.pattern, body.bound, LetT(p, bound, body.body)), "ELetLetR"
    raise Stuck(f"let-bound {x!r} is unused")


def evaluate(t, cfg: EvalConfig | None = None, **kw) -> EvalResult:
    cfg = cfg or EvalConfig(**kw)
    explicit = System(cfg.system) is System.EXPLICIT
    trace, steps, frames = [], 0, []
    focus, value = t, None  # exactly one of them is set
    before = t if cfg.trace else None
    while True:
        if focus is not None:
            if isinstance(focus, _Done):
                focus, value = None, focus.value
            elif isinstance(focus, UnitT):
                focus, value = None, UnitV()
            elif isinstance(focus, (InjLT, InjRT, FoldT)):
                frames.append(("inj", type(focus)))
                focus = focus.term
            elif isinstance(focus, PairT):
                frames.append(("pairL", focus.right))
                focus = focus.left
            elif isinstance(focus, App):
                frames.append(("app", focus.iso))
                focus = focus.arg
            elif isinstance(focus, LetT):
                frames.append(("letBound", focus.pattern, focus.body))
                focus = focus.bound
            elif isinstance(focus, tuple):  # an IsoRec result: app frame around a value
                frames.append(("app", focus[1]))
                focus, value = None, focus[2]
            else:
                raise Stuck(f"open term: free variable {getattr(focus, 'name', focus)!r}")
            continue
        if not frames:
            return EvalResult(value, steps, trace)
        frame = frames[-1]
        kind = frame[0]
        if kind == "inj":
            frames.pop()
            value = _INJ_VALUE[frame[1]](value)
        elif kind == "pairL":
            frames[-1] = ("pairR", value)
            focus, value = frame[1], None
        elif kind == "pairR":
            frames.pop()
            value = Pair(frame[1], value)
        else:
            if steps >= cfg.fuel:
                frames.pop()
                redex = App(frame[1], value_to_term(value)) if kind == "app" else \
                    LetT(frame[1], value_to_term(value), frame[2])
                return EvalResult(FuelExhausted(_plug(frames, redex), steps), steps, trace)
            if explicit and kind == "letBound" and _value_let(frame[2]):
                frames[-1] = ("letBody", frame[1], value)
                focus, value = frame[2], None
                continue
            frames.pop()
            path = _path(frames) if cfg.trace else ()
            focus, rule = _contract(frame, value, explicit)
            value = None
            steps += 1
            if explicit and frames and frames[-1][0] == "letBody":
                # re-examine the enclosing value let: its body changed shape
                outer = frames.pop()
                focus = LetT(outer[1], _Done(outer[2]), focus)
                if cfg.trace:
                    after = _plug(frames, focus)
                    trace.append(TraceEntry(rule, path, before, after))
                    before = after
                continue
            if cfg.trace:
                shown = focus
                if isinstance(focus, tuple):
                    shown = App(focus[1], _Done(focus[2]))
                after = _plug(frames, shown)
                trace.append(TraceEntry(rule, path, before, after))
                before = after


def apply_iso(iso, v, fuel=DEFAULT_FUEL, system=System.MAIN):
    """Evaluate ``iso v`` for a closed value ``v`` and return the resulting value."""
    return evaluate(App(iso, value_to_term(v)), EvalConfig(fuel=fuel, system=system)).value
