"""Linear typing of terms, expressions and isos.

Besides the nine term rules this module checks that clause sets are
exhaustive and non-overlapping (the OD predicate) and that fixpoints are
structurally recursive.
"""
from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass

from .core import (
    App, Clauses, Fix, Fold, FoldT, InjL, InjLT, InjR, InjRT, IsoType, IsoVar, Let,
    LetT, Mu, PVar, Pair, PairT, Prod, Sum, Unit, UnitT, UnitV, Val, VarT,
    VarV, free_term_vars, pattern_to_value, pattern_vars,
    tensor_components, tensor_width, type_unfold, val_of_expr, value_components, is_closed_value,
    value_vars,
)
from .eval import match_value


class TypeCheckError(Exception):
    def __init__(self, message, clause=None, od_failure=None, kind="type"):
        self.message = message
        self.clause = clause
        self.od_failure = od_failure
        self.kind = kind  # "type", "od" or "recursion"
        where = f"clause {clause + 1}: " if clause is not None else ""
        super().__init__(where + message)


# ---------------------------------------------------------------- contexts

class TermCtx(dict):
    """Delta: variable to type, each binding consumed exactly once."""

    def restrict(self, names):
        return TermCtx({k: v for k, v in self.items() if k in names})

    def minus(self, names):
        return TermCtx({k: v for k, v in self.items() if k not in names})

    def disjoint_union(self, other):
        clash = set(self) & set(other)
        if clash:
            raise TypeCheckError(f"variable {sorted(clash)[0]!r} bound twice")
        return TermCtx({**self, **other})


@dataclass(frozen=True)
class IsoCtx:
    """Psi: at most one iso-variable binding."""
    name: str | None = None
    type: IsoType | None = None

    def lookup(self, name):
        if self.name != name:
            raise TypeCheckError(f"unknown iso-variable {name!r}")
        return self.type


EMPTY_PSI = IsoCtx()


@dataclass(frozen=True)
class RecInfo:
    decreasing_index: int  # 1-based
    focus: tuple  # per clause: variable name of the call's j-th argument, or "closed"


# ---------------------------------------------------------------- OD

@dataclass(frozen=True)
class ODNode:
    rule: str
    type: object
    values: tuple
    children: tuple = ()


@dataclass(frozen=True)
class ODFailure:
    type: object
    values: tuple

    def describe(self):
        from .parser import pretty
        vals = ", ".join(pretty(v) for v in self.values) or "(none)"
        return f"no OD rule applies at type {pretty(self.type)} to {{{vals}}}"


class _ODFail(Exception):
    def __init__(self, failure):
        self.failure = failure


def check_od(a, vs):
    """Derivation witnessing OD_a(vs); raises TypeCheckError on failure."""
    try:
        return _od(a, tuple(vs))
    except _ODFail as e:
        raise TypeCheckError("clauses are not exhaustive and non-overlapping: "
                             + e.failure.describe(), od_failure=e.failure, kind="od") from None


def od_holds(a, vs) -> bool:
    try:
        _od(a, tuple(vs))
        return True
    except _ODFail:
        return False


def _od(a, vs):
    if len(vs) == 1 and isinstance(vs[0], VarV):
        return ODNode("var", a, vs)
    if isinstance(a, Unit) and len(vs) == 1 and isinstance(vs[0], UnitV):
        return ODNode("unit", a, vs)
    if isinstance(a, Sum) and vs and all(isinstance(v, (InjL, InjR)) for v in vs):
        lefts = tuple(v.value for v in vs if isinstance(v, InjL))
        rights = tuple(v.value for v in vs if isinstance(v, InjR))
        if lefts and rights:
            return ODNode("sum", a, vs, (_od(a.left, lefts), _od(a.right, rights)))
    if isinstance(a, Mu) and vs and all(isinstance(v, Fold) for v in vs):
        return ODNode("mu", a, vs, (_od(type_unfold(a), tuple(v.value for v in vs)),))
    if isinstance(a, Prod) and vs and all(isinstance(v, Pair) for v in vs):
        for side in ("left", "right"):
            node = _od_prod(a, vs, side)
            if node is not None:
                return node
    raise _ODFail(ODFailure(a, vs))


def _od_prod(a, vs, side):
    if side == "left":
        key, rest, key_type, rest_type = (lambda v: v.left), (lambda v: v.right), a.left, a.right
    else:
        key, rest, key_type, rest_type = (lambda v: v.right), (lambda v: v.left), a.right, a.left
    # clause variables are local, so only closed sub-patterns are shared
    # between clauses; an open one always starts its own group
    groups = {}
    for n, v in enumerate(vs):
        k = key(v)
        groups.setdefault(k if is_closed_value(k) else (n, k), (k, []))[1].append(rest(v))
    try:
        children = [_od(key_type, tuple(k for k, _ in groups.values()))]
        children += [_od(rest_type, tuple(g)) for _, g in groups.values()]
    except _ODFail:
        return None
    return ODNode(f"prod-{side}", a, vs, tuple(children))


def match_unique(vs, v):
    """The unique clause index matching closed ``v`` and its substitution."""
    hits = [(i, s) for i, p in enumerate(vs) if (s := match_value(p, v)) is not None]
    assert len(hits) == 1, f"{len(hits)} patterns match {v!r}"
    return hits[0]


# ---------------------------------------------------------------- values and terms

def type_value(v, a) -> TermCtx:
    """The unique Delta with Delta |- v : a."""
    if isinstance(v, VarV):
        return TermCtx({v.name: a})
    if isinstance(v, UnitV):
        if isinstance(a, Unit):
            return TermCtx()
    elif isinstance(v, InjL):
        if isinstance(a, Sum):
            return type_value(v.value, a.left)
    elif isinstance(v, InjR):
        if isinstance(a, Sum):
            return type_value(v.value, a.right)
    elif isinstance(v, Fold):
        if isinstance(a, Mu):
            return type_value(v.value, type_unfold(a))
    elif isinstance(v, Pair):
        if isinstance(a, Prod):
            return type_value(v.left, a.left).disjoint_union(type_value(v.right, a.right))
    else:
        raise TypeError(f"not a value: {v!r}")
    from .parser import pretty
    raise TypeCheckError(f"value {pretty(v)} does not have type {pretty(a)}")


def _check_ctx_exact(ctx, expected):
    if dict(ctx) != dict(expected):
        unused = set(expected) - set(ctx)
        if unused:
            raise TypeCheckError(f"variable {sorted(unused)[0]!r} is not used (linearity)")
        missing = set(ctx) - set(expected)
        if missing:
            raise TypeCheckError(f"unbound variable {sorted(missing)[0]!r}")
        from .parser import pretty
        bad = sorted(k for k in ctx if ctx[k] != expected[k])[0]
        raise TypeCheckError(f"variable {bad!r} used at {pretty(ctx[bad])} "
                             f"but bound at {pretty(expected[bad])}")


def type_term(ctx, isoctx, t, expected=None):
    """Type of ``t`` under ``ctx; isoctx``; every binding must be consumed once.

    ``expected`` guides injections and folds, whose type cannot be synthesised.
    """
    ctx = TermCtx(ctx)
    isoctx = isoctx or EMPTY_PSI
    if isinstance(t, (Val, Let)):
        return _type_expr(ctx, isoctx, t, expected)
    got = _synth(ctx, isoctx, t, expected)
    if expected is not None and got != expected:
        from .parser import pretty
        raise TypeCheckError(f"expected type {pretty(expected)}, found {pretty(got)}")
    return got


def _split(ctx, left_term, right_term):
    fv_left, fv_right = free_term_vars(left_term), free_term_vars(right_term)
    both = fv_left & fv_right
    if both:
        raise TypeCheckError(f"variable {sorted(both)[0]!r} used twice (linearity)")
    return ctx.restrict(fv_left), ctx.minus(fv_left)


def _synth(ctx, psi, t, expected):
    from .parser import pretty
    if isinstance(t, UnitT):
        _check_ctx_exact({}, ctx)
        return Unit()
    if isinstance(t, VarT):
        if t.name not in ctx:
            raise TypeCheckError(f"unbound variable {t.name!r}")
        _check_ctx_exact({t.name: ctx[t.name]}, ctx)
        return ctx[t.name]
    if isinstance(t, (InjLT, InjRT)):
        if not isinstance(expected, Sum):
            raise TypeCheckError(f"cannot type {pretty(t)} without an expected sum type")
        side = expected.left if isinstance(t, InjLT) else expected.right
        type_term(ctx, psi, t.term, side)
        return expected
    if isinstance(t, FoldT):
        if not isinstance(expected, Mu):
            raise TypeCheckError(f"cannot type {pretty(t)} without an expected recursive type")
        type_term(ctx, psi, t.term, type_unfold(expected))
        return expected
    if isinstance(t, PairT):
        left_ctx, right_ctx = _split(ctx, t.left, t.right)
        exp_l = expected.left if isinstance(expected, Prod) else None
        exp_r = expected.right if isinstance(expected, Prod) else None
        return Prod(type_term(left_ctx, psi, t.left, exp_l),
                    type_term(right_ctx, psi, t.right, exp_r))
    if isinstance(t, App):
        known = _known_iso_type(psi, t.iso)
        if known is not None:
            type_term(ctx, psi, t.arg, known.lhs)
            return type_iso(psi if isinstance(t.iso, IsoVar) else EMPTY_PSI, t.iso, known).rhs
        arg_type = type_term(ctx, psi, t.arg)
        return _infer_iso(t.iso, arg_type, expected).rhs
    if isinstance(t, LetT):
        bound_ctx, rest = _split(ctx, t.bound, LetT(t.pattern, UnitT(), t.body))
        try:
            bound_type = type_term(bound_ctx, psi, t.bound)
        except TypeCheckError:
            # an injection or fold cannot be synthesised: read the pattern's
            # type off the body, whose type is known
            if expected is None:
                raise
            demands = {}
            _demand(t.body, expected, psi, demands)
            names = pattern_vars(t.pattern)
            if any(x not in demands for x in names):
                raise
            bound_type = _pattern_type(t.pattern, demands)
            type_term(bound_ctx, psi, t.bound, bound_type)
        pat_ctx = type_value(pattern_to_value(t.pattern), bound_type)
        return type_term(rest.disjoint_union(pat_ctx), psi, t.body, expected)
    raise TypeError(f"not a term: {t!r}")


def _demand(t, a, psi, out):
    """Types the free variables of ``t`` must have for ``t`` to have type ``a``."""
    if isinstance(t, VarT):
        out[t.name] = a
    elif isinstance(t, (InjLT, InjRT)) and isinstance(a, Sum):
        _demand(t.term, a.left if isinstance(t, InjLT) else a.right, psi, out)
    elif isinstance(t, FoldT) and isinstance(a, Mu):
        _demand(t.term, type_unfold(a), psi, out)
    elif isinstance(t, PairT) and isinstance(a, Prod):
        _demand(t.left, a.left, psi, out)
        _demand(t.right, a.right, psi, out)
    elif isinstance(t, App):
        known = _known_iso_type(psi, t.iso)
        if known is not None:
            _demand(t.arg, known.lhs, psi, out)
    elif isinstance(t, LetT):
        inner = {}
        _demand(t.body, a, psi, inner)
        names = pattern_vars(t.pattern)
        if all(x in inner for x in names):
            _demand(t.bound, _pattern_type(t.pattern, inner), psi, out)
        out.update({k: v for k, v in inner.items() if k not in names})


def _pattern_type(p, types):
    if isinstance(p, PVar):
        return types[p.name]
    return Prod(_pattern_type(p.left, types), _pattern_type(p.right, types))


def _known_iso_type(psi, iso):
    if isinstance(iso, IsoVar):
        return psi.lookup(iso.name)
    return iso.ann


def _infer_iso(iso, lhs, expected_rhs):
    """Type an unannotated closed iso given its input type."""
    if expected_rhs is not None:
        return type_iso(EMPTY_PSI, iso, IsoType(lhs, expected_rhs))
    if isinstance(iso, Clauses):
        for v, e in iso.clauses:
            try:
                delta = type_value(v, lhs)
                rhs = type_term(delta, EMPTY_PSI, _expr_as_term(e))
            except TypeCheckError:
                continue
            return type_iso(EMPTY_PSI, iso, IsoType(lhs, rhs))
    raise TypeCheckError("cannot infer the output type of an unannotated iso; "
                         "write (iso :: A <-> B)")


def _expr_as_term(e):
    from .core import expr_to_term
    return expr_to_term(e)


def _type_expr(ctx, psi, e, expected):
    if isinstance(e, Val):
        if expected is None:
            return _synth(ctx, psi, _expr_as_term(e), None)
        _check_ctx_exact(type_value(e.value, expected), ctx)
        return expected
    # let p1 = w p2 in e
    arg_names = pattern_vars(e.arg)
    missing = [x for x in arg_names if x not in ctx]
    if missing:
        raise TypeCheckError(f"unbound variable {missing[0]!r}")
    if len(set(arg_names)) != len(arg_names):
        raise TypeCheckError("let argument uses a variable twice (linearity)")
    app = App(e.iso, _expr_as_term(Val(pattern_to_value(e.arg))))
    out = type_term(ctx.restrict(arg_names), psi, app)
    pat_ctx = type_value(pattern_to_value(e.pattern), out)
    return _type_expr(ctx.minus(arg_names).disjoint_union(pat_ctx), psi, e.body, expected)


# ---------------------------------------------------------------- isos

_REQUIRE_STRUCTURAL = ContextVar("require_structural", default=True)


@contextmanager
def allow_general_recursion():
    """Type fixpoints without the structural-recursion check (programs may diverge)."""
    token = _REQUIRE_STRUCTURAL.set(False)
    try:
        yield
    finally:
        _REQUIRE_STRUCTURAL.reset(token)


def type_iso(isoctx, iso, expected: IsoType | None = None) -> IsoType:
    isoctx = isoctx or EMPTY_PSI
    if isinstance(iso, IsoVar):
        got = isoctx.lookup(iso.name)
        if expected is not None and got != expected:
            raise TypeCheckError(f"iso-variable {iso.name!r} used at the wrong type")
        return got
    alpha = expected or iso.ann
    if alpha is None:
        raise TypeCheckError("cannot type an unannotated iso")
    if iso.ann is not None and iso.ann != alpha:
        from .parser import pretty
        raise TypeCheckError(f"iso annotated {pretty(iso.ann)} used at {pretty(alpha)}")
    # free type variables are opaque atoms: only a variable pattern inhabits them
    if isinstance(iso, Fix):
        if isoctx.name is not None:
            raise TypeCheckError("nested fixpoints are not supported: at most one "
                                 "iso-variable may be in scope")
        if isinstance(iso.body, Fix):
            raise TypeCheckError("nested fixpoints are not supported")
        if _REQUIRE_STRUCTURAL.get():
            check_structural_recursion(iso, alpha)
        type_iso(IsoCtx(iso.var, alpha), iso.body, alpha)
        return alpha
    _type_clauses(isoctx, iso, alpha)
    return alpha


def _type_clauses(psi, iso, alpha):
    for i, (v, e) in enumerate(iso.clauses):
        try:
            names = value_vars(v)
            if len(set(names)) != len(names):
                raise TypeCheckError("pattern uses a variable twice (linearity)")
            delta = type_value(v, alpha.lhs)
            _type_expr(delta, psi, e, alpha.rhs)
        except TypeCheckError as err:
            raise TypeCheckError(err.message, clause=i) from None
    for side, vals in (("left", [v for v, _ in iso.clauses]),
                       ("right", [val_of_expr(e) for _, e in iso.clauses])):
        try:
            check_od(alpha.lhs if side == "left" else alpha.rhs, vals)
        except TypeCheckError as err:
            raise TypeCheckError(f"{side}-hand sides: {err.message}",
                                 od_failure=err.od_failure) from None


# ---------------------------------------------------------------- structural recursion

def _calls(e, f):
    """Arguments of every ``let _ = f p`` inside an expression."""
    out = []
    while isinstance(e, Let):
        if isinstance(e.iso, IsoVar) and e.iso.name == f:
            out.append(e.arg)
        elif f in _iso_mentions(e.iso):
            out.append(None)  # f hidden inside another iso: never allowed
        e = e.body
    return out


def _iso_mentions(iso):
    from .core import free_iso_vars
    return free_iso_vars(iso)


def _strict_subterm(name, v):
    return not isinstance(v, VarV) and name in value_vars(v)


def check_structural_recursion(iso, alpha: IsoType):
    """RecInfo for a structurally recursive fixpoint, None if it never recurses."""
    if not isinstance(iso, Fix):
        return None
    f, body = iso.var, iso.body
    if not isinstance(body, Clauses):
        raise TypeCheckError("a fixpoint body must be a clause set")
    all_calls = [_calls(e, f) for _, e in body.clauses]
    if not any(all_calls):
        return None
    width = tensor_width(alpha.lhs)
    components = tensor_components(alpha.lhs, width)
    reasons = []
    for j in range(width):
        if not isinstance(components[j], Mu):
            continue
        focus, reason = _try_index(body, all_calls, width, j)
        if reason is None:
            return RecInfo(j + 1, tuple(focus))
        reasons.append(reason)
    if not reasons:
        reasons.append((None, "no input component has a recursive type"))
    clause, why = reasons[0]
    raise TypeCheckError(f"not structurally recursive: {why}", clause=clause, kind="recursion")


def _try_index(body, all_calls, width, j):
    focus = []
    for i, ((v, _), calls) in enumerate(zip(body.clauses, all_calls)):
        parts = value_components(v, width)
        if parts is None:
            return None, (i, f"left-hand side is not a {width}-tuple")
        decreasing = parts[j]
        if not value_vars(decreasing):
            if calls:
                return None, (i, f"recursive call under a closed component {j + 1}")
            focus.append("closed")
            continue
        names = []
        for arg in calls:
            if arg is None:
                return None, (i, "the iso-variable occurs inside another iso")
            arg_parts = value_components(pattern_to_value(arg), width)
            if arg_parts is None or not all(isinstance(x, VarV) for x in arg_parts):
                return None, (i, f"recursive call argument is not a {width}-tuple of variables")
            x = arg_parts[j].name
            if not _strict_subterm(x, decreasing):
                return None, (i, f"argument {x!r} at position {j + 1} is not a strict "
                                 "subterm of the matched value")
            names.append(x)
        focus.append(names[0] if len(names) == 1 else tuple(names) if names else "none")
    return focus, None


# ---------------------------------------------------------------- files

@dataclass
class Diagnostic:
    line: int
    col: int
    message: str
    definition: str | None = None

    def render(self, filename):
        return f"{filename}:{self.line}:{self.col}: error: {self.message}"

    def as_dict(self, filename):
        return {"file": filename, "line": self.line, "col": self.col,
                "severity": "error", "message": self.message, "definition": self.definition}


def check_source(src):
    """Type every definition and ``main``; returns (types by name, main type, diagnostics)."""
    types, diags, main_type = {}, [], None
    for d in src.definitions:
        try:
            types[d.name] = type_iso(EMPTY_PSI, d.iso, d.type)
        except TypeCheckError as err:
            line, col = d.line, d.col
            if err.clause is not None and err.clause < len(d.clause_positions):
                line, col = d.clause_positions[err.clause]
            diags.append(Diagnostic(line, col, f"in {d.name}: {err}", d.name))
    if src.main is not None:
        try:
            main_type = type_term(TermCtx(), EMPTY_PSI, src.main)
        except TypeCheckError as err:
            diags.append(Diagnostic(*src.main_pos, f"in main: {err}", "main"))
    return types, main_type, diags
