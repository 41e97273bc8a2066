"""Concrete syntax: a tokenizer, a recursive-descent parser and a pretty-printer.

Grammar (``*`` binds tighter than ``+``, both right-associative, ``mu`` extends
as far right as possible)::

    type   ::= prod ("+" type)?
    prod   ::= atom ("*" prod)?
    atom   ::= "1" | ident | "mu" ident "." type | "(" type ")"
    value  ::= "()" | ident | "injl" value | "injr" value | "fold" value
             | "(" value ("," value)+ ")" | "(" value ")"
    pat    ::= ident | "(" pat ("," pat)+ ")"
    expr   ::= value | "let" pat "=" iso pat "in" expr
    iso    ::= "{" value "<->" expr ("|" value "<->" expr)* "}"
             | "fix" ident "." iso | ident | "(" iso ")"
    term   ::= value-like forms | iso term | "let" pat "=" term "in" term
    file   ::= ("type" ident ("=" type)? | "def" ident "::" type "<->" type "=" iso
             | "main" "=" term)*

Comments run from ``--`` to the end of the line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

from .core import (
    App, BaseType, Clauses, Fix, Fold, FoldT, InjL, InjLT, InjR, InjRT, IsoType,
    IsoVar, Let, LetT, Mu, PPair, PVar, Pair, PairT, Prod, Sum, TVar, Unit,
    UnitT, UnitV, Val, VarT, VarV, annotate, free_type_vars, subst_iso,
)

KEYWORDS = {"mu", "fix", "let", "in", "injl", "injr", "fold", "def", "main", "type"}

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|--[^\n]*)
  | (?P<nl>\n)
  | (?P<arrow><->)
  | (?P<annot>::)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<one>1)
  | (?P<sym>[()+*.,{}|=])
""", re.VERBOSE)


class ParseError(Exception):
    def __init__(self, message, line=1, col=1, expected=()):
        self.message = message
        self.line = line
        self.col = col
        self.expected = tuple(sorted(set(expected)))
        suffix = f" (expected one of: {', '.join(self.expected)})" if self.expected else ""
        super().__init__(f"{line}:{col}: {message}{suffix}")


@dataclass(frozen=True)
class Token:
    kind: str  # ident, kw, sym, eof
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    out, line, line_start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind, lexeme = m.lastgroup, m.group()
        col = pos - line_start + 1
        pos = m.end()
        if kind == "nl":
            line, line_start = line + 1, pos
        elif kind == "ws":
            continue
        elif kind == "ident":
            out.append(Token("kw" if lexeme in KEYWORDS else "ident", lexeme, line, col))
        else:
            out.append(Token("sym", lexeme, line, col))
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


@dataclass
class Definition:
    name: str
    iso: object
    type: IsoType
    line: int = 0
    col: int = 0
    clause_positions: list = field(default_factory=list)
    declared: IsoType | None = None  # the signature with alias names kept


@dataclass
class SourceFile:
    definitions: list
    main: object = None
    aliases: dict = field(default_factory=dict)
    main_pos: tuple = (0, 0)

    def lookup(self, name):
        for d in self.definitions:
            if d.name == name:
                return d
        raise KeyError(name)


_TERM_START = {"(", "{"}
_TERM_START_KW = {"injl", "injr", "fold", "let", "fix"}


class Parser:
    def __init__(self, text, aliases=None, definitions=None):
        self.tokens = tokenize(text)
        self.i = 0
        self.aliases = dict(aliases or {})
        self.defs = dict(definitions or {})
        self.fix_vars = []
        self.clause_positions = []
        self.depth = 0

    # -- token helpers
    @property
    def tok(self):
        return self.tokens[self.i]

    def peek(self, k=1):
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text):
        return self.tok.kind in ("sym", "kw") and self.tok.text == text

    def fail(self, message, expected=()):
        raise ParseError(message, self.tok.line, self.tok.col, expected)

    def expect(self, text):
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.fail(f"unexpected {found!r}", [repr(text)])
        tok = self.tok
        self.i += 1
        return tok

    def ident(self):
        if self.tok.kind != "ident":
            self.fail(f"unexpected {self.tok.text or 'end of input'!r}", ["identifier"])
        tok = self.tok
        self.i += 1
        return tok.text

    def done(self):
        if self.tok.kind != "eof":
            self.fail(f"unexpected {self.tok.text!r}", ["end of input"])

    # -- types
    def type(self, bound=()):
        left = self.prod(bound)
        if self.at("+"):
            self.i += 1
            return Sum(left, self.type(bound))
        return left

    def prod(self, bound):
        left = self.type_atom(bound)
        if self.at("*"):
            self.i += 1
            return Prod(left, self.prod(bound))
        return left

    def type_atom(self, bound):
        if self.at("1"):
            self.i += 1
            return Unit()
        if self.at("mu"):
            self.i += 1
            name = self.ident()
            self.expect(".")
            return Mu(name, self.type(bound + (name,)))
        if self.at("("):
            self.i += 1
            t = self.type(bound)
            self.expect(")")
            return t
        if self.tok.kind == "ident":
            name = self.ident()
            if name in bound:
                return TVar(name)
            if name in self.aliases:
                return self.aliases[name]
            self.i -= 1
            self.fail(f"unknown type {name!r}")
        self.fail(f"unexpected {self.tok.text or 'end of input'!r}",
                  ["'1'", "'mu'", "'('", "identifier"])

    # -- values and patterns
    def value(self):
        if self.at("("):
            self.i += 1
            if self.at(")"):
                self.i += 1
                return UnitV()
            items = [self.value()]
            while self.at(","):
                self.i += 1
                items.append(self.value())
            self.expect(")")
            return _right_nest(items, Pair)
        for kw, ctor in (("injl", InjL), ("injr", InjR), ("fold", Fold)):
            if self.at(kw):
                self.i += 1
                return ctor(self.value())
        if self.tok.kind == "ident":
            return VarV(self.ident())
        self.fail(f"unexpected {self.tok.text or 'end of input'!r}",
                  ["'('", "'injl'", "'injr'", "'fold'", "identifier"])

    def pattern(self):
        if self.at("("):
            self.i += 1
            items = [self.pattern()]
            while self.at(","):
                self.i += 1
                items.append(self.pattern())
            self.expect(")")
            return _right_nest(items, PPair)
        return PVar(self.ident())

    # -- expressions and isos
    def expr(self):
        if self.at("let"):
            self.i += 1
            p = self.pattern()
            self.expect("=")
            iso = self.iso()
            arg = self.pattern()
            self.expect("in")
            return Let(p, iso, arg, self.expr())
        return Val(self.value())

    def iso(self):
        if self.at("{"):
            self.i += 1
            self.depth += 1
            positions = []
            clauses = [self.clause(positions)]
            while self.at("|"):
                self.i += 1
                clauses.append(self.clause(positions))
            self.expect("}")
            self.depth -= 1
            if self.depth == 0:
                self.clause_positions = positions
            return Clauses(tuple(clauses))
        if self.at("fix"):
            self.i += 1
            name = self.ident()
            self.expect(".")
            self.fix_vars.append(name)
            try:
                return Fix(name, self.iso())
            finally:
                self.fix_vars.pop()
        if self.at("("):
            self.i += 1
            iso = self.iso()
            if self.at("::"):
                self.i += 1
                lhs = self.type()
                self.expect("<->")
                iso = annotate(iso, IsoType(lhs, self.type()))
            self.expect(")")
            return iso
        if self.tok.kind == "ident":
            name = self.ident()
            if name not in self.fix_vars and name in self.defs:
                return self.defs[name]
            return IsoVar(name)
        self.fail(f"unexpected {self.tok.text or 'end of input'!r}",
                  ["'{'", "'fix'", "identifier"])

    def clause(self, positions):
        positions.append((self.tok.line, self.tok.col))
        v = self.value()
        self.expect("<->")
        return (v, self.expr())

    # -- terms
    def term(self):
        if self.at("let"):
            self.i += 1
            p = self.pattern()
            self.expect("=")
            bound = self.term()
            self.expect("in")
            return LetT(p, bound, self.term())
        for kw, ctor in (("injl", InjLT), ("injr", InjRT), ("fold", FoldT)):
            if self.at(kw):
                self.i += 1
                return ctor(self.term())
        if self.at("{") or self.at("fix"):
            iso = self.iso()
            return App(iso, self.term())
        if self.at("("):
            # either a parenthesised iso applied to a term, or a tuple
            save = self.i
            if self._paren_is_iso():
                self.i = save
                iso = self.iso()
                return App(iso, self.term())
            self.i = save + 1
            if self.at(")"):
                self.i += 1
                return UnitT()
            items = [self.term()]
            while self.at(","):
                self.i += 1
                items.append(self.term())
            self.expect(")")
            return _right_nest(items, PairT)
        if self.tok.kind == "ident":
            nxt = self.peek()
            if (nxt.kind == "sym" and nxt.text in _TERM_START) or nxt.kind == "ident" \
                    or (nxt.kind == "kw" and nxt.text in _TERM_START_KW):
                iso = self.iso()
                return App(iso, self.term())
            return VarT(self.ident())
        self.fail(f"unexpected {self.tok.text or 'end of input'!r}",
                  ["'('", "'injl'", "'injr'", "'fold'", "'let'", "'{'", "identifier"])

    def _paren_is_iso(self):
        # "(" followed by "{" or "fix" can only open an iso
        nxt = self.peek()
        if nxt.kind == "ident":
            after = self.peek(2)
            return after.kind == "sym" and after.text == "::"
        return nxt.text in ("{", "fix") and nxt.kind in ("sym", "kw")

    def _declared_signature(self, start):
        # re-read the signature with every alias standing for its own name
        end, saved = self.i, self.aliases
        self.i, self.aliases = start, {name: TVar(name) for name in saved}
        try:
            lhs = self.type()
            self.expect("<->")
            return IsoType(lhs, self.type())
        finally:
            self.i, self.aliases = end, saved

    # -- files
    def source_file(self):
        definitions, main, main_pos = [], None, (0, 0)
        while self.tok.kind != "eof":
            if self.at("type"):
                self.i += 1
                name = self.ident()
                if self.at("="):
                    self.i += 1
                    self.aliases[name] = self.type()
                else:
                    # an opaque atom, inhabited only by variables
                    self.aliases[name] = TVar(name)
            elif self.at("def"):
                start = self.tok
                self.i += 1
                name = self.ident()
                if name in self.defs:
                    self.i -= 1
                    self.fail(f"duplicate definition {name!r}")
                self.expect("::")
                sig_start = self.i
                lhs = self.type()
                self.expect("<->")
                rhs = self.type()
                declared = self._declared_signature(sig_start)
                self.expect("=")
                self.clause_positions = []
                iso = annotate(self.iso(), IsoType(lhs, rhs))
                d = Definition(name, iso, IsoType(lhs, rhs), start.line, start.col,
                               list(self.clause_positions), declared)
                definitions.append(d)
                self.defs[name] = iso
            elif self.at("main"):
                main_pos = (self.tok.line, self.tok.col)
                self.i += 1
                self.expect("=")
                main = self.term()
            else:
                self.fail(f"unexpected {self.tok.text!r}", ["'def'", "'type'", "'main'"])
        return SourceFile(definitions, main, dict(self.aliases), main_pos)


def _right_nest(items, ctor):
    out = items[-1]
    for item in reversed(items[:-1]):
        out = ctor(item, out)
    return out


def _entry(rule):
    def run(text, aliases=None, definitions=None):
        p = Parser(text, aliases, definitions)
        out = getattr(p, rule)()
        p.done()
        return out
    run.__name__ = f"parse_{rule}"
    return run


parse_type = _entry("type")
parse_value = _entry("value")
parse_pattern = _entry("pattern")
parse_expr = _entry("expr")
parse_iso = _entry("iso")
parse_term = _entry("term")


def parse(text: str, aliases=None) -> SourceFile:
    p = Parser(text, aliases)
    return p.source_file()


def parse_annotated_iso(text, aliases=None, definitions=None):
    """``iso :: A <-> B`` to a pair (iso, IsoType)."""
    p = Parser(text, aliases, definitions)
    iso = p.iso()
    p.expect("::")
    lhs = p.type()
    p.expect("<->")
    rhs = p.type()
    p.done()
    return iso, IsoType(lhs, rhs)


# ---------------------------------------------------------------- pretty printing

def pretty(x) -> str:
    if isinstance(x, BaseType):
        return _pp_type(x)
    if isinstance(x, IsoType):
        return f"{pretty(x.lhs)} <-> {pretty(x.rhs)}"
    if isinstance(x, (UnitV, VarV, InjL, InjR, Pair, Fold)):
        return _pp_value(x)
    if isinstance(x, (PVar, PPair)):
        return _pp_pattern(x)
    if isinstance(x, (Val, Let)):
        return _pp_expr(x)
    if isinstance(x, (Clauses, Fix, IsoVar)):
        return _pp_iso(x)
    if isinstance(x, SourceFile):
        return _pp_file(x)
    return _pp_term(x)


def _pp_type(t, level="sum", tail=True):
    # level: the loosest operator allowed unparenthesised at this position
    # (nested binary connectives are always bracketed, even on the right);
    # tail: nothing follows, so a bare ``mu`` may extend to the right.
    # Under a connective a ``mu`` is bracketed on either side.
    if isinstance(t, Unit):
        return "1"
    if isinstance(t, TVar):
        return t.name
    if isinstance(t, Mu):
        s = f"mu {t.binder}. {_pp_type(t.body)}"
        return s if tail else f"({s})"
    if isinstance(t, Sum):
        if level != "sum":
            return f"({_pp_type(t)})"
        return f"{_pp_type(t.left, 'prod', False)} + {_pp_type(t.right, 'prod', False)}"
    if isinstance(t, Prod):
        if level == "atom":
            return f"({_pp_type(t)})"
        return f"{_pp_type(t.left, 'atom', False)} * {_pp_type(t.right, 'atom', False)}"
    raise TypeError(t)


def _pp_value(v):
    if isinstance(v, UnitV):
        return "()"
    if isinstance(v, VarV):
        return v.name
    if isinstance(v, (InjL, InjR, Fold)):
        kw = {InjL: "injl", InjR: "injr", Fold: "fold"}[type(v)]
        inner = _pp_value(v.value)
        if isinstance(v.value, (InjL, InjR, Fold)):
            inner = f"({inner})"
        return f"{kw} {inner}"
    items = []
    while isinstance(v, Pair):
        items.append(_pp_value(v.left))
        v = v.right
    items.append(_pp_value(v))
    return f"({', '.join(items)})"


def _pp_pattern(p):
    if isinstance(p, PVar):
        return p.name
    items = []
    while isinstance(p, PPair):
        items.append(_pp_pattern(p.left))
        p = p.right
    items.append(_pp_pattern(p))
    return f"({', '.join(items)})"


def _pp_expr(e):
    if isinstance(e, Val):
        return _pp_value(e.value)
    return (f"let {_pp_pattern(e.pattern)} = {_pp_iso(e.iso)} {_pp_pattern(e.arg)} "
            f"in {_pp_expr(e.body)}")


def _pp_iso(w, top=False):
    if isinstance(w, IsoVar):
        return w.name
    if isinstance(w, Fix):
        s = f"fix {w.var}. {_pp_iso(w.body, True)}"
    else:
        s = "{ " + " | ".join(f"{_pp_value(v)} <-> {_pp_expr(e)}" for v, e in w.clauses) + " }"
    if w.ann is not None and not top:
        return f"({s} :: {pretty(w.ann)})"
    return s if isinstance(w, Clauses) or top else f"({s})"


def _pp_term(t, atomic=False):
    if isinstance(t, UnitT):
        return "()"
    if isinstance(t, VarT):
        return t.name
    if isinstance(t, (InjLT, InjRT, FoldT)):
        kw = {InjLT: "injl", InjRT: "injr", FoldT: "fold"}[type(t)]
        s = f"{kw} {_pp_term(t.term, True)}"
    elif isinstance(t, PairT):
        items = []
        while isinstance(t, PairT):
            items.append(_pp_term(t.left))
            t = t.right
        items.append(_pp_term(t))
        return f"({', '.join(items)})"
    elif isinstance(t, App):
        s = f"{_pp_iso(t.iso)} {_pp_term(t.arg, True)}"
    elif isinstance(t, LetT):
        s = f"let {_pp_pattern(t.pattern)} = {_pp_term(t.bound)} in {_pp_term(t.body)}"
    else:
        raise TypeError(t)
    return f"({s})" if atomic else s


def _pp_file(src):
    lines = [f"type {name}" if t == TVar(name) else f"type {name} = {pretty(t)}"
             for name, t in src.aliases.items()]
    for d in src.definitions:
        lines.append(f"def {d.name} :: {pretty(d.declared or d.type)} =\n  {_pp_iso(d.iso, top=True)}")
    if src.main is not None:
        lines.append(f"main = {pretty(src.main)}")
    return "\n".join(lines) + "\n"


def load(path) -> SourceFile:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


__all__ = [
    "ParseError", "SourceFile", "Definition", "parse", "parse_type", "parse_value",
    "parse_pattern", "parse_expr", "parse_iso", "parse_term", "parse_annotated_iso",
    "pretty", "tokenize", "load", "free_type_vars", "subst_iso",
]
