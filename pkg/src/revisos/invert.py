"""Syntactic inverse of an iso."""
from __future__ import annotations

from .core import Clauses, Fix, IsoVar, Let, Val


def invert(iso):
    if isinstance(iso, IsoVar):
        return iso
    ann = iso.ann.flip() if iso.ann is not None else None
    if isinstance(iso, Fix):
        return Fix(iso.var, invert(iso.body), ann)
    return Clauses(tuple(invert_clause(v, e) for v, e in iso.clauses), ann)


def invert_clause(v, e):
    """``v <-> let p1 = w1 p1' ... in v'`` becomes ``v' <-> let pn' = wn~ pn ... in v``."""
    lets = []
    while isinstance(e, Let):
        lets.append(e)
        e = e.body
    body = Val(v)
    for let in lets:
        body = Let(let.arg, invert(let.iso), let.pattern, body)
    return e.value, body
