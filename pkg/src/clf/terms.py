"""Abstract terms, reference trees, and their canonical text forms.

A parse produces two parallel values: the abstract :data:`Term` and a
:data:`RefTree` with the same shape whose nodes carry source line numbers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True, slots=True)
class Symbol:
    name: str


@dataclass(frozen=True, slots=True)
class Int:
    value: int


@dataclass(frozen=True, slots=True)
class Str:
    value: str


@dataclass(frozen=True, slots=True)
class Compound:
    functor: str
    args: tuple

    def __post_init__(self):
        if not self.functor:
            raise ValueError("compound functor must be non-empty")
        if not self.args:
            raise ValueError("compound arity must be >= 1; use Symbol for constants")


@dataclass(frozen=True, slots=True)
class List:
    elements: tuple = ()


Term = Union[Symbol, Int, Str, Compound, List]


@dataclass(frozen=True, slots=True)
class Node:
    line: int
    children: tuple = ()

    def __post_init__(self):
        if self.line < 1:
            raise ValueError(f"reference line must be >= 1, got {self.line}")


class _Nil:
    __slots__ = ()

    def __repr__(self):
        return "NIL"

    def __reduce__(self):
        return (_nil, ())


def _nil():
    return NIL


NIL = object.__new__(_Nil)

RefTree = Union[Node, _Nil]


_PLAIN_ATOM = re.compile(r"[a-z][a-z0-9]*\Z")
_ESCAPES = {"\\": "\\\\", "\n": "\\n", "\t": "\\t", "\r": "\\r"}


def _escape(text: str, quote: str) -> str:
    out = []
    for ch in text:
        if ch == quote:
            out.append("\\" + ch)
        else:
            out.append(_ESCAPES.get(ch, ch))
    return "".join(out)


def quote_atom(name: str) -> str:
    """Return ``name`` as an atom, single-quoted unless it is plain lowercase alphanumeric."""
    if _PLAIN_ATOM.match(name):
        return name
    return "'" + _escape(name, "'") + "'"


def quote_string(text: str) -> str:
    return '"' + _escape(text, '"') + '"'


def print_term(t: Term) -> str:
    out: list[str] = []
    _write_term(t, out)
    return "".join(out)


def _write_term(t, out):
    # explicit stack: parse results can nest far deeper than the recursion limit
    stack = [t]
    while stack:
        t = stack.pop()
        if type(t) is str:
            out.append(t)
        elif isinstance(t, Compound):
            out.append(quote_atom(t.functor) + "(")
            stack.append(")")
            for i in range(len(t.args) - 1, -1, -1):
                stack.append(t.args[i])
                if i:
                    stack.append(",")
        elif isinstance(t, Symbol):
            out.append(quote_atom(t.name))
        elif isinstance(t, Int):
            out.append(str(t.value))
        elif isinstance(t, Str):
            out.append(quote_string(t.value))
        elif isinstance(t, List):
            out.append("[")
            stack.append("]")
            for i in range(len(t.elements) - 1, -1, -1):
                stack.append(t.elements[i])
                if i:
                    stack.append(",")
        else:
            raise TypeError(f"not a term: {t!r}")


def print_ref(r: RefTree) -> str:
    out: list[str] = []
    _write_ref(r, out)
    return "".join(out)


def _write_ref(r, out):
    stack = [r]
    while stack:
        r = stack.pop()
        if type(r) is str:
            out.append(r)
        elif r is NIL:
            out.append("nil")
        elif isinstance(r, Node):
            out.append(f"node({r.line}")
            stack.append(")")
            for c in reversed(r.children):
                stack.append(c)
                stack.append(",")
        else:
            raise TypeError(f"not a reference tree: {r!r}")


def shape_matches(t: Term, r: RefTree) -> bool:
    """True iff ``r`` has the shape of ``t``.

    Compounds pair with a node carrying one child per argument, atomic
    values pair with ``nil``, and a non-empty list pairs with a chain of
    two-child cons nodes ending in ``nil``.
    """
    stack = [(t, r)]
    while stack:
        t, r = stack.pop()
        if isinstance(t, Compound):
            if not isinstance(r, Node) or len(r.children) != len(t.args):
                return False
            stack.extend(zip(t.args, r.children))
        elif isinstance(t, List):
            for e in t.elements:
                if not isinstance(r, Node) or len(r.children) != 2:
                    return False
                stack.append((e, r.children[0]))
                r = r.children[1]
            if r is not NIL:
                return False
        elif isinstance(t, (Symbol, Int, Str)):
            if r is not NIL:
                return False
        else:
            return False
    return True
