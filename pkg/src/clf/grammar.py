"""CS grammars: clause syntax, data model and reader.

A grammar is a list of clauses written like logic-program rules::

    exp(plus(A,B)) :- exp(A), ['+'], term(B).
    exp(A) :- term(A).
    factor(id(A)) :- stoken('ID', string(A)).
    element_s([E|L]) :- element(E), element_s(L).
    element_s([]).

Every nonterminal takes exactly one argument, the term it builds.
Nonterminals whose name contains ``$`` are reserved for helpers made by
the grammar transformations; those take two arguments (input, output).
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import GrammarError
from .terms import quote_atom

# -- term patterns -------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class SymbolP:
    name: str


@dataclass(frozen=True)
class IntP:
    value: int


@dataclass(frozen=True)
class CompoundP:
    functor: str
    args: tuple


@dataclass(frozen=True)
class ListP:
    items: tuple
    tail: Optional[Var] = None


def pattern_vars(p, out=None):
    """Named variables of ``p`` in left-to-right order (``_`` excluded)."""
    if out is None:
        out = []
    if isinstance(p, Var):
        if p.name != "_" and p.name not in out:
            out.append(p.name)
    elif isinstance(p, CompoundP):
        for a in p.args:
            pattern_vars(a, out)
    elif isinstance(p, ListP):
        for a in p.items:
            pattern_vars(a, out)
        if p.tail is not None:
            pattern_vars(p.tail, out)
    return out


def format_pattern(p) -> str:
    if isinstance(p, Var):
        return p.name
    if isinstance(p, SymbolP):
        return quote_atom(p.name)
    if isinstance(p, IntP):
        return str(p.value)
    if isinstance(p, CompoundP):
        return quote_atom(p.functor) + "(" + ",".join(format_pattern(a) for a in p.args) + ")"
    if isinstance(p, ListP):
        inner = ",".join(format_pattern(a) for a in p.items)
        if p.tail is not None:
            inner += "|" + format_pattern(p.tail)
        return "[" + inner + "]"
    raise TypeError(f"not a pattern: {p!r}")


# -- clauses -------------------------------------------------------------------


@dataclass(frozen=True)
class KeywordLit:
    text: str


@dataclass(frozen=True)
class AnyKeyword:
    """Match whichever keyword comes next, binding its text (dispatcher clauses only)."""

    var: Var


@dataclass(frozen=True)
class STokenLit:
    cls: str
    kind: str  # "string" | "integer"
    var: Var


@dataclass(frozen=True)
class Call:
    nt: str
    args: tuple


# Clause roles.  "user" clauses come from source text; the others are made
# by the transformations and tell the compiler how reference trees flow.
USER, DISPATCH, KEYED, BASE, STEP, STOP = "user", "dispatch", "keyed", "base", "step", "stop"


@dataclass(frozen=True)
class Clause:
    head: str
    args: tuple
    body: tuple = ()
    role: str = USER
    line: Optional[int] = field(default=None, compare=False)

    @property
    def pattern(self):
        return self.args[-1]


@dataclass(frozen=True)
class Grammar:
    clauses: tuple = ()

    def nonterminals(self):
        """Map each nonterminal to its clauses, in order of first definition."""
        out = {}
        for c in self.clauses:
            out.setdefault(c.head, []).append(c)
        return out

    def regrouped(self):
        return Grammar(tuple(c for cs in self.nonterminals().values() for c in cs))


def is_helper(name):
    return "$" in name


def format_item(item) -> str:
    if isinstance(item, KeywordLit):
        return "[" + quote_keyword(item.text) + "]"
    if isinstance(item, AnyKeyword):
        return "[" + item.var.name + "]"
    if isinstance(item, STokenLit):
        return f"stoken({quote_keyword(item.cls)},{item.kind}({item.var.name}))"
    if isinstance(item, Call):
        return item.nt + "(" + ",".join(format_pattern(a) for a in item.args) + ")"
    raise TypeError(f"not a body item: {item!r}")


def quote_keyword(text):
    return "'" + text.replace("\\", "\\\\").replace("'", "\\'") + "'"


def format_clause(c: Clause, arrow=":-") -> str:
    args = []
    for i, a in enumerate(c.args):
        if c.role == KEYED and i == 0 and isinstance(a, SymbolP):
            args.append(quote_keyword(a.name))
        else:
            args.append(format_pattern(a))
    head = f"{c.head}({','.join(args)})"
    body = ", ".join(format_item(i) for i in c.body)
    if arrow == ":-":
        return f"{head} :- {body}." if body else f"{head}."
    return f"{head} {arrow} {body}." if body else f"{head} {arrow} ."


def format_grammar(g: Grammar) -> str:
    return "".join(format_clause(c) + "\n" for c in g.clauses)


# -- reader --------------------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<neck>:-)
  | (?P<arrow>-->)
  | (?P<int>-?[0-9]+)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<atom>[a-z][A-Za-z0-9_$]*)
  | (?P<qatom>'(?:[^'\\\n]|\\.|'')*')
  | (?P<punct>[()\[\],|.])
  | (?P<other>.)
    """,
    re.VERBOSE,
)
_QESC = {"n": "\n", "t": "\t", "\\": "\\", "'": "'"}


def _tokenize(text):
    line, line_start = 1, 0
    for m in _TOKEN.finditer(text):
        kind = m.lastgroup
        value = m.group()
        col = m.start() - line_start + 1
        if kind == "ws":
            nl = value.count("\n")
            if nl:
                line += nl
                line_start = m.start() + value.rindex("\n") + 1
            continue
        if kind == "qatom":
            body = value[1:-1].replace("''", "'")
            value = re.sub(r"\\(.)", lambda e: _QESC.get(e.group(1), e.group(1)), body)
            kind = "atom"
        elif kind == "other":
            if value == "{":
                raise GrammarError("embedded goals '{...}' are not supported", line, col)
            if value == "'":
                raise GrammarError("unterminated quoted atom", line, col)
            raise GrammarError(f"unexpected character {value!r}", line, col)
        elif kind == "arrow":
            raise GrammarError("use ':-' instead of '-->' in CS clauses", line, col)
        yield kind, value, line, col
    yield "eof", "", line, len(text) - line_start + 1


class _Reader:
    def __init__(self, text):
        self.toks = list(_tokenize(text))
        self.i = 0

    @property
    def tok(self):
        return self.toks[self.i]

    def error(self, msg, tok=None):
        tok = tok or self.tok
        return GrammarError(msg, tok[2], tok[3])

    def expect(self, kind, value=None):
        t = self.tok
        if t[0] != kind or (value is not None and t[1] != value):
            want = value if value is not None else kind
            got = t[1] if t[0] != "eof" else "end of file"
            raise self.error(f"expected {want!r}, got {got!r}")
        self.i += 1
        return t

    def at(self, kind, value=None):
        t = self.tok
        return t[0] == kind and (value is None or t[1] == value)

    def term(self):
        t = self.tok
        if t[0] == "var":
            self.i += 1
            return Var(t[1])
        if t[0] == "int":
            self.i += 1
            return IntP(int(t[1]))
        if t[0] == "atom":
            self.i += 1
            if self.at("punct", "("):
                self.i += 1
                args = [self.term()]
                while self.at("punct", ","):
                    self.i += 1
                    args.append(self.term())
                self.expect("punct", ")")
                return CompoundP(t[1], tuple(args))
            return SymbolP(t[1])
        if t[0] == "punct" and t[1] == "[":
            self.i += 1
            if self.at("punct", "]"):
                self.i += 1
                return ListP(())
            items = [self.term()]
            while self.at("punct", ","):
                self.i += 1
                items.append(self.term())
            tail = None
            if self.at("punct", "|"):
                self.i += 1
                tt = self.tok
                tail = self.term()
                if isinstance(tail, ListP):
                    items.extend(tail.items)
                    tail = tail.tail
                elif not isinstance(tail, Var):
                    raise self.error("list tail must be a variable or a list", tt)
            self.expect("punct", "]")
            return ListP(tuple(items), tail)
        got = t[1] if t[0] != "eof" else "end of file"
        raise self.error(f"expected a term, got {got!r}")

    def clause(self):
        start = self.tok
        head = self.term()
        body = []
        if self.at("neck"):
            self.i += 1
            body.append((self.tok, self.term()))
            while self.at("punct", ","):
                self.i += 1
                body.append((self.tok, self.term()))
        self.expect("punct", ".")
        return _make_clause(head, body, start)


def _make_clause(head, body, start):
    line, col = start[2], start[3]
    if isinstance(head, SymbolP):
        raise GrammarError(f"{head.name}: a nonterminal needs exactly one construction argument", line, col)
    if not isinstance(head, CompoundP):
        raise GrammarError("clause head must be a nonterminal", line, col)
    if len(head.args) != 1:
        raise GrammarError(
            f"{head.functor}/{len(head.args)}: a nonterminal takes exactly one construction argument", line, col
        )
    _check_nt_name(head.functor, line, col)
    items = []
    for tok, g in body:
        items.extend(_body_item(g, tok[2], tok[3]))
    clause = Clause(head.functor, head.args, tuple(items), USER, line)
    bound = set()
    for it in items:
        if isinstance(it, STokenLit):
            bound.add(it.var.name)
        elif isinstance(it, Call):
            bound.update(pattern_vars(it.args[0]))
    head_vars = pattern_vars(head.args[0])
    if _has_anonymous(head.args[0]):
        raise GrammarError(f"{head.functor}: '_' cannot appear in a clause head", line, col)
    for v in head_vars:
        if v not in bound:
            raise GrammarError(f"{head.functor}: head variable {v} does not occur in the body", line, col)
    return clause


def _has_anonymous(p):
    if isinstance(p, Var):
        return p.name == "_"
    if isinstance(p, CompoundP):
        return any(_has_anonymous(a) for a in p.args)
    if isinstance(p, ListP):
        return any(_has_anonymous(a) for a in p.items) or (p.tail is not None and p.tail.name == "_")
    return False


def _check_nt_name(name, line, col):
    if "$" in name:
        raise GrammarError(f"{name}: '$' is reserved for generated nonterminals", line, col)
    if name == "stoken":
        raise GrammarError("'stoken' is reserved for token literals", line, col)


def _body_item(g, line, col):
    if isinstance(g, ListP):
        if g.tail is not None:
            raise GrammarError("keyword list cannot have a tail", line, col)
        out = []
        for e in g.items:
            if not isinstance(e, SymbolP):
                raise GrammarError(f"keyword list elements must be atoms, got {format_pattern(e)}", line, col)
            out.append(KeywordLit(e.name))
        return out
    if isinstance(g, CompoundP) and g.functor == "stoken":
        if len(g.args) != 2:
            raise GrammarError("stoken takes a class name and string(V) or integer(V)", line, col)
        cls, val = g.args
        if not isinstance(cls, SymbolP) or not cls.name or any(c.isspace() for c in cls.name):
            raise GrammarError("stoken class must be an atom without spaces", line, col)
        if (
            not isinstance(val, CompoundP)
            or val.functor not in ("string", "integer")
            or len(val.args) != 1
            or not isinstance(val.args[0], Var)
        ):
            raise GrammarError("stoken value must be string(V) or integer(V) with V a variable", line, col)
        return [STokenLit(cls.name, val.functor, val.args[0])]
    if isinstance(g, CompoundP):
        if len(g.args) != 1:
            raise GrammarError(
                f"{g.functor}/{len(g.args)}: a nonterminal takes exactly one construction argument", line, col
            )
        _check_nt_name(g.functor, line, col)
        return [Call(g.functor, g.args)]
    if isinstance(g, SymbolP):
        raise GrammarError(f"{g.name}: a nonterminal needs exactly one construction argument", line, col)
    raise GrammarError(f"unknown body form {format_pattern(g)}", line, col)


def parse_cs(text: str) -> Grammar:
    r = _Reader(text)
    clauses = []
    while not r.at("eof"):
        clauses.append(r.clause())
    return Grammar(tuple(clauses))


def load_grammar_file(path) -> Grammar:
    with open(path, encoding="utf-8") as f:
        return parse_cs(f.read())
