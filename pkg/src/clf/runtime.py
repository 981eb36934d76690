"""Backtracking parser runtime.

Runs a :class:`~clf.compiler.CompiledGrammar` over a token list and
returns the first parse in clause order.  The machine keeps its own
frame and choice-point stacks, so deep inputs never touch the Python
recursion limit.  Each call consults the callee's lookahead index and
only tries the alternatives that could start with the next token, which
keeps backtracking shallow on ordinary grammars.

Comments and line breaks are stripped from the token list first; each
remaining token remembers its line so reference-tree nodes can be
stamped without re-scanning.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .compiler import (
    EMPTY,
    H_DEFAULT,
    H_DISPATCH,
    OP_ANYKW,
    OP_CALL,
    OP_EOF,
    OP_KW,
    OP_TOK,
    Cons,
    CompiledGrammar,
)
from .errors import KindMismatchError, ParseError
from .terms import Compound, Int, List, Symbol
from .tokens import CommentText, IToken, Keyword, LexError, Newline, SToken


# -- comment skipping, exposed as a value-level operation ---------------------------


@dataclass(frozen=True)
class ParseState:
    tokens: tuple
    cursor: int = 0
    line: int = 0  # newlines consumed so far
    comments: tuple = ()
    high_water: int = 0
    keep_comments: bool = False


def skip_comm(s: ParseState) -> ParseState:
    """Advance past line breaks and comment text, counting lines and keeping comments if asked."""
    toks, i, line = s.tokens, s.cursor, s.line
    kept = list(s.comments)
    while i < len(toks):
        t = toks[i]
        if isinstance(t, Newline):
            line += 1
        elif isinstance(t, CommentText):
            if s.keep_comments:
                kept.append((line + 1, t.text))
        else:
            break
        i += 1
    return ParseState(s.tokens, i, line, tuple(kept), max(s.high_water, i), s.keep_comments)


@dataclass
class ParseResult:
    term: object
    refs: object
    comments: list = field(default_factory=list)


# -- token preparation ---------------------------------------------------------------


def token_key(t):
    if isinstance(t, Keyword):
        return ("k", t.text)
    if isinstance(t, (SToken, IToken)):
        return ("t", t.name)
    return None


def describe_token(t):
    if t is None:
        return "end of input"
    if isinstance(t, Keyword):
        return f"keyword '{t.text}'"
    if isinstance(t, SToken):
        return f"{t.name} {t.value!r}"
    if isinstance(t, IToken):
        return f"{t.name} {t.value}"
    if isinstance(t, LexError):
        return f"unrecognised text {t.text!r}"
    return repr(t)


class _Ctx:
    __slots__ = ("lines", "n", "empty_line")

    def __init__(self, lines, empty_line):
        self.lines = lines
        self.n = len(lines)
        self.empty_line = empty_line

    def entry_line(self, p):
        if p > 0:
            return self.lines[p - 1]
        return self.lines[0] if self.n else self.empty_line


class _Frame:
    __slots__ = ("clause", "env", "start", "kwpos", "acc_ref", "parent", "ret_pc")

    def __init__(self, clause, env, start, kwpos, acc_ref, parent, ret_pc):
        self.clause = clause
        self.env = env
        self.start = start
        self.kwpos = kwpos
        self.acc_ref = acc_ref
        self.parent = parent
        self.ret_pc = ret_pc


def _prepare(cg, tokens):
    key_ids = cg.key_ids
    unknown = cg.unknown_kid
    sig, kids, vals, kinds, lines, comments = [], [], [], [], [], []
    line = 1
    for t in tokens:
        tp = type(t)
        if tp is Newline:
            line += 1
            continue
        if tp is CommentText:
            comments.append((line, t.text))
            continue
        sig.append(t)
        lines.append(line)
        if tp is Keyword:
            kids.append(key_ids.get(("k", t.text), unknown))
            vals.append(Symbol(t.text))
            kinds.append("k")
        elif tp is SToken:
            kids.append(key_ids.get(("t", t.name), unknown))
            vals.append(Symbol(t.value))
            kinds.append("s")
        elif tp is IToken:
            kids.append(key_ids.get(("t", t.name), unknown))
            vals.append(Int(t.value))
            kinds.append("i")
        else:
            kids.append(unknown)
            vals.append(None)
            kinds.append("x")
    kids.append(cg.eof_kid)
    return sig, kids, vals, kinds, lines, comments, line


# -- conversion of runtime values to public terms ----------------------------------------


def export_term(v):
    """Replace runtime list cells by :class:`List` values (iteratively).

    A list whose tail is not a list is exported as nested ``'.'(Head,Tail)``
    compounds, the canonical form of an improper list.
    """
    out = []
    stack = [(0, v)]  # (0, value) visits a value; (1, compound) / (2, count) rebuild one
    while stack:
        tag, x = stack.pop()
        if tag == 0:
            tx = type(x)
            if tx is Compound:
                stack.append((1, x))
                stack.extend((0, a) for a in reversed(x.args))
            elif tx is Cons or x is EMPTY:
                elems = []
                while type(x) is Cons:
                    elems.append(x.head)
                    x = x.tail
                stack.append((2, len(elems)))
                stack.append((0, x) if x is not EMPTY else (0, _EMPTY_LIST))
                stack.extend((0, e) for e in reversed(elems))
            else:
                out.append(x)
        elif tag == 1:
            k = len(x.args)
            args = tuple(out[len(out) - k :])
            del out[len(out) - k :]
            same = all(a is b for a, b in zip(args, x.args))
            out.append(x if same else Compound(x.functor, args))
        else:
            tail = out.pop()
            elems = tuple(out[len(out) - x :])
            del out[len(out) - x :]
            if type(tail) is List:
                out.append(List(elems + tail.elements))
            else:
                for e in reversed(elems):
                    tail = Compound(".", (e, tail))
                out.append(tail)
    return out[0]


_EMPTY_LIST = List(())


# -- the machine ---------------------------------------------------------------------------


def _fail_error(cg, sig, lines, hw, expected, filename):
    found = sig[hw] if hw < len(sig) else None
    if hw < len(lines):
        line = lines[hw]
    else:
        line = lines[-1] if lines else 1
    exp = set()
    for e in expected:
        exp |= e
    return ParseError(line, sorted(exp), describe_token(found), filename)


def parse_tokens(cg: CompiledGrammar, tokens, keep_comments=False, filename=None) -> ParseResult:
    """Parse a token sequence; return the first solution or raise :class:`ParseError`."""
    sig, kids, vals, kinds, lines, comments, last_line = _prepare(cg, tokens)
    n = len(sig)
    ctx = _Ctx(lines, last_line)

    root = cg.root
    frame = _Frame(root, [None] * root.nslots, 0, None, None, None, -1)
    pc = 0
    cursor = 0
    hw = 0
    hw_exp = []
    cps = []
    while True:
        items = frame.clause.items
        if pc < len(items):
            ins = items[pc]
            op = ins[0]
            if op == OP_CALL:
                cnt = ins[1]
                kid = kids[cursor]
                if cursor == hw:
                    hw_exp.append(cnt.expect[kid])
                env = frame.env
                inp = ins[2](env) if ins[2] is not None else None
                hmode = ins[5]
                if hmode == H_DEFAULT:
                    start, kwpos, acc_ref = cursor, None, None
                elif hmode == H_DISPATCH:
                    start, kwpos, acc_ref = frame.start, env[ins[6]], None
                else:
                    start, kwpos, acc_ref = frame.start, None, ins[6](frame, ctx)
                if cnt.dispatch is not None:
                    table = cnt.dispatch.get(inp.name)
                    alts = table[kid] if table is not None else ()
                else:
                    alts = cnt.select[kid]
                nalts = len(alts)
                i = 0
                entered = False
                while i < nalts:
                    alt = alts[i]
                    i += 1
                    aenv = [None] * alt.nslots
                    if alt.in_match is None or alt.in_match(inp, aenv):
                        if i < nalts:
                            cps.append((cursor, alts, i, frame, pc, inp, start, kwpos, acc_ref))
                        frame = _Frame(alt, aenv, start, kwpos, acc_ref, frame, pc)
                        pc = 0
                        entered = True
                        break
                if entered:
                    continue
            elif op == OP_KW:
                if kids[cursor] == ins[1]:
                    if ins[2] >= 0:
                        frame.env[ins[2]] = cursor
                    cursor += 1
                    if cursor > hw:
                        hw = cursor
                        hw_exp = []
                    pc += 1
                    continue
                if cursor == hw:
                    hw_exp.append(ins[3])
            elif op == OP_TOK:
                if kids[cursor] == ins[1]:
                    if kinds[cursor] != ins[2]:
                        want = "integer" if ins[2] == "i" else "string"
                        raise KindMismatchError(
                            f"token class {sig[cursor].name} carries a "
                            f"{'integer' if kinds[cursor] == 'i' else 'string'} value "
                            f"but the grammar expects {want}",
                            lines[cursor],
                        )
                    mode = ins[4]
                    ok = True
                    if mode == 1:
                        frame.env[ins[3]] = vals[cursor]
                    elif mode == 2:
                        ok = frame.env[ins[3]] == vals[cursor]
                    if ok:
                        if ins[5] >= 0:
                            frame.env[ins[5]] = cursor
                        cursor += 1
                        if cursor > hw:
                            hw = cursor
                            hw_exp = []
                        pc += 1
                        continue
                if cursor == hw:
                    hw_exp.append(ins[6])
            elif op == OP_ANYKW:
                if cursor < n and kinds[cursor] == "k":
                    frame.env[ins[1]] = vals[cursor]
                    frame.env[ins[2]] = cursor
                    cursor += 1
                    if cursor > hw:
                        hw = cursor
                        hw_exp = []
                    pc += 1
                    continue
                if cursor == hw:
                    hw_exp.append(ins[3])
            elif op == OP_EOF:
                if cursor == n:
                    pc += 1
                    continue
                if cursor == hw:
                    hw_exp.append(ins[1])
        else:
            parent = frame.parent
            if parent is None:
                term = export_term(frame.env[0])
                return ParseResult(term, frame.env[1], [(ln, txt) for ln, txt in comments] if keep_comments else [])
            clause = frame.clause
            term = clause.build(frame.env)
            ins = parent.clause.items[frame.ret_pc]
            mode, slot, matcher = ins[3]
            penv = parent.env
            if mode == 1:
                ok = True
                penv[slot] = term
            elif mode == 2:
                ok = penv[slot] == term
            else:
                ok = matcher(term, penv)
            if ok:
                penv[ins[4]] = clause.build_ref(frame, ctx)
                pc = frame.ret_pc + 1
                frame = parent
                continue

        # failure: resume the most recent choice point
        while cps:
            cursor, alts, i, parent, ret_pc, inp, start, kwpos, acc_ref = cps.pop()
            nalts = len(alts)
            entered = False
            while i < nalts:
                alt = alts[i]
                i += 1
                aenv = [None] * alt.nslots
                if alt.in_match is None or alt.in_match(inp, aenv):
                    if i < nalts:
                        cps.append((cursor, alts, i, parent, ret_pc, inp, start, kwpos, acc_ref))
                    frame = _Frame(alt, aenv, start, kwpos, acc_ref, parent, ret_pc)
                    pc = 0
                    entered = True
                    break
            if entered:
                break
        else:
            raise _fail_error(cg, sig, lines, hw, hw_exp, filename)


def parse_text(cg, spec, text, keep_comments=False, filename=None):
    """Scan ``text`` with a lexer spec and parse the tokens."""
    from .lexer import scan

    return parse_tokens(cg, scan(spec, text), keep_comments, filename)


__all__ = [
    "ParseState",
    "ParseResult",
    "skip_comm",
    "parse_tokens",
    "parse_text",
    "export_term",
    "describe_token",
]
