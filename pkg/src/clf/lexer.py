"""Rule-based scanner engine.

A :class:`LexSpec` holds named contexts (Flex start conditions) and an
ordered list of rules.  Each rule is a regular expression active in some
contexts plus an action pipeline.  At every position the scanner takes
the longest match among the rules of the current context, the earliest
rule winning ties, then runs the pipeline: transforms rewrite the
lexeme, emit actions append tokens, ``begin`` switches context.

Spec files are line oriented::

    # comment
    %contexts waitdata,sentences,comment,comm,incomm
    %abbrev DIGIT [0-9]
    %comments ada_like "%"
    <sentences> [A-Z][A-Z0-9_]*   => stoken("ID")
    <sentences> {DIGIT}+          => itoken("INT")
    <sentences,comment> \\n        => begin(sentences); nl
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional

from . import regex
from .errors import SpecError
from .strings import TRANSFORMS, apply_transform
from .tokens import (
    INT_MAX,
    INT_MIN,
    NEWLINE,
    CommentText,
    IToken,
    Keyword,
    LexError,
    Newline,
    SToken,
)

MANDATORY_CONTEXTS = ("waitdata", "sentences", "comment", "comm", "incomm")
EMITS = ("keyword", "stoken", "itoken", "comtext", "error")


@dataclass(frozen=True)
class Action:
    """One pipeline step.

    ``kind`` is an emit (``keyword``, ``stoken``, ``itoken``, ``nl``,
    ``comtext``, ``error``), ``begin``, ``skip`` or a transform name.
    ``arg`` holds the class name, literal text, context or character.
    """

    kind: str
    arg: Optional[str] = None

    def __str__(self):
        if self.arg is None:
            return self.kind
        if self.kind == "begin":
            return f"begin({self.arg})"
        return f"{self.kind}({_quote(self.arg)})"


@dataclass(frozen=True)
class Rule:
    contexts: tuple
    pattern: str
    actions: tuple
    line: Optional[int] = field(default=None, compare=False)

    def __str__(self):
        acts = "; ".join(str(a) for a in self.actions) or "skip"
        return f"<{','.join(self.contexts)}> {self.pattern} => {acts}"


@dataclass(frozen=True)
class CLike:
    open: str
    close: str


@dataclass(frozen=True)
class AdaLike:
    starter: str


def _quote(text):
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t") + '"'


def _validate_actions(actions, contexts, line):
    emitted = False
    values = 0
    for a in actions:
        if a.kind in TRANSFORMS:
            if emitted:
                raise SpecError(f"transform {a.kind} after an emit action", line)
            if a.kind == "clear_string" and (a.arg is None or len(a.arg) != 1):
                raise SpecError("clear_string needs exactly one character", line)
        elif a.kind in EMITS or a.kind == "nl":
            emitted = True
            if a.kind in EMITS:
                values += 1
            if a.kind in ("stoken", "itoken"):
                if not a.arg or any(c.isspace() for c in a.arg):
                    raise SpecError(f"{a.kind} needs a token class name", line)
        elif a.kind == "begin":
            if a.arg not in contexts:
                raise SpecError(f"begin: undeclared context {a.arg!r}", line)
        elif a.kind != "skip":
            raise SpecError(f"unknown action {a.kind!r}", line)
    if values > 1:
        raise SpecError("at most one keyword/stoken/itoken/comtext/error per rule", line)


class LexSpec:
    """Validated, compiled scanner specification (immutable after construction)."""

    def __init__(self, rules, contexts=MANDATORY_CONTEXTS, abbrevs=None):
        self.contexts = tuple(dict.fromkeys(contexts))
        self.abbrevs = dict(abbrevs or {})
        missing = [c for c in MANDATORY_CONTEXTS if c not in self.contexts]
        if missing:
            raise SpecError(f"missing mandatory context(s): {', '.join(missing)}")
        asts = {}
        for name, text in self.abbrevs.items():
            try:
                asts[name] = regex.parse_pattern(text, asts)
            except regex.RegexError as exc:
                raise SpecError(f"abbreviation {name}: {exc}") from None
        resolved = []
        for r in rules:
            ctxs = self.contexts if "*" in r.contexts else tuple(r.contexts)
            if not ctxs:
                raise SpecError("rule without context", r.line)
            for c in ctxs:
                if c not in self.contexts:
                    raise SpecError(f"undeclared context {c!r}", r.line)
            _validate_actions(r.actions, self.contexts, r.line)
            resolved.append(Rule(ctxs, r.pattern, tuple(r.actions), r.line))
        self.rules = tuple(resolved)

        self._asts = []
        for r in self.rules:
            try:
                node = regex.parse_pattern(r.pattern, asts)
            except regex.RegexError as exc:
                raise SpecError(f"bad regex {r.pattern!r}: {exc}", r.line) from None
            if not regex.language_flags(node)[1]:
                raise SpecError(f"pattern {r.pattern!r} matches no non-empty string", r.line)
            self._asts.append(node)

        ivs = []
        for node in self._asts:
            regex.collect_intervals(node, ivs)
        self.alphabet = regex.Alphabet(ivs)
        self._programs = [_compile_actions(r.actions) for r in self.rules]
        self.dfas = {}
        for ctx in self.contexts:
            idx = [i for i, r in enumerate(self.rules) if ctx in r.contexts]
            dfa = regex.DFA([self._asts[i] for i in idx], self.alphabet)
            # map DFA-local rule numbers back to spec rule numbers
            dfa.accept = [idx[a] if a >= 0 else -1 for a in dfa.accept]
            self.dfas[ctx] = dfa

    def __repr__(self):
        return f"LexSpec({len(self.rules)} rules, contexts={list(self.contexts)})"

    def dump(self):
        """Render back to the spec file format (abbreviations are kept by reference)."""
        lines = ["%contexts " + ",".join(self.contexts)]
        lines += [f"%abbrev {k} {v}" for k, v in self.abbrevs.items()]
        lines += [str(r) for r in self.rules]
        return "\n".join(lines) + "\n"


# compiled action ops
_OP_TRANSFORM, _OP_KEYWORD, _OP_STOKEN, _OP_ITOKEN, _OP_NL, _OP_COMTEXT, _OP_ERROR, _OP_BEGIN = range(8)
_DECIMAL = re.compile(r"-?[0-9]+\Z")


def _compile_actions(actions):
    ops = []
    for a in actions:
        if a.kind in TRANSFORMS:
            ops.append((_OP_TRANSFORM, a.kind, a.arg))
        elif a.kind == "keyword":
            ops.append((_OP_KEYWORD, a.arg))
        elif a.kind == "stoken":
            ops.append((_OP_STOKEN, a.arg))
        elif a.kind == "itoken":
            ops.append((_OP_ITOKEN, a.arg))
        elif a.kind == "nl":
            ops.append((_OP_NL,))
        elif a.kind == "comtext":
            ops.append((_OP_COMTEXT, a.arg))
        elif a.kind == "error":
            ops.append((_OP_ERROR, a.arg))
        elif a.kind == "begin":
            ops.append((_OP_BEGIN, a.arg))
    return tuple(ops)


def _run_actions(ops, lexeme, out, context):
    for op in ops:
        code = op[0]
        if code == _OP_TRANSFORM:
            lexeme = apply_transform(op[1], lexeme, op[2])
        elif code == _OP_KEYWORD:
            out.append(Keyword(lexeme if op[1] is None else op[1]))
        elif code == _OP_STOKEN:
            out.append(SToken(op[1], lexeme))
        elif code == _OP_ITOKEN:
            value = int(lexeme) if _DECIMAL.match(lexeme) else None
            if value is None or not INT_MIN <= value <= INT_MAX:
                out.append(LexError(lexeme))
            else:
                out.append(IToken(op[1], value))
        elif code == _OP_NL:
            out.append(NEWLINE)
        elif code == _OP_COMTEXT:
            out.append(CommentText(lexeme if op[1] is None else op[1]))
        elif code == _OP_ERROR:
            out.append(LexError(lexeme if op[1] is None else op[1]))
        else:
            context = op[1]
    return context


class Scanner:
    """Incremental scanner: feed text in pieces, collect tokens as they become certain.

    A token is released once the automaton can no longer extend the match,
    so feeding a text in any number of pieces gives the same tokens as
    scanning it whole.
    """

    def __init__(self, spec: LexSpec, start: str = "sentences"):
        if start not in spec.contexts:
            raise SpecError(f"undeclared start context {start!r}")
        self.spec = spec
        self.context = start
        self.buffer = ""
        self._ahead = 0  # tokens already handed out by release_common

    def feed(self, text):
        self.buffer += text
        return self._skip_ahead(self._run(final=False))

    def finish(self):
        return self._skip_ahead(self._run(final=True))

    def release_common(self, continuations):
        """Release the pending tokens that every possible continuation agrees on.

        ``continuations`` lists the texts that may come next, with ``None``
        standing for end of input.  The released tokens are not returned
        again by later :meth:`feed` or :meth:`finish` calls.
        """
        runs = []
        for nxt in continuations:
            probe = Scanner(self.spec, self.context)
            probe.buffer = self.buffer
            if nxt is None:
                runs.append(probe._run(final=True))
            else:
                probe.buffer += nxt
                runs.append(probe._run(final=False))
        common = 0
        for group in zip(*runs):
            if any(t != group[0] for t in group[1:]):
                break
            common += 1
        fresh = runs[0][self._ahead : common] if runs else []
        self._ahead = max(self._ahead, common)
        return fresh

    def _skip_ahead(self, tokens):
        if self._ahead:
            k = min(self._ahead, len(tokens))
            self._ahead -= k
            tokens = tokens[k:]
        return tokens

    def _run(self, final):
        spec = self.spec
        text = self.buffer
        n = len(text)
        class_of = spec.alphabet.class_of
        programs = spec._programs
        out = []
        context = self.context
        dfa = spec.dfas[context]
        trans, accept = dfa.trans, dfa.accept
        pos = 0
        while pos < n:
            state = 0
            best = -1
            best_end = pos
            i = pos
            while i < n:
                state = trans[state][class_of(text[i])]
                if state < 0:
                    break
                i += 1
                a = accept[state]
                if a >= 0:
                    best = a
                    best_end = i
            else:
                if not final:
                    break  # the match could still grow with more input
            if best < 0:
                out.append(LexError(text[pos]))
                pos += 1
                continue
            new_context = _run_actions(programs[best], text[pos:best_end], out, context)
            pos = best_end
            if new_context != context:
                context = new_context
                dfa = spec.dfas[context]
                trans, accept = dfa.trans, dfa.accept
        self.context = context
        self.buffer = text[pos:]
        return out


def scan(spec: LexSpec, text: str, start: str = "sentences"):
    s = Scanner(spec, start)
    s.buffer = text
    return s._run(final=True)


def count_newline_tokens(tokens):
    return sum(1 for t in tokens if isinstance(t, Newline))


def nl_conserved(spec: LexSpec, text: str, start: str = "sentences") -> bool:
    """Check that scanning ``text`` reports exactly one newline token per ``\\n``."""
    return count_newline_tokens(scan(spec, text, start)) == text.count("\n")


# -- comment rule packs ------------------------------------------------------


def _re_char(c):
    if c.isalnum() or c == "_":
        return c
    if c == "\n":
        return "\\n"
    if c == "\t":
        return "\\t"
    return "\\" + c


def _re_literal(text):
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _kmp_table(pat):
    """delta[q][c] for KMP matching of ``pat`` over its own characters."""
    m = len(pat)
    alphabet = sorted(set(pat))
    delta = []
    for q in range(m):
        row = {}
        for c in alphabet:
            s = pat[:q] + c
            k = min(len(s), m)
            while k > 0 and not s.endswith(pat[:k]):
                k -= 1
            row[c] = k
        delta.append(row)
    return delta, alphabet


def _union(a, b):
    if a is None:
        return b
    if b is None or a == b:
        return a
    if a == "":
        return f"({b})?"
    if b == "":
        return f"({a})?"
    return f"({a}|{b})"


def _concat(*parts):
    if any(p is None for p in parts):
        return None
    return "".join(f"({p})" if "|" in p and not p.startswith("(") else p for p in parts)


def _star(a):
    if a is None or a == "":
        return ""
    return f"({a})*"


def _eliminate(n_states, edges, start, finals):
    """State elimination: regex for paths from ``start`` to any of ``finals``.

    ``edges`` maps (src, dst) to a regex string.
    """
    S, F = "S", "F"
    g = dict(edges)
    g[(S, start)] = ""
    for f, label in finals.items():
        g[(f, F)] = _union(g.get((f, F)), label)
    for k in range(n_states):
        loop = _star(g.pop((k, k), None))
        ins = [(i, lab) for (i, j), lab in g.items() if j == k]
        outs = [(j, lab) for (i, j), lab in g.items() if i == k]
        for i, _ in ins:
            g.pop((i, k))
        for j, _ in outs:
            g.pop((k, j))
        for i, a in ins:
            for j, b in outs:
                g[(i, j)] = _union(g.get((i, j)), _concat(a, loop, b))
    return g.get((S, F))


def close_delimited_patterns(close):
    """Regexes for a comment body that must not contain ``close``.

    Returns ``(line, last)``: ``line`` matches body text up to and including
    a newline with no ``close`` in it; ``last`` matches body text ending at
    the first occurrence of ``close``.
    """
    if not close or "\n" in close:
        raise ValueError("comment delimiters must be non-empty and single-line")
    m = len(close)
    delta, alphabet = _kmp_table(close)
    other = "[^" + "".join(_re_char(c) for c in alphabet) + "\\n]"
    edges = {}
    for q in range(m):
        edges[(q, 0)] = _union(edges.get((q, 0)), other)
        for c in alphabet:
            t = delta[q][c]
            if t < m:
                edges[(q, t)] = _union(edges.get((q, t)), _re_char(c))
    line = _eliminate(m, edges, 0, {q: "\\n" for q in range(m)})
    last = _eliminate(m, edges, 0, {m - 1: _re_char(close[-1])})
    return line, last


def comment_pack(style, line=None):
    """Rules for C-like (delimited, multi-line) or ADA-like (to end of line) comments."""
    if isinstance(style, CLike):
        if not style.open or "\n" in style.open:
            raise ValueError("comment delimiters must be non-empty and single-line")
        body_line, body_last = close_delimited_patterns(style.close)
        k = len(style.close)
        drop = [Action("suplast2")] * (k // 2) + [Action("suplast")] * (k % 2)
        return [
            Rule(("sentences",), _re_literal(style.open), (Action("begin", "comment"),), line),
            Rule(("comment",), body_line,
                 (Action("suplast"), Action("rmtabs"), Action("comtext"), Action("nl")), line),
            Rule(("comment",), body_last,
                 (Action("begin", "sentences"), *drop, Action("rmtabs"), Action("comtext")), line),
            Rule(("comm",), ".*", (Action("rm_leading_spaces"), Action("comtext")), line),
            Rule(("comm",), "\\n", (Action("nl"),), line),
        ]
    if isinstance(style, AdaLike):
        if not style.starter or "\n" in style.starter:
            raise ValueError("comment starter must be non-empty and single-line")
        s = _re_literal(style.starter)
        return [
            Rule(("sentences",), s + "\\n", (Action("comtext", ""), Action("nl")), line),
            Rule(("sentences",), s, (Action("begin", "comment"),), line),
            Rule(("comment",), ".*", (Action("comtext"),), line),
            Rule(("comment",), "\\n[ ]*\\n", (Action("begin", "sentences"), Action("nl"), Action("nl")), line),
            Rule(("comment",), "\\n", (Action("begin", "sentences"), Action("nl")), line),
            Rule(("comm",), s + "\\n", (Action("comtext", ""), Action("nl")), line),
            Rule(("comm",), s, (Action("begin", "incomm"),), line),
            Rule(("incomm",), ".*", (Action("comtext"),), line),
            Rule(("comm", "incomm"), "\\n", (Action("begin", "comm"), Action("nl")), line),
            Rule(("comm", "incomm"), "[ \\t]", (Action("skip"),), line),
        ]
    raise TypeError(f"unknown comment style {style!r}")


# -- spec file loading ---------------------------------------------------------

_ACTION_TOKEN = re.compile(
    r"""\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<str>"(?:[^"\\]|\\.)*"|'(?:[^'\\]|\\.)*')|(?P<punct>[();,]))"""
)
_STR_ESC = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", '"': '"', "'": "'"}


def _unquote(s):
    body = s[1:-1]
    return re.sub(r"\\(.)", lambda m: _STR_ESC.get(m.group(1), m.group(1)), body)


def _parse_actions(text, line):
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _ACTION_TOKEN.match(text, pos)
        if not m:
            raise SpecError(f"cannot parse action text {text[pos:]!r}", line)
        pos = m.end()
        if m.group("name"):
            toks.append(("name", m.group("name")))
        elif m.group("str"):
            toks.append(("str", _unquote(m.group("str"))))
        else:
            toks.append(("p", m.group("punct")))
    actions = []
    i = 0
    while i < len(toks):
        kind, val = toks[i]
        if kind == "p" and val == ";":
            i += 1
            continue
        if kind != "name":
            raise SpecError(f"expected an action name, got {val!r}", line)
        arg = None
        i += 1
        if i < len(toks) and toks[i] == ("p", "("):
            i += 1
            if i < len(toks) and toks[i][0] in ("str", "name"):
                arg = toks[i][1]
                i += 1
            if i >= len(toks) or toks[i] != ("p", ")"):
                raise SpecError(f"missing ')' after {val}(", line)
            i += 1
        if val == "BEGIN":
            val = "begin"
        actions.append(Action(val, arg))
    return tuple(a for a in actions if a.kind != "skip") or (Action("skip"),)


def _parse_delims(text, count, line):
    parts = re.findall(r'"(?:[^"\\]|\\.)*"', text)
    if len(parts) != count or re.sub(r'"(?:[^"\\]|\\.)*"', "", text).strip():
        raise SpecError(f"expected {count} quoted delimiter(s)", line)
    return [_unquote(p) for p in parts]


def load_spec(text: str) -> LexSpec:
    contexts = []
    context_line = None
    abbrevs = {}
    abbrev_asts = {}
    rules = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("%"):
            directive, _, rest = line.partition(" ")
            rest = rest.strip()
            if directive == "%contexts":
                names = [c.strip() for c in rest.split(",") if c.strip()]
                for c in names:
                    if not c.isidentifier():
                        raise SpecError(f"bad context name {c!r}", lineno)
                contexts.extend(names)
                context_line = context_line or lineno
            elif directive == "%abbrev":
                name, _, pat = rest.partition(" ")
                pat = pat.strip()
                if not name.isidentifier() or not pat:
                    raise SpecError("usage: %abbrev NAME REGEX", lineno)
                try:
                    abbrev_asts[name] = regex.parse_pattern(pat, abbrev_asts)
                except regex.RegexError as exc:
                    raise SpecError(f"bad regex in abbreviation {name}: {exc}", lineno) from None
                abbrevs[name] = pat
            elif directive == "%comments":
                style, _, args = rest.partition(" ")
                if style == "c_like":
                    rules.extend(comment_pack(CLike(*_parse_delims(args, 2, lineno)), lineno))
                elif style == "ada_like":
                    rules.extend(comment_pack(AdaLike(*_parse_delims(args, 1, lineno)), lineno))
                else:
                    raise SpecError(f"unknown comment style {style!r}", lineno)
            else:
                raise SpecError(f"unknown directive {directive}", lineno)
            continue
        ctxs = ("sentences",)
        body = line
        if line.startswith("<"):
            end = line.find(">")
            if end < 0:
                raise SpecError("unterminated context list", lineno)
            ctxs = tuple(c.strip() for c in line[1:end].split(","))
            body = line[end + 1 :].lstrip()
        try:
            _, end = regex.parse_pattern(body, abbrev_asts, whole=False)
        except regex.RegexError as exc:
            raise SpecError(f"bad regex: {exc}", lineno) from None
        pattern = body[:end]
        rest = body[end:].lstrip()
        if not pattern:
            raise SpecError("missing pattern", lineno)
        if not rest.startswith("=>"):
            raise SpecError("expected '=>' after the pattern", lineno)
        actions = _parse_actions(rest[2:], lineno)
        for c in ctxs:
            if c != "*" and c not in contexts:
                raise SpecError(f"undeclared context {c!r}", lineno)
        rules.append(Rule(ctxs, pattern, actions, lineno))
    missing = [c for c in MANDATORY_CONTEXTS if c not in contexts]
    if missing:
        raise SpecError(f"missing mandatory context(s): {', '.join(missing)}", context_line or 1)
    return LexSpec(rules, contexts, abbrevs)


def load_spec_file(path) -> LexSpec:
    with open(path, encoding="utf-8") as f:
        return load_spec(f.read())
