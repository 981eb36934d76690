"""Flex-style regular expressions compiled to a prioritised DFA.

Supported syntax: literals, ``"quoted strings"``, backslash escapes,
character classes (``[a-z]``, ``[^*\\n]``), ``.`` (anything but newline),
grouping, ``|``, ``*``, ``+``, ``?`` and ``{name}`` abbreviation
references.  An unquoted, unbracketed space ends a pattern, as in Flex.

Several patterns are combined into one :class:`DFA` whose accepting states
remember the lowest (earliest) rule index, so running it gives
longest-match with earliest-rule tie-break.
"""

from __future__ import annotations

from bisect import bisect_right

MAX_CHAR = 0x110000
ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "f": "\f", "v": "\v", "0": "\0"}


class RegexError(ValueError):
    def __init__(self, message, pos=None):
        self.pos = pos
        super().__init__(message if pos is None else f"{message} at column {pos + 1}")


# AST nodes are tuples: ("set", intervals), ("cat", items), ("alt", items),
# ("star", x), ("plus", x), ("opt", x), ("eps",)

EPS = ("eps",)


def normalize(intervals):
    out = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1] + 1:
            if hi > out[-1][1]:
                out[-1] = (out[-1][0], hi)
        else:
            out.append((lo, hi))
    return tuple(out)


def complement(intervals):
    out = []
    nxt = 0
    for lo, hi in intervals:
        if lo > nxt:
            out.append((nxt, lo - 1))
        nxt = hi + 1
    if nxt < MAX_CHAR:
        out.append((nxt, MAX_CHAR - 1))
    return tuple(out)


def char_set(chars):
    return ("set", normalize((ord(c), ord(c)) for c in chars))


def literal(text):
    if len(text) == 1:
        return char_set(text)
    return ("cat", tuple(char_set(c) for c in text))


DOT = ("set", complement(((10, 10),)))


class _Parser:
    def __init__(self, text, abbrevs):
        self.text = text
        self.pos = 0
        self.abbrevs = abbrevs

    def peek(self):
        return self.text[self.pos] if self.pos < len(self.text) else None

    def at_end(self):
        c = self.peek()
        return c is None or c in " \t\r\n"

    def parse(self):
        node = self.alt()
        c = self.peek()
        if c == ")":
            raise RegexError("unbalanced ')'", self.pos)
        return node

    def alt(self):
        items = [self.cat()]
        while self.peek() == "|":
            self.pos += 1
            items.append(self.cat())
        return items[0] if len(items) == 1 else ("alt", tuple(items))

    def cat(self):
        items = []
        while not self.at_end() and self.peek() not in "|)":
            items.append(self.postfix())
        if not items:
            return EPS
        return items[0] if len(items) == 1 else ("cat", tuple(items))

    def postfix(self):
        node = self.atom()
        while self.peek() in ("*", "+", "?"):
            op = {"*": "star", "+": "plus", "?": "opt"}[self.peek()]
            self.pos += 1
            node = (op, node)
        return node

    def escape(self):
        # self.pos is on the backslash
        if self.pos + 1 >= len(self.text):
            raise RegexError("trailing backslash", self.pos)
        c = self.text[self.pos + 1]
        self.pos += 2
        return ESCAPES.get(c, c)

    def atom(self):
        start = self.pos
        c = self.peek()
        if c == "(":
            self.pos += 1
            node = self.alt()
            if self.peek() != ")":
                raise RegexError("unbalanced '('", start)
            self.pos += 1
            return node
        if c == "[":
            return self.char_class()
        if c == '"':
            self.pos += 1
            chars = []
            while True:
                c = self.peek()
                if c is None or c == "\n":
                    raise RegexError("unterminated string", start)
                if c == '"':
                    self.pos += 1
                    break
                if c == "\\":
                    chars.append(self.escape())
                else:
                    chars.append(c)
                    self.pos += 1
            return literal("".join(chars)) if chars else EPS
        if c == ".":
            self.pos += 1
            return DOT
        if c == "\\":
            return char_set(self.escape())
        if c == "{":
            end = self.text.find("}", self.pos)
            if end < 0:
                raise RegexError("unterminated abbreviation reference", start)
            name = self.text[self.pos + 1 : end]
            if not name.isidentifier():
                raise RegexError(f"bad abbreviation name {name!r}", start)
            if name not in self.abbrevs:
                raise RegexError(f"undeclared abbreviation {{{name}}}", start)
            self.pos = end + 1
            return self.abbrevs[name]
        if c in "*+?":
            raise RegexError(f"nothing to repeat before {c!r}", start)
        if c in "]}":
            raise RegexError(f"unexpected {c!r}", start)
        if c in "/^$":
            raise RegexError(f"operator {c!r} is not supported; quote it for a literal", start)
        self.pos += 1
        return char_set(c)

    def char_class(self):
        start = self.pos
        self.pos += 1
        negate = False
        if self.peek() == "^":
            negate = True
            self.pos += 1
        intervals = []
        first = True
        while True:
            c = self.peek()
            if c is None:
                raise RegexError("unterminated character class", start)
            if c == "]" and not first:
                self.pos += 1
                break
            lo = self.class_char()
            if self.peek() == "-" and self.text[self.pos + 1 : self.pos + 2] not in ("]", ""):
                self.pos += 1
                hi = self.class_char()
                if ord(hi) < ord(lo):
                    raise RegexError(f"bad range {lo!r}-{hi!r}", start)
                intervals.append((ord(lo), ord(hi)))
            else:
                intervals.append((ord(lo), ord(lo)))
            first = False
        iv = normalize(intervals)
        return ("set", complement(iv) if negate else iv)

    def class_char(self):
        c = self.peek()
        if c == "\\":
            return self.escape()
        self.pos += 1
        return c


def parse_pattern(text, abbrevs=None, whole=True):
    """Parse ``text`` into an AST.

    With ``whole`` the entire string must be consumed; otherwise parsing
    stops at the first unquoted whitespace and ``(ast, end)`` is returned.
    """
    p = _Parser(text, abbrevs or {})
    node = p.parse()
    if whole:
        if p.pos != len(text):
            raise RegexError("unexpected whitespace in pattern", p.pos)
        return node
    return node, p.pos


def language_flags(node):
    """Return ``(matches_empty, matches_nonempty)`` for ``node``."""
    kind = node[0]
    if kind == "eps":
        return True, False
    if kind == "set":
        return False, bool(node[1])
    if kind == "cat":
        flags = [language_flags(n) for n in node[1]]
        if not all(e or ne for e, ne in flags):
            return False, False
        return all(e for e, _ in flags), any(ne for _, ne in flags)
    if kind == "alt":
        flags = [language_flags(n) for n in node[1]]
        return any(e for e, _ in flags), any(ne for _, ne in flags)
    e, ne = language_flags(node[1])
    if kind == "star" or kind == "opt":
        return True, ne
    return e, ne  # plus


def collect_intervals(node, out):
    kind = node[0]
    if kind == "set":
        out.extend(node[1])
    elif kind in ("cat", "alt"):
        for n in node[1]:
            collect_intervals(n, out)
    elif kind != "eps":
        collect_intervals(node[1], out)


class _NFA:
    def __init__(self):
        self.eps = []
        self.edges = []  # per state: list of (intervals, target)

    def new(self):
        self.eps.append([])
        self.edges.append([])
        return len(self.eps) - 1

    def build(self, node):
        """Thompson construction; returns (start, end)."""
        kind = node[0]
        if kind == "eps":
            s = self.new()
            return s, s
        if kind == "set":
            s, e = self.new(), self.new()
            self.edges[s].append((node[1], e))
            return s, e
        if kind == "cat":
            start, end = self.build(node[1][0])
            for n in node[1][1:]:
                s, e = self.build(n)
                self.eps[end].append(s)
                end = e
            return start, end
        if kind == "alt":
            s, e = self.new(), self.new()
            for n in node[1]:
                a, b = self.build(n)
                self.eps[s].append(a)
                self.eps[b].append(e)
            return s, e
        a, b = self.build(node[1])
        s, e = self.new(), self.new()
        self.eps[s].append(a)
        self.eps[b].append(e)
        if kind in ("star", "opt"):
            self.eps[s].append(e)
        if kind in ("star", "plus"):
            self.eps[b].append(a)
        return s, e


class Alphabet:
    """Partition of code points into classes no pattern distinguishes between."""

    def __init__(self, intervals):
        points = {0, MAX_CHAR}
        for lo, hi in intervals:
            points.add(lo)
            points.add(hi + 1)
        self.points = sorted(points)[:-1]
        self.cache = {}

    def __len__(self):
        return len(self.points)

    def classes_of(self, intervals):
        out = []
        for lo, hi in intervals:
            i = bisect_right(self.points, lo) - 1
            while i < len(self.points) and self.points[i] <= hi:
                out.append(i)
                i += 1
        return out

    def class_of(self, ch):
        k = self.cache.get(ch)
        if k is None:
            k = self.cache[ch] = bisect_right(self.points, ord(ch)) - 1
        return k


class DFA:
    """Deterministic automaton over an :class:`Alphabet`.

    ``trans[s][k]`` is the next state or -1 when no rule can match any
    more; ``accept[s]`` is the winning rule index or -1.
    """

    def __init__(self, patterns, alphabet=None):
        if alphabet is None:
            ivs = []
            for p in patterns:
                collect_intervals(p, ivs)
            alphabet = Alphabet(ivs)
        self.alphabet = alphabet
        nfa = _NFA()
        root = nfa.new()
        final = {}
        for idx, p in enumerate(patterns):
            s, e = nfa.build(p)
            nfa.eps[root].append(s)
            final[e] = min(idx, final.get(e, idx))
        edge_classes = [
            [(alphabet.classes_of(ivs), t) for ivs, t in edges] for edges in nfa.edges
        ]

        def closure(states):
            stack = list(states)
            seen = set(states)
            while stack:
                s = stack.pop()
                for t in nfa.eps[s]:
                    if t not in seen:
                        seen.add(t)
                        stack.append(t)
            return frozenset(seen)

        start = closure([root])
        index = {start: 0}
        subsets = [start]
        trans = []
        nclasses = len(alphabet)
        i = 0
        while i < len(subsets):
            moves = {}
            for s in subsets[i]:
                for classes, t in edge_classes[s]:
                    for k in classes:
                        moves.setdefault(k, set()).add(t)
            row = [-1] * nclasses
            for k, targets in moves.items():
                nxt = closure(targets)
                j = index.get(nxt)
                if j is None:
                    j = index[nxt] = len(subsets)
                    subsets.append(nxt)
                row[k] = j
            trans.append(row)
            i += 1
        accept = []
        for sub in subsets:
            rules = [final[s] for s in sub if s in final]
            accept.append(min(rules) if rules else -1)

        # states that can no longer reach acceptance become dead (-1)
        live = {s for s, a in enumerate(accept) if a >= 0}
        changed = True
        while changed:
            changed = False
            for s, row in enumerate(trans):
                if s not in live and any(t in live for t in row if t >= 0):
                    live.add(s)
                    changed = True
        self.trans = [[t if t in live else -1 for t in row] for row in trans]
        self.accept = accept
        self.start = 0

    def longest_match(self, text, pos=0):
        """Return ``(rule, end)`` of the longest non-empty match at ``pos``, or ``(-1, pos)``."""
        trans, accept, class_of = self.trans, self.accept, self.alphabet.class_of
        state = self.start
        best, best_end = -1, pos
        i, n = pos, len(text)
        while i < n:
            state = trans[state][class_of(text[i])]
            if state < 0:
                break
            i += 1
            if accept[state] >= 0:
                best, best_end = accept[state], i
        return best, best_end


def fullmatch(pattern, text, abbrevs=None):
    """Whole-string match of a single pattern; convenience for tests and tools."""
    node = parse_pattern(pattern, abbrevs) if isinstance(pattern, str) else pattern
    if text == "":
        return language_flags(node)[0]
    dfa = DFA([node])
    state = dfa.start
    for ch in text:
        state = dfa.trans[state][dfa.alphabet.class_of(ch)]
        if state < 0:
            return False
    return dfa.accept[state] >= 0
