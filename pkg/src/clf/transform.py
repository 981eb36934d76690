"""Grammar rewrites: keyword-dispatch left-factoring and left-recursion elimination.

Left-factoring turns a nonterminal whose clauses all start with a keyword
(at least three distinct ones) into a dispatcher::

    a(X) :- [T], a$h(T,X).
    a$h('t1',X) :- b(X).

Left-recursion elimination rewrites ``N -> N tail | base`` into a base
parse followed by an accumulator loop that folds each tail into the term
built so far, which keeps operators left-associative::

    add(C) :- mult(X), add$x(X,C).
    add$x(A,C) :- ['+'], mult(B), add$x(plus(A,B),C).
    add$x(A,A).
"""

from __future__ import annotations

import string

from .errors import GrammarError
from .grammar import (
    BASE,
    DISPATCH,
    KEYED,
    STEP,
    STOP,
    AnyKeyword,
    Call,
    Clause,
    Grammar,
    KeywordLit,
    STokenLit,
    SymbolP,
    Var,
    format_clause,
    is_helper,
    pattern_vars,
)

FACTOR_THRESHOLD = 3


def _fresh_nt(base, suffix, taken):
    name = f"{base}${suffix}"
    n = 2
    while name in taken:
        name = f"{base}${suffix}{n}"
        n += 1
    taken.add(name)
    return name


def clause_vars(c: Clause):
    names = []
    for a in c.args:
        pattern_vars(a, names)
    for it in c.body:
        if isinstance(it, (STokenLit, AnyKeyword)):
            pattern_vars(it.var, names)
        elif isinstance(it, Call):
            for a in it.args:
                pattern_vars(a, names)
    return names


def _fresh_var(used, prefer="C"):
    for name in [prefer] + list(string.ascii_uppercase):
        if name not in used:
            return Var(name)
    n = 1
    while f"V{n}" in used:
        n += 1
    return Var(f"V{n}")


def _replace(g: Grammar, rewritten: dict) -> Grammar:
    """Rebuild ``g`` with each rewritten nonterminal's clauses replaced in place."""
    out = []
    for nt, clauses in g.nonterminals().items():
        out.extend(rewritten.get(nt, clauses))
    return Grammar(tuple(out))


def left_factor(g: Grammar, threshold: int = FACTOR_THRESHOLD) -> Grammar:
    groups = g.nonterminals()
    taken = set(groups)
    rewritten = {}
    for nt, clauses in groups.items():
        if is_helper(nt):
            continue
        if not all(c.body and isinstance(c.body[0], KeywordLit) for c in clauses):
            continue
        keys = {c.body[0].text for c in clauses}
        if len(keys) < threshold:
            continue
        helper = _fresh_nt(nt, "h", taken)
        x, t = Var("X"), Var("T")
        new = [Clause(nt, (x,), (AnyKeyword(t), Call(helper, (t, x))), DISPATCH, clauses[0].line)]
        for c in clauses:
            new.append(Clause(helper, (SymbolP(c.body[0].text), c.args[0]), c.body[1:], KEYED, c.line))
        rewritten[nt] = new
    return _replace(g, rewritten) if rewritten else g


def _is_left_recursive(c: Clause):
    return bool(c.body) and isinstance(c.body[0], Call) and c.body[0].nt == c.head


def eliminate_left_recursion(g: Grammar) -> Grammar:
    groups = g.nonterminals()
    taken = set(groups)
    rewritten = {}
    for nt, clauses in groups.items():
        if is_helper(nt):
            continue
        rec = [c for c in clauses if _is_left_recursive(c)]
        if not rec:
            continue
        base = [c for c in clauses if not _is_left_recursive(c)]
        if not base:
            raise GrammarError(f"{nt}: every clause is left-recursive (no base case)", rec[0].line)
        loop = _fresh_nt(nt, "x", taken)
        new = []
        for b in base:
            out = _fresh_var(clause_vars(b))
            new.append(Clause(nt, (out,), b.body + (Call(loop, (b.args[0], out)),), BASE, b.line))
        for r in rec:
            out = _fresh_var(clause_vars(r))
            acc = r.body[0].args[0]
            new.append(Clause(loop, (acc, out), r.body[1:] + (Call(loop, (r.args[0], out)),), STEP, r.line))
        a = Var("A")
        new.append(Clause(loop, (a, a), (), STOP, rec[0].line))
        rewritten[nt] = new
    out = _replace(g, rewritten) if rewritten else g
    check_left_recursion(out)
    return out


def nullable_nonterminals(g: Grammar):
    groups = g.nonterminals()
    nullable = set()
    changed = True
    while changed:
        changed = False
        for nt, clauses in groups.items():
            if nt in nullable:
                continue
            for c in clauses:
                if all(isinstance(i, Call) and i.nt in nullable for i in c.body):
                    nullable.add(nt)
                    changed = True
                    break
    return nullable


def left_corner_graph(g: Grammar):
    """Edges N -> M when M can be called by N before any token is consumed."""
    nullable = nullable_nonterminals(g)
    edges = {}
    for c in g.clauses:
        succ = edges.setdefault(c.head, [])
        for item in c.body:
            if not isinstance(item, Call):
                break
            if item.nt not in succ:
                succ.append(item.nt)
            if item.nt not in nullable:
                break
    return edges


def check_left_recursion(g: Grammar):
    """Raise if any nonterminal can reach itself without consuming a token."""
    edges = left_corner_graph(g)
    index, low, on_stack, stack = {}, {}, set(), []
    counter = [0]

    def strongconnect(v):
        # grammars are small; recursion depth is bounded by the nonterminal count
        index[v] = low[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        for w in edges.get(v, ()):
            if w not in index:
                strongconnect(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            if len(comp) > 1 or v in edges.get(v, ()):
                raise GrammarError(_describe_cycle(comp, edges))

    for v in list(edges):
        if v not in index:
            strongconnect(v)


def _describe_cycle(comp, edges):
    members = set(comp)
    start = min(comp)
    # shortest cycle through start, by BFS inside the component
    parent = {}
    frontier = [start]
    while start not in parent:
        nxt = []
        for v in frontier:
            for w in edges.get(v, ()):
                if w in members and w not in parent:
                    parent[w] = v
                    nxt.append(w)
        frontier = nxt
    path = [start]
    v = parent[start]
    while v != start:
        path.append(v)
        v = parent[v]
    path.append(start)
    cycle = " -> ".join(reversed(path))
    if len(comp) == 1:
        return f"unsupported left recursion through a nullable prefix: {cycle}"
    return f"unsupported indirect left recursion: {cycle}"


def transform(g: Grammar) -> Grammar:
    """Apply both rewrites in their fixed order."""
    return eliminate_left_recursion(left_factor(g))


def emit_dcg(g) -> str:
    """Arrow-style listing of a (transformed) grammar or compiled grammar."""
    if hasattr(g, "grammar"):
        g = g.grammar
    return "".join(format_clause(c, arrow="->") + "\n" for c in g.clauses)
