"""Compile a transformed CS grammar into the parser runtime's instruction form.

Each nonterminal becomes an ordered list of alternatives.  An alternative
is a sequence of instructions (match a keyword, match a token class, match
any keyword, call a nonterminal, require end of input) plus builders for
its result term and reference tree.  Every nonterminal also gets a
lookahead index: for each possible next token, the alternatives that can
start with it (or derive nothing and be followed by it).  Keyword-keyed
helpers made by left-factoring additionally get a dispatch table.

Reference-tree lines follow one rule everywhere: a built node takes the
line of the clause's first directly matched token, else the line of its
first child node, else the line where the clause was entered.
"""

from __future__ import annotations

from .errors import GrammarError
from .grammar import (
    BASE,
    DISPATCH,
    KEYED,
    STEP,
    STOP,
    AnyKeyword,
    Call,
    CompoundP,
    Grammar,
    IntP,
    KeywordLit,
    ListP,
    STokenLit,
    SymbolP,
    Var,
    is_helper,
    quote_keyword,
)
from .terms import NIL, Compound, Int, Node, Symbol
from .transform import transform

OP_KW, OP_TOK, OP_ANYKW, OP_CALL, OP_EOF = range(5)
H_DEFAULT, H_DISPATCH, H_ACC = range(3)
EOF_KEY = ("$eof",)
EOF_TEXT = "end of input"


class Cons:
    """Runtime list cell; converted to :class:`clf.terms.List` when a parse succeeds."""

    __slots__ = ("head", "tail")

    def __init__(self, head, tail):
        self.head = head
        self.tail = tail

    def __eq__(self, other):
        a, b = self, other
        while isinstance(a, Cons) and isinstance(b, Cons):
            if a.head != b.head:
                return False
            a, b = a.tail, b.tail
        if isinstance(a, Cons) or isinstance(b, Cons):
            return False
        return a == b

    __hash__ = None


class _EmptyList:
    __slots__ = ()

    def __repr__(self):
        return "[]"


EMPTY = _EmptyList()


def key_display(key):
    if key == EOF_KEY:
        return EOF_TEXT
    kind, text = key
    return quote_keyword(text) if kind == "k" else text


class CompiledClause:
    __slots__ = (
        "nt", "clause", "nslots", "in_match", "items", "build", "build_ref",
        "first", "nullable",
    )

    def __repr__(self):
        return f"<alt {self.nt} #{self.clause.line}>"


class CompiledNT:
    __slots__ = ("name", "alts", "select", "dispatch", "expect", "accumulator")

    def __repr__(self):
        return f"<nt {self.name}: {len(self.alts)} alternatives>"


class CompiledGrammar:
    """Executable form of a grammar wrapped around one entry nonterminal."""

    def __init__(self, grammar, entry, nts, root, key_ids):
        self.grammar = grammar
        self.entry = entry
        self.nts = nts
        self.root = root
        self.key_ids = key_ids
        self.eof_kid = key_ids[EOF_KEY]
        self.unknown_kid = len(key_ids)

    def productions(self):
        return {name: [a.clause for a in nt.alts] for name, nt in self.nts.items()}

    def __repr__(self):
        return f"CompiledGrammar(entry={self.entry!r}, {len(self.nts)} nonterminals)"


# -- patterns --------------------------------------------------------------------


def _const_value(p):
    if isinstance(p, SymbolP):
        return Symbol(p.name)
    if isinstance(p, IntP):
        return Int(p.value)
    if isinstance(p, ListP) and not p.items and p.tail is None:
        return EMPTY
    return None


def _is_ground(p):
    if isinstance(p, Var):
        return False
    if isinstance(p, CompoundP):
        return all(_is_ground(a) for a in p.args)
    if isinstance(p, ListP):
        return p.tail is None and all(_is_ground(a) for a in p.items)
    return True


def _ground_value(p):
    c = _const_value(p)
    if c is not None:
        return c
    if isinstance(p, CompoundP):
        return Compound(p.functor, tuple(_ground_value(a) for a in p.args))
    tail = EMPTY
    for item in reversed(p.items):
        tail = Cons(_ground_value(item), tail)
    return tail


def make_builder(p, slots):
    """Return a function env -> value instantiating ``p`` (all variables bound)."""
    if isinstance(p, Var):
        slot = slots[p.name]
        return lambda env: env[slot]
    if _is_ground(p):
        value = _ground_value(p)
        return lambda env: value
    if isinstance(p, CompoundP):
        functor = p.functor
        subs = tuple(make_builder(a, slots) for a in p.args)
        if len(subs) == 1:
            b0 = subs[0]
            return lambda env: Compound(functor, (b0(env),))
        if len(subs) == 2:
            b0, b1 = subs
            return lambda env: Compound(functor, (b0(env), b1(env)))
        return lambda env: Compound(functor, tuple(b(env) for b in subs))
    items = tuple(make_builder(a, slots) for a in p.items)
    tail = make_builder(p.tail, slots) if p.tail is not None else (lambda env: EMPTY)

    def build_list(env):
        out = tail(env)
        for b in reversed(items):
            out = Cons(b(env), out)
        return out

    return build_list


def make_matcher(p, slots, bound):
    """Return a function (value, env) -> bool matching ``p``.

    Variables already in ``bound`` are compared; others are bound (and
    added to ``bound``).
    """
    if isinstance(p, Var):
        if p.name == "_":
            return lambda v, env: True
        slot = slots[p.name]
        if p.name in bound:
            return lambda v, env: env[slot] == v
        bound.add(p.name)

        def bind(v, env):
            env[slot] = v
            return True

        return bind
    const = _const_value(p)
    if const is not None:
        if const is EMPTY:
            return lambda v, env: v is EMPTY
        return lambda v, env: v == const
    if isinstance(p, CompoundP):
        functor, arity = p.functor, len(p.args)
        subs = tuple(make_matcher(a, slots, bound) for a in p.args)

        def match_compound(v, env):
            if type(v) is not Compound or v.functor != functor or len(v.args) != arity:
                return False
            for m, a in zip(subs, v.args):
                if not m(a, env):
                    return False
            return True

        return match_compound
    items = tuple(make_matcher(a, slots, bound) for a in p.items)
    tail = make_matcher(p.tail, slots, bound) if p.tail is not None else (lambda v, env: v is EMPTY)

    def match_list(v, env):
        for m in items:
            if type(v) is not Cons or not m(v.head, env):
                return False
            v = v.tail
        return tail(v, env)

    return match_list


def var_paths(p, path=(), out=None):
    """First position of each variable of ``p``, as a reference-tree child path."""
    if out is None:
        out = {}
    if isinstance(p, Var):
        if p.name != "_" and p.name not in out:
            out[p.name] = path
    elif isinstance(p, CompoundP):
        for i, a in enumerate(p.args):
            var_paths(a, path + (i,), out)
    elif isinstance(p, ListP):
        cur = path
        for a in p.items:
            var_paths(a, cur + (0,), out)
            cur = cur + (1,)
        if p.tail is not None:
            var_paths(p.tail, cur, out)
    return out


def navigate(ref, path):
    for i in path:
        if type(ref) is not Node or i >= len(ref.children):
            return NIL
        ref = ref.children[i]
    return ref


def _needs_node(p):
    return isinstance(p, CompoundP) or (isinstance(p, ListP) and bool(p.items))


def make_ref_builder(p, sources, line_fn):
    """Return a function (frame, ctx) -> RefTree for head pattern ``p``.

    ``sources`` maps a variable to ("call", slot, path), ("acc", path) or
    ("nil",).
    """

    def leaf(name):
        src = sources.get(name, ("nil",))
        if src[0] == "call":
            slot, path = src[1], src[2]
            if not path:
                return lambda frame, line: frame.env[slot]
            return lambda frame, line: navigate(frame.env[slot], path)
        if src[0] == "acc":
            path = src[1]
            if not path:
                return lambda frame, line: frame.acc_ref
            return lambda frame, line: navigate(frame.acc_ref, path)
        return lambda frame, line: NIL

    def build(p):
        if isinstance(p, Var):
            return leaf(p.name) if p.name != "_" else (lambda frame, line: NIL)
        if isinstance(p, CompoundP):
            subs = tuple(build(a) for a in p.args)
            if len(subs) == 1:
                s0 = subs[0]
                return lambda frame, line: Node(line, (s0(frame, line),))
            return lambda frame, line: Node(line, tuple(s(frame, line) for s in subs))
        if isinstance(p, ListP) and p.items:
            items = tuple(build(a) for a in p.items)
            tail = build(p.tail) if p.tail is not None else (lambda frame, line: NIL)

            def cons_refs(frame, line):
                out = tail(frame, line)
                for b in reversed(items):
                    out = Node(line, (b(frame, line), out))
                return out

            return cons_refs
        return lambda frame, line: NIL

    body = build(p)
    if not _needs_node(p):
        return lambda frame, ctx: body(frame, 0)
    return lambda frame, ctx: body(frame, line_fn(frame, ctx))


def make_line_fn(tslot, use_kwpos, child_srcs):
    """Line for built nodes: first direct token, else first child node, else entry line."""

    def line_fn(frame, ctx):
        if use_kwpos:
            return ctx.lines[frame.kwpos]
        if tslot is not None:
            return ctx.lines[frame.env[tslot]]
        for src in child_srcs:
            r = frame.acc_ref if src is None else frame.env[src]
            if type(r) is Node:
                return r.line
        return ctx.entry_line(frame.start)

    return line_fn


# -- clause compilation ------------------------------------------------------------


def _compile_clause(c, key_ids, helpers):
    cc = CompiledClause()
    cc.nt = c.head
    cc.clause = c
    slots = {}

    def slot_for(name):
        if name not in slots:
            slots[name] = len(slots)
        return slots[name]

    def alloc(p):
        for name in var_paths(p):
            slot_for(name)

    for a in c.args:
        alloc(a)
    for it in c.body:
        if isinstance(it, (STokenLit, AnyKeyword)):
            alloc(it.var)
        elif isinstance(it, Call):
            for a in it.args:
                alloc(a)
    nvars = len(slots)
    extra = [nvars]

    def new_slot():
        s = extra[0]
        extra[0] += 1
        return s

    sources = {}
    bound = set()
    inputs = c.args[:-1]
    if inputs:
        inp = inputs[0]
        cc.in_match = make_matcher(inp, slots, bound)
        if c.role in (STEP, STOP):
            for name, path in var_paths(inp).items():
                sources[name] = ("acc", path)
    else:
        cc.in_match = None

    first_terminal = next(
        (i for i, it in enumerate(c.body) if isinstance(it, (KeywordLit, STokenLit, AnyKeyword))), None
    )
    tslot = new_slot() if first_terminal is not None else None
    items = []
    call_slots = []
    kw_pos_slot = None
    last = len(c.body) - 1
    for idx, it in enumerate(c.body):
        ts = tslot if idx == first_terminal else -1
        if isinstance(it, KeywordLit):
            key = ("k", it.text)
            items.append((OP_KW, key_ids[key], ts, frozenset([key_display(key)])))
        elif isinstance(it, STokenLit):
            key = ("t", it.cls)
            name = it.var.name
            if name == "_":
                mode, slot = 0, -1
            elif name in bound:
                mode, slot = 2, slots[name]
            else:
                mode, slot = 1, slots[name]
                bound.add(name)
                sources[name] = ("nil",)
            kind = "i" if it.kind == "integer" else "s"
            items.append((OP_TOK, key_ids[key], kind, slot, mode, ts, frozenset([key_display(key)])))
        elif isinstance(it, AnyKeyword):
            kw_pos_slot = ts if ts >= 0 else new_slot()
            slot = slots[it.var.name]
            bound.add(it.var.name)
            sources[it.var.name] = ("nil",)
            nxt = c.body[idx + 1] if idx < last else None
            keys = helpers.get(nxt.nt, ()) if isinstance(nxt, Call) else ()
            items.append((OP_ANYKW, slot, kw_pos_slot, frozenset(quote_keyword(k) for k in keys)))
        elif isinstance(it, Call):
            ins = it.args[:-1]
            in_build = make_builder(ins[0], slots) if ins else None
            if c.role == DISPATCH:
                hmode, harg = H_DISPATCH, kw_pos_slot
            elif c.role in (BASE, STEP) and idx == last:
                acc_sources = dict(sources)
                child_srcs = ([None] if c.role == STEP else []) + list(call_slots)
                line_fn = make_line_fn(tslot, False, child_srcs)
                hmode, harg = H_ACC, make_ref_builder(ins[0], acc_sources, line_fn)
            else:
                hmode, harg = H_DEFAULT, None
            out = it.args[-1]
            ref_slot = new_slot()
            call_slots.append(ref_slot)
            if isinstance(out, Var) and out.name != "_" and out.name not in bound:
                om = (1, slots[out.name], None)
            elif isinstance(out, Var) and out.name != "_":
                om = (2, slots[out.name], None)
            else:
                om = (3, -1, make_matcher(out, slots, bound))
            for name, path in var_paths(out).items():
                if name not in bound or name not in sources:
                    sources.setdefault(name, ("call", ref_slot, path))
            bound.update(var_paths(out))
            items.append((OP_CALL, it.nt, in_build, om, ref_slot, hmode, harg))
        else:
            raise GrammarError(f"unknown body item {it!r}")

    cc.nslots = extra[0]
    cc.items = tuple(items)
    out = c.args[-1]
    missing = [v for v in var_paths(out) if v not in slots or (v not in bound)]
    if missing:
        raise GrammarError(f"{c.head}: head variable {missing[0]} is never bound", c.line)
    cc.build = make_builder(out, slots)
    if c.role == KEYED:
        line_fn = make_line_fn(None, True, ())
    else:
        child_srcs = ([None] if c.role == STEP else []) + call_slots
        line_fn = make_line_fn(tslot, False, child_srcs)
    cc.build_ref = make_ref_builder(out, sources, line_fn)
    return cc


# -- lookahead sets ----------------------------------------------------------------------


def _first_sets(clauses_by_nt, helpers):
    """FIRST sets (of keys) and nullability for nonterminals and for each clause."""
    nt_first = {nt: set() for nt in clauses_by_nt}
    nt_null = {nt: False for nt in clauses_by_nt}

    def seq_first(body):
        out = set()
        for i, it in enumerate(body):
            if isinstance(it, KeywordLit):
                out.add(("k", it.text))
                return out, False
            if isinstance(it, STokenLit):
                out.add(("t", it.cls))
                return out, False
            if isinstance(it, AnyKeyword):
                nxt = body[i + 1] if i + 1 < len(body) else None
                keys = helpers.get(nxt.nt, ()) if isinstance(nxt, Call) else ()
                out.update(("k", k) for k in keys)
                return out, False
            if it == "EOF":
                out.add(EOF_KEY)
                return out, False
            out |= nt_first.get(it.nt, set())
            if not nt_null.get(it.nt, False):
                return out, False
        return out, True

    changed = True
    while changed:
        changed = False
        for nt, clauses in clauses_by_nt.items():
            for c in clauses:
                f, null = seq_first(c.body)
                if not f <= nt_first[nt]:
                    nt_first[nt] |= f
                    changed = True
                if null and not nt_null[nt]:
                    nt_null[nt] = True
                    changed = True
    return nt_first, nt_null, seq_first


def _follow_sets(clauses_by_nt, root_body, nt_first, nt_null, seq_first):
    follow = {nt: set() for nt in clauses_by_nt}
    bodies = [(None, root_body)] + [(nt, c.body) for nt, cs in clauses_by_nt.items() for c in cs]
    changed = True
    while changed:
        changed = False
        for owner, body in bodies:
            for i, it in enumerate(body):
                if not isinstance(it, Call) or it.nt not in follow:
                    continue
                f, null = seq_first(body[i + 1 :])
                if null and owner is not None:
                    f = f | follow[owner]
                if not f <= follow[it.nt]:
                    follow[it.nt] |= f
                    changed = True
    return follow


# -- entry point ------------------------------------------------------------------------------


def compile_grammar(g: Grammar, entry: str) -> CompiledGrammar:
    groups = g.nonterminals()
    if entry not in groups or is_helper(entry):
        raise GrammarError(f"undefined entry nonterminal {entry!r}")
    for c in g.clauses:
        for it in c.body:
            if isinstance(it, Call) and it.nt not in groups:
                raise GrammarError(f"{c.head}: call to undefined nonterminal {it.nt!r}", c.line)

    helpers = {
        nt: [c.args[0].name for c in cs if c.role == KEYED]
        for nt, cs in groups.items()
        if cs and cs[0].role == KEYED
    }
    keys = [EOF_KEY]
    for c in g.clauses:
        if c.role == KEYED:
            keys.append(("k", c.args[0].name))
        for it in c.body:
            if isinstance(it, KeywordLit):
                keys.append(("k", it.text))
            elif isinstance(it, STokenLit):
                keys.append(("t", it.cls))
    key_ids = {}
    for k in keys:
        key_ids.setdefault(k, len(key_ids))
    nkeys = len(key_ids) + 1  # plus "unknown"

    root_body = (Call(entry, (Var("R"),)), "EOF")
    nt_first, nt_null, seq_first = _first_sets(groups, helpers)
    follow = _follow_sets(groups, root_body, nt_first, nt_null, seq_first)

    nts = {}
    for nt, clauses in groups.items():
        cn = CompiledNT()
        cn.name = nt
        cn.alts = []
        for c in clauses:
            cc = _compile_clause(c, key_ids, helpers)
            f, null = seq_first(c.body)
            cc.first = frozenset(key_ids[k] for k in f)
            cc.nullable = null
            cn.alts.append(cc)
        fol = frozenset(key_ids[k] for k in follow[nt] if k in key_ids)

        def viable(alts, kid):
            return tuple(a for a in alts if kid in a.first or (a.nullable and kid in fol))

        cn.select = [viable(cn.alts, kid) for kid in range(nkeys)]
        if nt in helpers:
            cn.dispatch = {}
            for cc in cn.alts:
                cn.dispatch.setdefault(cc.clause.args[0].name, []).append(cc)
            cn.dispatch = {k: [viable(v, kid) for kid in range(nkeys)] for k, v in cn.dispatch.items()}
        else:
            cn.dispatch = None
        cn.accumulator = any(c.role == STOP for c in clauses)
        first_disp = frozenset(key_display(k) for k in nt_first[nt])
        full_disp = first_disp | frozenset(key_display(k) for k in follow[nt])
        cn.expect = [
            full_disp if nt_null[nt] and kid not in fol else first_disp for kid in range(nkeys)
        ]
        nts[nt] = cn

    # resolve call targets to compiled nonterminals
    for cn in nts.values():
        for cc in cn.alts:
            cc.items = tuple(
                (ins[0], nts[ins[1]]) + ins[2:] if ins[0] == OP_CALL else ins for ins in cc.items
            )

    root = CompiledClause()
    root.nt = None
    root.clause = None
    root.nslots = 2
    root.in_match = None
    root.items = (
        (OP_CALL, nts[entry], None, (1, 0, None), 1, H_DEFAULT, None),
        (OP_EOF, frozenset([EOF_TEXT])),
    )
    root.build = None
    root.build_ref = None
    return CompiledGrammar(g, entry, nts, root, key_ids)


def wrap_entry(g: Grammar, entry: str) -> CompiledGrammar:
    """Transform ``g`` and compile it behind a root that skips comments and requires end of input."""
    return compile_grammar(transform(g), entry)
