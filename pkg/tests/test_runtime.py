import json

import pytest
from hypothesis import given, settings, strategies as st

from clf.compiler import wrap_entry
from clf.errors import KindMismatchError, ParseError
from clf.grammar import load_grammar_file, parse_cs
from clf.lexer import load_spec_file, scan
from clf.runtime import ParseState, parse_text, parse_tokens, skip_comm
from clf.session import read_source
from clf.terms import NIL, Node, print_ref, print_term, shape_matches
from clf.tokens import NEWLINE, CommentText, IToken, Keyword, LexError, SToken

from conftest import CORPUS
from oracle import chart_first

FIXTURES = json.loads((CORPUS / "fixtures.json").read_text())


@pytest.mark.parametrize("fx", FIXTURES, ids=[f["sample"] for f in FIXTURES])
def test_corpus_fixtures(fx):
    cg = wrap_entry(load_grammar_file(CORPUS / fx["grammar"]), fx["entry"])
    res = parse_text(cg, load_spec_file(CORPUS / fx["spec"]), read_source(CORPUS / fx["sample"]))
    assert print_term(res.term) == fx["term"]
    assert print_ref(res.refs) == fx["refs"]
    assert shape_matches(res.term, res.refs)


def test_leading_blank_lines_example(exp_spec, exp_cg):
    res = parse_text(exp_cg, exp_spec, "\n" * 11 + "A +\n  B")
    assert print_term(res.term) == "plus(id('A'),id('B'))"
    assert print_ref(res.refs) == "node(12,node(12,nil),node(13,nil))"


def test_single_identifier(exp_cg):
    res = parse_tokens(exp_cg, [SToken("ID", "A")])
    assert print_term(res.term) == "id('A')"
    assert print_ref(res.refs) == "node(1,nil)"


def test_subtraction_chain(exp_spec, exp_cg):
    res = parse_text(exp_cg, exp_spec, "A - B - C")
    assert print_term(res.term) == "minus(minus(id('A'),id('B')),id('C'))"


def test_empty_program(exp_spec, prog_cg):
    res = parse_text(prog_cg, exp_spec, "\n\n% nothing\n")
    assert print_term(res.term) == "[]"
    assert res.refs is NIL


def test_list_refs_are_cons_nodes(exp_spec, prog_cg):
    res = parse_text(prog_cg, exp_spec, "X = 1;\nY = 2;")
    assert print_ref(res.refs) == "node(1,node(1,nil,node(1,nil)),node(2,node(2,nil,node(2,nil)),nil))"


# -- skip_comm -----------------------------------------------------------------------------


def test_skip_comm_newlines():
    s = skip_comm(ParseState((NEWLINE, NEWLINE, Keyword("+"))))
    assert (s.cursor, s.line) == (2, 2)


def test_skip_comm_nothing_to_skip():
    s0 = ParseState((Keyword("+"),), cursor=0, line=3)
    assert skip_comm(s0) == s0


def test_skip_comm_keeps_comments():
    s = skip_comm(ParseState((CommentText("hi"), NEWLINE, SToken("ID", "A")), line=4, keep_comments=True))
    assert (s.cursor, s.line, s.comments) == (2, 5, ((5, "hi"),))
    d = skip_comm(ParseState((CommentText("hi"), NEWLINE, SToken("ID", "A")), line=4))
    assert (d.cursor, d.line, d.comments) == (2, 5, ())


def test_skip_comm_to_end():
    s = skip_comm(ParseState((NEWLINE, CommentText("x")), keep_comments=True))
    assert (s.cursor, s.line, s.comments, s.high_water) == (2, 1, ((2, "x"),), 2)


# -- comments policy -----------------------------------------------------------------------


def test_keep_and_discard_comments(exp_spec, prog_cg):
    text = read_source(CORPUS / "sample.exp")
    keep = parse_text(prog_cg, exp_spec, text, keep_comments=True)
    drop = parse_text(prog_cg, exp_spec, text)
    assert drop.comments == []
    assert keep.comments == [(1, " running totals"), (3, " parenthesised"), (5, " a longer one, split over lines")]
    assert (keep.term, keep.refs) == (drop.term, drop.refs)


# -- errors --------------------------------------------------------------------------------


def test_error_at_high_water(exp_spec, prog_cg):
    with pytest.raises(ParseError) as info:
        parse_text(prog_cg, exp_spec, "X = 1;\nY = 2 +\n\n  ;\n")
    err = info.value
    assert err.line == 4
    assert "ID" in err.expected and "'('" in err.expected
    assert "';'" in err.found


def test_error_at_end_of_input_uses_last_token_line(exp_spec, prog_cg):
    with pytest.raises(ParseError) as info:
        parse_text(prog_cg, exp_spec, "X = 1 +\n\n\n")
    assert info.value.line == 1
    assert info.value.found == "end of input"


def test_error_in_empty_input(exp_spec, exp_cg):
    with pytest.raises(ParseError) as info:
        parse_text(exp_cg, exp_spec, "")
    assert info.value.line == 1


def test_lex_error_surfaces_as_parse_error(exp_spec, exp_cg):
    with pytest.raises(ParseError) as info:
        parse_text(exp_cg, exp_spec, "A +\n b")
    assert info.value.line == 2
    assert "'b'" in info.value.found


def test_lex_error_token_directly(exp_cg):
    with pytest.raises(ParseError) as info:
        parse_tokens(exp_cg, [SToken("ID", "A"), LexError("?")])
    assert "unrecognised" in info.value.found


def test_kind_mismatch(exp_cg):
    with pytest.raises(KindMismatchError):
        parse_tokens(exp_cg, [SToken("INT", "seven")])
    with pytest.raises(KindMismatchError):
        parse_tokens(exp_cg, [IToken("ID", 3)])


def test_unknown_token_class_is_plain_failure(exp_cg):
    with pytest.raises(ParseError):
        parse_tokens(exp_cg, [SToken("FLOAT", "1.5")])


def test_filename_in_message(exp_cg):
    with pytest.raises(ParseError) as info:
        parse_tokens(exp_cg, [Keyword("+")], filename="f.exp")
    assert info.value.describe().startswith("f.exp:1 expected ")


# -- scale ---------------------------------------------------------------------------------


def test_deep_nesting_no_recursion_error(exp_spec, exp_cg):
    depth = 20000
    res = parse_text(exp_cg, exp_spec, "(" * depth + "A" + ")" * depth)
    assert print_term(res.term) == "id('A')"


def test_long_chain(exp_spec, exp_cg):
    n = 20000
    res = parse_text(exp_cg, exp_spec, " + ".join(["A"] * n))
    t = res.term
    for _ in range(n - 1):
        assert t.functor == "plus"
        t = t.args[0]
    assert print_term(t) == "id('A')"
    assert shape_matches(res.term, res.refs)


def test_long_statement_list(exp_spec, prog_cg):
    n = 20000
    res = parse_text(prog_cg, exp_spec, "X = 1;\n" * n)
    assert len(res.term.elements) == n
    assert shape_matches(res.term, res.refs)


def test_right_recursive_pattern_grammar():
    g = parse_cs("l([X|T]) :- stoken('ID',string(X)), l(T).\nl([]).\n")
    cg = wrap_entry(g, "l")
    res = parse_tokens(cg, [SToken("ID", "a")] * 30000)
    assert len(res.term.elements) == 30000


# -- properties ----------------------------------------------------------------------------

atoms = st.sampled_from(["A", "B", "42", "(A - 7)"])
ops = st.sampled_from([" + ", " - ", " * ", " +\n", "\n*\n", " % note\n- "])


@st.composite
def exp_sources(draw):
    parts = [draw(atoms)]
    for _ in range(draw(st.integers(0, 6))):
        parts += [draw(ops), draw(atoms)]
    return "".join(parts)


def _lines(r):
    out, stack = [], [r]
    while stack:
        r = stack.pop()
        if isinstance(r, Node):
            out.append(r.line)
            stack.extend(r.children)
    return out


@settings(max_examples=80, deadline=None)
@given(exp_sources(), st.integers(1, 30))
def test_leading_blank_lines_shift_every_node(exp_spec, exp_cg, src, k):
    a = parse_text(exp_cg, exp_spec, src)
    b = parse_text(exp_cg, exp_spec, "\n" * k + src)
    assert a.term == b.term
    assert [x + k for x in _lines(a.refs)] == _lines(b.refs)
    assert shape_matches(a.term, a.refs)


@settings(max_examples=80, deadline=None)
@given(exp_sources())
def test_matches_chart_oracle(exp_spec, exp_grammar, exp_cg, src):
    toks = scan(exp_spec, src)
    res = parse_tokens(exp_cg, toks)
    assert (res.term, res.refs) == chart_first(exp_grammar, "exp", toks)


@settings(max_examples=80, deadline=None)
@given(exp_sources(), st.integers(0, 20))
def test_error_line_bounded(exp_spec, exp_cg, src, cut):
    text = src[:cut] + " ) " + src[cut:]
    toks = scan(exp_spec, text)
    try:
        parse_tokens(exp_cg, toks)
    except ParseError as err:
        assert 1 <= err.line <= 1 + text.count("\n")
