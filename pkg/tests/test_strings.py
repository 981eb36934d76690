import pytest
from hypothesis import given, strategies as st

from clf.strings import TRANSFORMS, apply_transform, clear_string2


@pytest.mark.parametrize(
    "name, lexeme, arg, out",
    [
        ("shiftleft", "%abc", None, "abc"),
        ("shiftleft", "", None, ""),
        ("shiftleft2", "--x", None, "x"),
        ("shiftleft2", "-", None, ""),
        ("suplast", "abc\n", None, "abc"),
        ("suplast", "", None, ""),
        ("suplast2", "ab", None, ""),
        ("suplast2", "text*/", None, "text"),
        ("rmtabs", "a\tb\t\t", None, "a b  "),
        ("rm_leading_spaces", "   a  b ", None, "a  b "),
        ("rm_leading_spaces", "\t a", None, "\t a"),
        ("clear_string", "a_b_c", "_", "abc"),
        ("clear_string", "abc", "x", "abc"),
        ("clear_string1", "'foo''bar'", None, "foo'bar"),
        ("clear_string1", "''", None, ""),
        ("clear_string1", '"say ""hi"""', None, 'say "hi"'),
        ("clear_string1", "''''", None, "'"),
        ("clear_string2", '"a\\"b"', None, 'a"b'),
        ("clear_string2", '"a\\\\b"', None, "a\\b"),
        ("clear_string2", '""', None, ""),
        ("clear_string2", '"\\n"', None, "n"),
    ],
)
def test_transform_table(name, lexeme, arg, out):
    assert apply_transform(name, lexeme, arg) == out


def test_nine_transforms():
    assert len(TRANSFORMS) == 9


@pytest.mark.parametrize("arg", [None, "", "ab"])
def test_clear_string_needs_one_char(arg):
    with pytest.raises(ValueError):
        apply_transform("clear_string", "abc", arg)


def test_unknown_transform():
    with pytest.raises(ValueError):
        apply_transform("upcase", "abc")


def _unescape_reference(body):
    # a tiny automaton: state "esc" after a forcing backslash
    out, esc = "", False
    for ch in body:
        if esc:
            out += ch
            esc = False
        elif ch == "\\":
            esc = True
        else:
            out += ch
    return out + ("\\" if esc else "")


@given(st.text(alphabet='ab\\"n', max_size=20))
def test_clear_string2_against_automaton(body):
    assert clear_string2('"' + body + '"') == _unescape_reference(body)


@given(st.text(alphabet="ab'", max_size=20))
def test_clear_string1_inverts_doubling(body):
    assert apply_transform("clear_string1", "'" + body.replace("'", "''") + "'") == body


@given(st.text(max_size=20))
def test_shift_and_suplast_lengths(s):
    assert len(apply_transform("shiftleft", s)) == max(0, len(s) - 1)
    assert len(apply_transform("shiftleft2", s)) == max(0, len(s) - 2)
    assert len(apply_transform("suplast", s)) == max(0, len(s) - 1)
    assert len(apply_transform("suplast2", s)) == max(0, len(s) - 2)
    assert "\t" not in apply_transform("rmtabs", s)
