"""Lexeme rewriting functions available to scanner actions."""


def shiftleft(s):
    return s[1:]


def shiftleft2(s):
    return s[2:]


def suplast(s):
    return s[:-1]


def suplast2(s):
    return s[:-2]


def rmtabs(s):
    return s.replace("\t", " ")


def rm_leading_spaces(s):
    return s.lstrip(" ")


def clear_string(s, c):
    return s.replace(c, "")


def clear_string1(s):
    """Strip the delimiters and undouble the delimiter inside: ``'foo''bar'`` -> ``foo'bar``."""
    if len(s) < 2:
        return ""
    q = s[0]
    body = s[1:-1]
    return body.replace(q + q, q)


def clear_string2(s):
    """Strip the delimiters and drop each backslash that forces the next character."""
    body = s[1:-1]
    out = []
    i = 0
    while i < len(body):
        if body[i] == "\\" and i + 1 < len(body):
            out.append(body[i + 1])
            i += 2
        else:
            out.append(body[i])
            i += 1
    return "".join(out)


TRANSFORMS = {
    "shiftleft": shiftleft,
    "shiftleft2": shiftleft2,
    "suplast": suplast,
    "suplast2": suplast2,
    "rmtabs": rmtabs,
    "rm_leading_spaces": rm_leading_spaces,
    "clear_string": clear_string,
    "clear_string1": clear_string1,
    "clear_string2": clear_string2,
}


def apply_transform(name, lexeme, arg=None):
    """Apply the named library transform; ``clear_string`` takes the character in ``arg``."""
    try:
        fn = TRANSFORMS[name]
    except KeyError:
        raise ValueError(f"unknown transform {name!r}") from None
    if name == "clear_string":
        if arg is None or len(arg) != 1:
            raise ValueError("clear_string needs exactly one character")
        return fn(lexeme, arg)
    return fn(lexeme)
