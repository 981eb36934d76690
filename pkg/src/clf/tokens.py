"""Token kinds and the line protocol between a scanner and a parser.

Two encodings exist.  ``debug`` is tab separated and readable by eye::

    keyword	+
    stoken	ID	X1
    itoken	INT	42
    nl
    comtext	a comment
    error	?

``eclipse`` writes one ground term per line (``keyword('+').``,
``token('ID',string("X1")).`` ...).  Only the debug form is decoded; it is
what a parser process asks for.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Union

from .errors import DecodeError, IntegerOverflowError, ProtocolError, UnknownTargetError

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

DEFAULT_END_MARKER = "[)*&^%!ENDDATA!%&*(]"
END_TOKENS = "[ENDTOKENS]"
TARGETS = ("debug", "eclipse", "centaur")


def _check_name(name):
    if not name or any(c.isspace() for c in name):
        raise ValueError(f"invalid token class name {name!r}")


@dataclass(frozen=True, slots=True)
class Keyword:
    text: str


@dataclass(frozen=True, slots=True)
class SToken:
    name: str
    value: str

    def __post_init__(self):
        _check_name(self.name)


@dataclass(frozen=True, slots=True)
class IToken:
    name: str
    value: int

    def __post_init__(self):
        _check_name(self.name)
        if not INT_MIN <= self.value <= INT_MAX:
            raise ValueError(f"integer token value out of 64-bit range: {self.value}")


@dataclass(frozen=True, slots=True)
class Newline:
    pass


@dataclass(frozen=True, slots=True)
class CommentText:
    text: str


@dataclass(frozen=True, slots=True)
class LexError:
    text: str


Token = Union[Keyword, SToken, IToken, Newline, CommentText, LexError]
NEWLINE = Newline()


@dataclass(frozen=True)
class BeginData:
    pass


@dataclass(frozen=True)
class EndData:
    pass


@dataclass(frozen=True)
class ParseFile:
    path: str


@dataclass(frozen=True)
class SetTarget:
    mode: str


@dataclass(frozen=True)
class Quit:
    pass


SessionCommand = Union[BeginData, EndData, ParseFile, SetTarget, Quit]


_ESC = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESC = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}
_ESC_RE = re.compile(r"[\\\t\n\r]")
_DECIMAL = re.compile(r"-?[0-9]+\Z")


def escape_field(text: str) -> str:
    return _ESC_RE.sub(lambda m: _ESC[m.group()], text)


def unescape_field(text: str, line: str = "") -> str:
    if "\\" not in text:
        return text
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\":
            nxt = text[i + 1 : i + 2]
            if nxt not in _UNESC:
                raise DecodeError(f"bad escape in token line {line!r}")
            out.append(_UNESC[nxt])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


def parse_int(text: str) -> int:
    """Decode a decimal token value, enforcing the 64-bit bound."""
    if not _DECIMAL.match(text):
        raise DecodeError(f"not a decimal integer: {text!r}")
    value = int(text)
    if not INT_MIN <= value <= INT_MAX:
        raise IntegerOverflowError(f"integer token value out of 64-bit range: {text}")
    return value


def _eclipse_atom(text):
    return "'" + escape_field(text).replace("'", "\\'") + "'"


def _eclipse_string(text):
    return '"' + escape_field(text).replace('"', '\\"') + '"'


def encode_token(t: Token, mode: str = "debug") -> str:
    if mode == "debug":
        if isinstance(t, Keyword):
            return "keyword\t" + escape_field(t.text)
        if isinstance(t, SToken):
            return f"stoken\t{t.name}\t{escape_field(t.value)}"
        if isinstance(t, IToken):
            return f"itoken\t{t.name}\t{t.value}"
        if isinstance(t, Newline):
            return "nl"
        if isinstance(t, CommentText):
            return "comtext\t" + escape_field(t.text)
        if isinstance(t, LexError):
            return "error\t" + escape_field(t.text)
    elif mode in ("eclipse", "centaur"):
        if isinstance(t, Keyword):
            return f"keyword({_eclipse_atom(t.text)})."
        if isinstance(t, SToken):
            return f"token({_eclipse_atom(t.name)},string({_eclipse_string(t.value)}))."
        if isinstance(t, IToken):
            return f"token({_eclipse_atom(t.name)},integer({t.value}))."
        if isinstance(t, Newline):
            return "nl."
        if isinstance(t, CommentText):
            return f"comtext({_eclipse_string(t.text)})."
        if isinstance(t, LexError):
            return f"error({_eclipse_string(t.text)})."
    else:
        raise ValueError(f"unknown target mode {mode!r}")
    raise TypeError(f"not a token: {t!r}")


def decode_token(line: str) -> Token:
    """Inverse of :func:`encode_token` in debug mode."""
    fields = line.split("\t")
    kind = fields[0]
    try:
        if kind == "nl" and len(fields) == 1:
            return NEWLINE
        if kind == "keyword" and len(fields) == 2:
            return Keyword(unescape_field(fields[1], line))
        if kind == "comtext" and len(fields) == 2:
            return CommentText(unescape_field(fields[1], line))
        if kind == "error" and len(fields) == 2:
            return LexError(unescape_field(fields[1], line))
        if kind == "stoken" and len(fields) == 3:
            return SToken(fields[1], unescape_field(fields[2], line))
        if kind == "itoken" and len(fields) == 3:
            return IToken(fields[1], parse_int(fields[2]))
    except ValueError as exc:
        if isinstance(exc, DecodeError):
            raise
        raise DecodeError(f"malformed token line {line!r}: {exc}") from None
    raise DecodeError(f"malformed token line {line!r}")


def parse_command(line: str, end_marker: str = DEFAULT_END_MARKER) -> Optional[SessionCommand]:
    """Recognise a session command, or return None for any other line."""
    if line == end_marker:
        return EndData()
    if not line.startswith("["):
        return None
    if line == "[BEGINDATA]":
        return BeginData()
    if line == "[QUIT]":
        return Quit()
    if line.startswith("[PARSEFILE]"):
        path = line[len("[PARSEFILE]") :]
        if not path:
            raise ProtocolError("[PARSEFILE] needs a file name")
        return ParseFile(path)
    if line.startswith("[TARGET]"):
        mode = line[len("[TARGET]") :].strip()
        if mode not in TARGETS:
            raise UnknownTargetError(f"unknown target {mode!r}")
        return SetTarget(mode)
    return None
