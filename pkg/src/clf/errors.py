"""Exception hierarchy shared by the toolchain.

Each family maps to one CLI exit status (see ``clf.cli``).
"""


class ClfError(Exception):
    pass


class SpecError(ClfError):
    """A scanner specification failed to load."""

    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class GrammarError(ClfError):
    """A CS grammar failed to parse, validate or transform."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + message)


class KindMismatchError(GrammarError):
    """A grammar expects integer tokens of a class the scanner emits as strings (or vice versa)."""


class ProtocolError(ClfError):
    """Malformed traffic between scanner and parser."""


class DecodeError(ProtocolError):
    pass


class IntegerOverflowError(DecodeError):
    pass


class UnknownTargetError(ProtocolError):
    pass


class ScannerLaunchError(ProtocolError):
    pass


class FileOpenError(ClfError):
    def __init__(self, path, reason):
        self.path = path
        super().__init__(f"cannot open {path}: {reason}")


class ParseError(ClfError):
    """The token stream is not in the language of the grammar.

    ``line`` is the source line of the furthest token the parser reached;
    ``expected`` the terminals that would have been accepted there.
    """

    def __init__(self, line, expected, found=None, filename=None):
        self.line = line
        self.expected = tuple(expected)
        self.found = found
        self.filename = filename
        super().__init__(self.describe())

    def describe(self):
        where = f"{self.filename}:{self.line}" if self.filename else f"line {self.line}"
        msg = f"{where} expected {', '.join(self.expected) or 'nothing'}"
        if self.found is not None:
            msg += f" (found {self.found})"
        return msg

    def with_filename(self, filename):
        return ParseError(self.line, self.expected, self.found, filename)
