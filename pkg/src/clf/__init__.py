"""Parser construction toolchain: rule-based scanners, clause grammars, backtracking parsers."""

__version__ = "0.1.0"
