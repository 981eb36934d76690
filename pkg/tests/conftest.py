import os
import sys
from pathlib import Path

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from clf.compiler import wrap_entry  # noqa: E402
from clf.grammar import load_grammar_file  # noqa: E402
from clf.lexer import load_spec_file  # noqa: E402

CORPUS = Path(__file__).resolve().parent.parent / "src" / "clf" / "corpus"


@pytest.fixture(scope="session")
def corpus():
    return CORPUS


@pytest.fixture(scope="session")
def exp_spec():
    return load_spec_file(CORPUS / "exp.lex")


@pytest.fixture(scope="session")
def exp_grammar():
    return load_grammar_file(CORPUS / "exp.csp")


@pytest.fixture(scope="session")
def exp_cg(exp_grammar):
    return wrap_entry(exp_grammar, "exp")


@pytest.fixture(scope="session")
def prog_cg(exp_grammar):
    return wrap_entry(exp_grammar, "prog")


# -- acceptance summary ------------------------------------------------------------------

_ACCEPTANCE = {}


def record(n, ok, detail):
    _ACCEPTANCE[n] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
