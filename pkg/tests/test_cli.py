import io
import subprocess
import sys

import pytest

from clf import __version__
from clf.cli import build_parser, main
from clf.tokens import DEFAULT_END_MARKER

from conftest import CORPUS

EXP = ["--spec", str(CORPUS / "exp.lex"), "--grammar", str(CORPUS / "exp.csp")]


def run(argv):
    out = io.StringIO()
    return main(argv, out=out), out.getvalue()


def test_parse_prints_term_and_refs():
    status, out = run(["parse", *EXP, "--entry", "exp", str(CORPUS / "offset.exp")])
    assert status == 0
    assert out == "plus(id('A'),id('B'))\nnode(12,node(12,nil),node(13,nil))\n"


def test_parse_keep_comments():
    status, out = run(["parse", *EXP, "--entry", "prog", "--keep-comments", str(CORPUS / "sample.exp")])
    assert status == 0
    lines = out.splitlines()
    assert lines[2:] == ['comment(1," running totals")', 'comment(3," parenthesised")', 'comment(5," a longer one, split over lines")']


def test_parse_with_built_scanner(tmp_path):
    scanner = tmp_path / "exp-scanner"
    assert run(["build-scanner", "--spec", str(CORPUS / "exp.lex"), "-o", str(scanner)])[0] == 0
    args = ["--grammar", str(CORPUS / "exp.csp"), "--entry", "prog", str(CORPUS / "sample.exp")]
    a = run(["parse", "--scanner", str(scanner), *args])
    b = run(["parse", "--spec", str(CORPUS / "exp.lex"), *args])
    assert a == b and a[0] == 0


def test_parse_error_exit_2(tmp_path, capsys):
    src = tmp_path / "bad.exp"
    src.write_text("A +\n")
    status, out = run(["parse", *EXP, "--entry", "exp", str(src)])
    assert (status, out) == (2, "")
    assert capsys.readouterr().err.startswith(f"error: {src}:1 expected ")


@pytest.mark.parametrize(
    "argv",
    [
        ["parse", *EXP, "--entry", "exp", "/nonexistent/file.exp"],
        ["parse", "--spec", "/nonexistent.lex", "--grammar", str(CORPUS / "exp.csp"), "--entry", "exp", str(CORPUS / "offset.exp")],
        ["emit-dcg", "/nonexistent.csp"],
        ["compile-grammar", str(CORPUS / "add.csp"), "--emit-dcg", "/nonexistent/dir/out.dcg"],
    ],
)
def test_io_errors_exit_3(argv):
    assert run(argv)[0] == 3


def test_protocol_error_exit_3(tmp_path):
    fake = tmp_path / "fake"
    fake.write_text(f"#!{sys.executable}\nprint('garbage', flush=True)\n")
    fake.chmod(0o755)
    argv = ["parse", "--scanner", str(fake), "--grammar", str(CORPUS / "exp.csp"), "--entry", "exp", str(CORPUS / "offset.exp")]
    assert run(argv)[0] == 3


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["bogus"],
        ["parse", "--grammar", "g.csp", "--entry", "e", "f"],
        ["parse", "--spec", "a", "--scanner", "b", "--grammar", "g", "--entry", "e", "f"],
        ["lex"],
        ["lex", "--spec", "x.lex", "--target", "xml"],
        ["build-scanner", "--spec", "x.lex"],
        ["emit-dcg"],
    ],
)
def test_usage_exit_64(argv):
    assert run(argv)[0] == 64


def test_bad_spec_exit_65(tmp_path):
    bad = tmp_path / "bad.lex"
    bad.write_text("%contexts waitdata,sentences,comment,comm,incomm\n(a => keyword\n")
    args = ["parse", "--spec", str(bad), "--grammar", str(CORPUS / "exp.csp"), "--entry", "exp", str(CORPUS / "offset.exp")]
    assert run(args)[0] == 65
    assert run(["build-scanner", "--spec", str(bad), "-o", str(tmp_path / "s")])[0] == 65


@pytest.mark.parametrize(
    "text, entry",
    [("a(X,Y) :- b(X).", "a"), ("a(X) :- b(X).", "a"), ("a(x).", "nope"), ("p(f(A)) :- p(A), ['!'].", "p")],
)
def test_bad_grammar_exit_65(tmp_path, text, entry, capsys):
    g = tmp_path / "g.csp"
    g.write_text(text)
    assert run(["compile-grammar", str(g), "--entry", entry])[0] == 65
    assert str(g) in capsys.readouterr().err or entry == "nope"


def test_kind_mismatch_exit_65(tmp_path):
    g = tmp_path / "g.csp"
    g.write_text("n(X) :- stoken('ID', integer(X)).")
    src = tmp_path / "s.exp"
    src.write_text("A")
    assert run(["parse", "--spec", str(CORPUS / "exp.lex"), "--grammar", str(g), "--entry", "n", str(src)])[0] == 65


def test_emit_dcg_matches_golden():
    status, out = run(["emit-dcg", str(CORPUS / "add.csp")])
    assert status == 0
    assert out == (CORPUS / "add.dcg").read_text()


def test_compile_grammar_writes_listing(tmp_path, capsys):
    out_file = tmp_path / "d.dcg"
    status, out = run(["compile-grammar", str(CORPUS / "dispatch.csp"), "--emit-dcg", str(out_file), "--entry", "a"])
    assert status == 0 and out == ""
    assert out_file.read_text() == (CORPUS / "dispatch.dcg").read_text()
    assert "nonterminals" in capsys.readouterr().err
    assert run(["compile-grammar", str(CORPUS / "dispatch.csp"), "--emit-dcg", "-"])[1] == out_file.read_text()


def test_help_lists_everything(capsys):
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["--help"])
    assert info.value.code == 0
    text = capsys.readouterr().out
    for word in [
        "lex", "compile-grammar", "emit-dcg", "parse", "build-scanner",
        "--spec", "--end-marker", "--target", "--emit-dcg", "--entry",
        "--scanner", "--grammar", "--keep-comments", "-o", "--version",
    ]:
        assert word in text, word


def test_version():
    r = subprocess.run([sys.executable, "-m", "clf.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0
    assert r.stdout.strip() == f"clf {__version__}"


def test_lex_session_via_cli():
    text = f"[BEGINDATA]\nX + 1\n{DEFAULT_END_MARKER}\n[QUIT]\n"
    r = subprocess.run(
        [sys.executable, "-m", "clf.cli", "lex", "--spec", str(CORPUS / "exp.lex")], input=text, capture_output=True, text=True
    )
    assert r.returncode == 0
    assert r.stdout == "stoken\tID\tX\nkeyword\t+\nitoken\tINT\t1\n[ENDTOKENS]\n"


def test_lex_missing_spec_exit_3():
    r = subprocess.run([sys.executable, "-m", "clf.cli", "lex", "--spec", "/nonexistent.lex"], capture_output=True, text=True)
    assert r.returncode == 3


def test_console_script_bogus_exit_64():
    r = subprocess.run([sys.executable, "-m", "clf.cli", "bogus"], capture_output=True, text=True)
    assert r.returncode == 64
    assert "usage:" in r.stderr
