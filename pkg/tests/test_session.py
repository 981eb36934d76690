import io
import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from clf.errors import ProtocolError
from clf.lexer import scan
from clf.session import run_session
from clf.tokens import DEFAULT_END_MARKER as END
from clf.tokens import decode_token

from conftest import CORPUS


def session(spec, text, **kw):
    out, err = io.StringIO(), io.StringIO()
    status = run_session(spec, io.StringIO(text), out, err=err, **kw)
    return status, out.getvalue(), err.getvalue()


def test_begindata_window(exp_spec):
    status, out, err = session(exp_spec, f"[BEGINDATA]\nX + 1\n{END}\n")
    assert status == 0 and err == ""
    assert out == "stoken\tID\tX\nkeyword\t+\nitoken\tINT\t1\n[ENDTOKENS]\n"


def test_quit_only(exp_spec):
    assert session(exp_spec, "[QUIT]\n") == (0, "", "")


def test_quit_stops_reading(exp_spec):
    status, out, _ = session(exp_spec, f"[QUIT]\n[BEGINDATA]\nX\n{END}\n")
    assert (status, out) == (0, "")


def test_eclipse_target(exp_spec):
    _, out, _ = session(exp_spec, f"[TARGET]eclipse\n[BEGINDATA]\nX\n{END}\n")
    assert out == "token('ID',string(\"X\")).\n[ENDTOKENS]\n"


def test_eclipse_transcript(exp_spec):
    _, out, _ = session(exp_spec, f"[TARGET]eclipse\n[BEGINDATA]\nX + 1 % hi\n\n(Y)\n{END}\n")
    assert out == (
        "token('ID',string(\"X\")).\n"
        "keyword('+').\n"
        "token('INT',integer(1)).\n"
        'comtext(" hi").\n'
        "nl.\n"
        "nl.\n"
        "keyword('(').\n"
        "token('ID',string(\"Y\")).\n"
        "keyword(')').\n"
        "[ENDTOKENS]\n"
    )


def test_multiline_window_keeps_line_breaks(exp_spec):
    _, out, _ = session(exp_spec, f"[BEGINDATA]\nA\n\nB\n{END}\n")
    assert out == "stoken\tID\tA\nnl\nnl\nstoken\tID\tB\n[ENDTOKENS]\n"


def test_restartable(exp_spec):
    window = f"[BEGINDATA]\nX = (A + 2) * B; % c\nY = 3;\n{END}\n"
    _, out, _ = session(exp_spec, window + window)
    half = len(out) // 2
    assert out[:half] == out[half:]
    assert out[:half] == session(exp_spec, window)[1]


def test_no_tokens_outside_windows(exp_spec):
    status, out, err = session(exp_spec, f"X + 1\n[BOGUS]\n[TARGET]nope\n[BEGINDATA]\nX\n{END}\nY\n")
    assert out == "stoken\tID\tX\n[ENDTOKENS]\n"
    assert "unknown target 'nope'" in err


def test_data_lines_look_like_commands(exp_spec):
    _, out, _ = session(exp_spec, f"[BEGINDATA]\n[QUIT]\n{END}\n")
    assert out == "error\t[\nstoken\tID\tQUIT\nerror\t]\n[ENDTOKENS]\n"


def test_eof_inside_window_flushes(exp_spec):
    _, out, _ = session(exp_spec, "[BEGINDATA]\nX\nY")
    assert out == "stoken\tID\tX\nnl\nstoken\tID\tY\n[ENDTOKENS]\n"


def test_custom_end_marker(exp_spec):
    _, out, _ = session(exp_spec, "[BEGINDATA]\nX\n.\n", end_marker=".")
    assert out == "stoken\tID\tX\n[ENDTOKENS]\n"


def test_initial_target(exp_spec):
    _, out, _ = session(exp_spec, f"[BEGINDATA]\n1\n{END}\n", target="eclipse")
    assert out == "token('INT',integer(1)).\n[ENDTOKENS]\n"


def test_bad_initial_target(exp_spec):
    with pytest.raises(ProtocolError):
        session(exp_spec, "", target="xml")


def test_parsefile(exp_spec):
    path = CORPUS / "offset.exp"
    _, out, _ = session(exp_spec, f"[PARSEFILE]{path}\n")
    assert out == "nl\n" * 11 + "stoken\tID\tA\nkeyword\t+\nnl\nstoken\tID\tB\nnl\n[ENDTOKENS]\n"


def test_parsefile_missing(exp_spec, tmp_path):
    path = tmp_path / "missing.exp"
    _, out, _ = session(exp_spec, f"[PARSEFILE]{path}\n[BEGINDATA]\nX\n{END}\n")
    lines = out.splitlines()
    assert lines[0] == f"error\tcannot open {path}: No such file or directory"
    assert lines[1:] == ["[ENDTOKENS]", "stoken\tID\tX", "[ENDTOKENS]"]


def test_parsefile_without_name(exp_spec):
    _, out, _ = session(exp_spec, "[PARSEFILE]\n")
    assert out == "error\t[PARSEFILE] needs a file name\n[ENDTOKENS]\n"


@settings(max_examples=60, deadline=None)
@given(st.lists(st.text(alphabet="AB1 +=;%()\t", max_size=12), min_size=1, max_size=5))
def test_window_equals_whole_text_scan(exp_spec, lines):
    _, out, _ = session(exp_spec, "[BEGINDATA]\n" + "\n".join(lines) + f"\n{END}\n")
    got = [decode_token(x) for x in out.splitlines()[:-1]]
    assert got == scan(exp_spec, "\n".join(lines))


def test_tokens_stream_before_window_ends():
    # the first token must arrive before the second source line is written
    proc = subprocess.Popen(
        [sys.executable, "-m", "clf.session", "--spec", str(CORPUS / "exp.lex")],
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
        bufsize=1,
    )
    try:
        proc.stdin.write("[BEGINDATA]\nX +\n")
        proc.stdin.flush()
        assert proc.stdout.readline() == "stoken\tID\tX\n"
        assert proc.stdout.readline() == "keyword\t+\n"
        proc.stdin.write(f"1\n{END}\n[QUIT]\n")
        proc.stdin.flush()
        assert proc.stdout.read() == "nl\nitoken\tINT\t1\n[ENDTOKENS]\n"
        assert proc.wait(timeout=20) == 0
    finally:
        if proc.poll() is None:
            proc.kill()
        proc.stdin.close()
        proc.stdout.close()


@pytest.mark.parametrize("args, code", [(["--spec", "/nonexistent.lex"], 3), ([], 2)])
def test_clf_scan_failures(args, code):
    r = subprocess.run([sys.executable, "-m", "clf.session", *args], capture_output=True, text=True, input="")
    assert r.returncode == code


def test_clf_scan_bad_spec(tmp_path):
    bad = tmp_path / "bad.lex"
    bad.write_text("%contexts sentences\n")
    r = subprocess.run([sys.executable, "-m", "clf.session", "--spec", str(bad)], capture_output=True, text=True)
    assert r.returncode == 65
