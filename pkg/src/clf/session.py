"""Stand-alone scanner session over a line protocol.

Commands arrive one per line::

    [TARGET]debug | [TARGET]eclipse | [TARGET]centaur
    [BEGINDATA]            ... source lines ... then the end marker line
    [PARSEFILE]path
    [QUIT]

Every burst of token lines ends with ``[ENDTOKENS]``.  Inside a data
window the text is scanned incrementally, so a token is written as soon
as the line that completes it has been read.
"""

from __future__ import annotations

import argparse
import io
import os
import stat
import sys

from .errors import ClfError, ProtocolError
from .lexer import LexSpec, Scanner, load_spec, load_spec_file
from .tokens import (
    DEFAULT_END_MARKER,
    END_TOKENS,
    TARGETS,
    BeginData,
    LexError,
    ParseFile,
    Quit,
    SetTarget,
    encode_token,
    parse_command,
)


def read_source(path):
    """Read a source file as text with universal newlines."""
    with open(path, encoding="utf-8", newline=None) as f:
        return f.read()


def _emit(out, line):
    out.write(line + "\n")
    out.flush()


def run_session(spec: LexSpec, inp, out, end_marker=DEFAULT_END_MARKER, target="debug", err=None) -> int:
    """Serve one session; return the exit status (0 on ``[QUIT]`` or end of input).

    A malformed ``[PARSEFILE]`` line answers with an error token and
    ``[ENDTOKENS]``; other malformed commands are reported on ``err``
    (standard error by default) so no token line escapes a burst.
    """
    if target not in TARGETS:
        raise ProtocolError(f"unknown target {target!r}")
    window = None  # Scanner while inside a data window
    first_line = True
    for raw in inp:
        line = raw[:-1] if raw.endswith("\n") else raw
        if window is not None:
            if line == end_marker:
                for t in window.finish():
                    _emit(out, encode_token(t, target))
                _emit(out, END_TOKENS)
                window = None
                continue
            chunk = line if first_line else "\n" + line
            first_line = False
            for t in window.feed(chunk):
                _emit(out, encode_token(t, target))
            # the next line brings a line break, or the marker ends the window
            for t in window.release_common(["\n", None]):
                _emit(out, encode_token(t, target))
            continue
        try:
            cmd = parse_command(line, end_marker)
        except ProtocolError as exc:
            if line.startswith("[PARSEFILE]"):
                _emit(out, encode_token(LexError(str(exc)), target))
                _emit(out, END_TOKENS)
            else:
                print(f"error: {exc}", file=err if err is not None else sys.stderr, flush=True)
            continue
        if isinstance(cmd, BeginData):
            window = Scanner(spec)
            first_line = True
        elif isinstance(cmd, SetTarget):
            target = cmd.mode
        elif isinstance(cmd, ParseFile):
            try:
                text = read_source(cmd.path)
            except (OSError, UnicodeDecodeError) as exc:
                reason = exc.strerror if isinstance(exc, OSError) and exc.strerror else str(exc)
                _emit(out, encode_token(LexError(f"cannot open {cmd.path}: {reason}"), target))
            else:
                sc = Scanner(spec)
                for t in sc.feed(text) + sc.finish():
                    _emit(out, encode_token(t, target))
            _emit(out, END_TOKENS)
        elif isinstance(cmd, Quit):
            return 0
        # anything else outside a window is ignored
    if window is not None:
        for t in window.finish():
            _emit(out, encode_token(t, target))
        _emit(out, END_TOKENS)
    return 0


def _stdio():
    """Standard streams set to UTF-8, universal newlines in, line-buffered out."""
    for stream, kw in ((sys.stdin, {"newline": None}), (sys.stdout, {"newline": "\n", "line_buffering": True})):
        if isinstance(stream, io.TextIOWrapper):
            stream.reconfigure(encoding="utf-8", **kw)
    return sys.stdin, sys.stdout


_SCRIPT = '''#!{python}
# Stand-alone scanner generated by `clf build-scanner`.
import sys
from clf.lexer import load_spec
from clf.session import serve

SPEC = {spec!r}

if __name__ == "__main__":
    sys.exit(serve(load_spec(SPEC), sys.argv[1:]))
'''


def build_scanner(spec_path, out_path, python=None):
    """Write an executable scanner script with the spec text embedded."""
    with open(spec_path, encoding="utf-8") as f:
        text = f.read()
    load_spec(text)  # fail early on a bad spec
    with open(out_path, "w", encoding="utf-8") as f:
        f.write(_SCRIPT.format(python=python or sys.executable, spec=text))
    mode = os.stat(out_path).st_mode
    os.chmod(out_path, mode | stat.S_IXUSR | stat.S_IXGRP | stat.S_IXOTH)
    return out_path


def add_session_flags(p, spec_required=True):
    if spec_required:
        p.add_argument("--spec", required=True, metavar="FILE", help="scanner specification")
    p.add_argument("--end-marker", default=DEFAULT_END_MARKER, metavar="STR", help="line closing a data window")
    p.add_argument("--target", default="debug", choices=TARGETS, help="initial output format")


def serve(spec, argv=None):
    """Entry point for generated scanners: session flags only, spec already loaded."""
    p = argparse.ArgumentParser(prog="scanner", description="Run a scanner session on stdin/stdout.")
    add_session_flags(p, spec_required=False)
    args = p.parse_args(argv)
    inp, out = _stdio()
    return run_session(spec, inp, out, args.end_marker, args.target)


def main(argv=None):
    p = argparse.ArgumentParser(prog="clf-scan", description="Run a scanner session on stdin/stdout.")
    add_session_flags(p)
    args = p.parse_args(argv)
    try:
        spec = load_spec_file(args.spec)
    except OSError as exc:
        print(f"error: cannot open {args.spec}: {exc.strerror}", file=sys.stderr)
        return 3
    except ClfError as exc:
        print(f"error: {args.spec}: {exc}", file=sys.stderr)
        return 65
    inp, out = _stdio()
    return run_session(spec, inp, out, args.end_marker, args.target)


if __name__ == "__main__":
    sys.exit(main())
