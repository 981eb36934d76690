"""Parse a source file end to end: scan it (in process or through a scanner process) and parse the tokens."""

from __future__ import annotations

import os
import subprocess

from .errors import FileOpenError, ParseError, ProtocolError, ScannerLaunchError
from .lexer import LexSpec, scan
from .runtime import ParseResult, parse_tokens
from .session import read_source
from .tokens import END_TOKENS, decode_token


def _check_readable(path):
    try:
        with open(path, "rb"):
            pass
    except OSError as exc:
        raise FileOpenError(path, exc.strerror or str(exc)) from None
    if os.path.isdir(path):
        raise FileOpenError(path, "is a directory")


def scan_file_in_process(spec: LexSpec, path):
    try:
        text = read_source(path)
    except (OSError, UnicodeDecodeError) as exc:
        raise FileOpenError(path, getattr(exc, "strerror", None) or str(exc)) from None
    return scan(spec, text)


def scan_file_subprocess(command, path, timeout=None):
    """Ask a scanner process for the tokens of ``path`` over the line protocol."""
    argv = [command] if isinstance(command, (str, os.PathLike)) else list(command)
    if "\n" in str(path):
        raise FileOpenError(path, "newline in file name")
    try:
        proc = subprocess.Popen(argv, stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.PIPE)
    except OSError as exc:
        raise ScannerLaunchError(f"cannot start scanner {argv[0]}: {exc.strerror or exc}") from None
    tokens = []
    try:
        proc.stdin.write(b"[TARGET]debug\n")
        proc.stdin.write(b"[PARSEFILE]" + os.fsencode(os.path.abspath(path)) + b"\n")
        proc.stdin.flush()
        while True:
            raw = proc.stdout.readline()
            if not raw:
                err = proc.stderr.read().decode("utf-8", "replace").strip()
                raise ProtocolError("scanner closed its output before [ENDTOKENS]" + (f": {err}" if err else ""))
            line = raw.decode("utf-8")
            if line.endswith("\n"):
                line = line[:-1]
            if line == END_TOKENS:
                break
            tokens.append(decode_token(line))
        proc.stdin.write(b"[QUIT]\n")
        proc.stdin.close()
        proc.wait(timeout=timeout)
    except BrokenPipeError:
        raise ProtocolError("scanner process exited unexpectedly") from None
    finally:
        if proc.poll() is None:
            proc.kill()
            proc.wait()
        proc.stdout.close()
        proc.stderr.close()
    return tokens


def clf_parse(scanner, cg, path, keep_comments=False) -> ParseResult:
    """Parse the file at ``path``.

    ``scanner`` is either a loaded :class:`LexSpec` (scan in process) or a
    scanner command: an executable path or an argv list.
    """
    _check_readable(path)
    if isinstance(scanner, LexSpec):
        tokens = scan_file_in_process(scanner, path)
    else:
        tokens = scan_file_subprocess(scanner, path)
    try:
        return parse_tokens(cg, tokens, keep_comments)
    except ParseError as exc:
        raise exc.with_filename(str(path)) from None
