"""``clf`` command line: scanner sessions, grammar compilation and parsing.

Exit status: 0 ok, 2 parse error, 3 I/O or protocol error, 64 usage error,
65 scanner spec or grammar error.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .compiler import wrap_entry
from .driver import clf_parse
from .errors import ClfError, FileOpenError, GrammarError, ParseError, ProtocolError, SpecError
from .grammar import load_grammar_file
from .lexer import load_spec_file
from .session import _stdio, add_session_flags, build_scanner, run_session
from .terms import print_ref, print_term, quote_string
from .transform import emit_dcg, transform

EXIT_OK, EXIT_PARSE, EXIT_IO, EXIT_USAGE, EXIT_DATA = 0, 2, 3, 64, 65

EPILOG = """\
subcommands:
  lex --spec FILE [--end-marker STR] [--target MODE]
      run a scanner session on stdin/stdout
  compile-grammar FILE.csp [--emit-dcg OUT] [--entry NT]
      check and transform a grammar; optionally write the listing
  emit-dcg FILE.csp
      print the transformed grammar in arrow style
  parse (--spec FILE | --scanner PATH) --grammar FILE.csp --entry NT [--keep-comments] FILE
      parse FILE; print the term, then the reference tree
  build-scanner --spec FILE -o OUT
      write an executable stand-alone scanner for the spec

exit status: 0 ok, 2 parse error, 3 I/O or protocol error,
64 usage error, 65 spec or grammar error
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise UsageError(message)


def build_parser():
    p = _Parser(
        prog="clf",
        description="Scanner generator, CS grammar compiler and parser runtime.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("--version", action="version", version=f"clf {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)

    lex = sub.add_parser("lex", help="run a scanner session on stdin/stdout")
    add_session_flags(lex)

    cg = sub.add_parser("compile-grammar", help="check and transform a grammar")
    cg.add_argument("grammar", metavar="FILE.csp")
    cg.add_argument("--emit-dcg", metavar="OUT", help="write the transformed listing ('-' for stdout)")
    cg.add_argument("--entry", metavar="NT", help="also compile with this entry nonterminal")

    ed = sub.add_parser("emit-dcg", help="print the transformed grammar")
    ed.add_argument("grammar", metavar="FILE.csp")

    pa = sub.add_parser("parse", help="parse a source file")
    src = pa.add_mutually_exclusive_group(required=True)
    src.add_argument("--spec", metavar="FILE", help="scanner specification (scan in process)")
    src.add_argument("--scanner", metavar="PATH", help="scanner executable (scan in a separate process)")
    pa.add_argument("--grammar", required=True, metavar="FILE.csp")
    pa.add_argument("--entry", required=True, metavar="NT")
    pa.add_argument("--keep-comments", action="store_true", help="also print collected comments")
    pa.add_argument("file", metavar="FILE")

    bs = sub.add_parser("build-scanner", help="write a stand-alone scanner executable")
    bs.add_argument("--spec", required=True, metavar="FILE")
    bs.add_argument("-o", "--output", required=True, metavar="OUT")
    return p


def _load_grammar(path):
    try:
        return load_grammar_file(path)
    except OSError as exc:
        raise FileOpenError(path, exc.strerror or str(exc)) from None
    except GrammarError as exc:
        raise GrammarError(f"{path}: {exc}") from None


def _compile(g, path, entry):
    try:
        return wrap_entry(g, entry)
    except GrammarError as exc:
        raise GrammarError(f"{path}: {exc}") from None


def _load_spec(path):
    try:
        return load_spec_file(path)
    except OSError as exc:
        raise FileOpenError(path, exc.strerror or str(exc)) from None
    except SpecError as exc:
        raise SpecError(f"{path}: {exc}") from None


def _cmd_lex(args, out):
    spec = _load_spec(args.spec)
    inp, stdout = _stdio()
    return run_session(spec, inp, stdout if out is None else out, args.end_marker, args.target)


def _cmd_compile(args, out):
    g = _load_grammar(args.grammar)
    try:
        tg = transform(g)
    except GrammarError as exc:
        raise GrammarError(f"{args.grammar}: {exc}") from None
    if args.entry:
        _compile(g, args.grammar, args.entry)
    listing = emit_dcg(tg)
    if args.emit_dcg == "-":
        out.write(listing)
    elif args.emit_dcg:
        try:
            with open(args.emit_dcg, "w", encoding="utf-8") as f:
                f.write(listing)
        except OSError as exc:
            raise FileOpenError(args.emit_dcg, exc.strerror or str(exc)) from None
    nts = len(tg.nonterminals())
    print(f"{args.grammar}: {nts} nonterminals, {len(tg.clauses)} clauses", file=sys.stderr)
    return EXIT_OK


def _cmd_emit(args, out):
    g = _load_grammar(args.grammar)
    try:
        out.write(emit_dcg(transform(g)))
    except GrammarError as exc:
        raise GrammarError(f"{args.grammar}: {exc}") from None
    return EXIT_OK


def _cmd_parse(args, out):
    g = _load_grammar(args.grammar)
    cg = _compile(g, args.grammar, args.entry)
    scanner = _load_spec(args.spec) if args.spec else args.scanner
    result = clf_parse(scanner, cg, args.file, keep_comments=args.keep_comments)
    out.write(print_term(result.term) + "\n")
    out.write(print_ref(result.refs) + "\n")
    for line, text in result.comments:
        out.write(f"comment({line},{quote_string(text)})\n")
    return EXIT_OK


def _cmd_build(args, out):
    _load_spec(args.spec)
    try:
        build_scanner(args.spec, args.output)
    except OSError as exc:
        raise FileOpenError(args.output, exc.strerror or str(exc)) from None
    return EXIT_OK


COMMANDS = {
    "lex": _cmd_lex,
    "compile-grammar": _cmd_compile,
    "emit-dcg": _cmd_emit,
    "parse": _cmd_parse,
    "build-scanner": _cmd_build,
}


def main(argv=None, out=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    if args.command is None:
        parser.print_usage(sys.stderr)
        print("clf: error: a subcommand is required", file=sys.stderr)
        return EXIT_USAGE
    stdout = out if out is not None else sys.stdout
    try:
        status = COMMANDS[args.command](args, out if args.command == "lex" else stdout)
        stdout.flush()
        return status
    except ParseError as exc:
        print(f"error: {exc.describe()}", file=sys.stderr)
        return EXIT_PARSE
    except (FileOpenError, ProtocolError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SpecError, GrammarError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ClfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
