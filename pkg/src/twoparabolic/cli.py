"""Command-line entry point.

Every subcommand writes JSON-lines to stdout (``--text`` for a human
format) and diagnostics to stderr.  Exit codes: 0 all checks pass, 1 a
verification failed, 2 a resource bound was reached, 3 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from math import gcd
from typing import Callable, Iterable, Sequence

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_BOUND = 2
EXIT_USAGE = 3

# p = 2 and p = 3 rows of the index table; p | r rows are expected to overflow
TABLE1_GRID = ((2, tuple(range(1, 8))), (3, tuple(range(1, 12))))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits 2 by default
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    subcommand: str
    args: argparse.Namespace
    fmt: str = "json"


class Output:
    """Serialized writer for result records."""

    def __init__(self, fmt: str, stream=None):
        self.fmt = fmt
        self.stream = stream if stream is not None else sys.stdout

    def record(self, obj) -> None:
        if self.fmt == "json":
            line = json.dumps(obj, separators=(", ", ": "))
        elif isinstance(obj, dict):
            line = "  ".join(f"{k}={_text(v)}" for k, v in obj.items())
        else:
            line = str(obj)
        self.stream.write(line + "\n")
        self.stream.flush()

    def scalar(self, value) -> None:
        self.stream.write(f"{value}\n")


def _text(v) -> str:
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_text(x) for x in v) + "]"
    if isinstance(v, dict):
        return "{" + ", ".join(f"{k}: {_text(x)}" for k, x in v.items()) + "}"
    return str(v)


def _positive(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {s}")
    return v


def build_parser() -> argparse.ArgumentParser:
    fmt = _Parser(add_help=False)
    g = fmt.add_mutually_exclusive_group()
    g.add_argument("--json", dest="fmt", action="store_const", const="json", help="JSON-lines output (default)")
    g.add_argument("--text", dest="fmt", action="store_const", const="text", help="human-readable output")
    fmt.set_defaults(fmt="json")

    parser = _Parser(prog="twoparabolic", description="Two-parabolic subgroups of SL2(Z[1/p]).")
    sub = parser.add_subparsers(dest="subcommand", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("jordan", parents=[fmt], help="Jordan totient J_2(r)")
    s.add_argument("r", type=_positive)

    s = sub.add_parser("order", parents=[fmt], help="multiplicative order of p mod r")
    s.add_argument("p", type=_positive)
    s.add_argument("r", type=_positive)

    s = sub.add_parser("verify-identities", parents=[fmt], help="check the identity catalog")
    s.add_argument("--p", type=_positive, action="append", help="prime (repeatable; default all p < 100)")
    s.add_argument("--r", type=_positive)
    s.add_argument("--k", type=_positive, action="append", help="k value (repeatable)")
    s.add_argument("--template", action="append", help="template name (repeatable)")

    s = sub.add_parser("index", parents=[fmt], help="coset enumeration for Delta_{r/p}")
    s.add_argument("--p", type=_positive, required=True)
    s.add_argument("--r", type=_positive, required=True)
    s.add_argument("--max-cosets", type=_positive, default=100_000)
    s.add_argument("--presentation", help="presentation file (default: built-in for p = 2, 3)")

    s = sub.add_parser("table1", parents=[fmt], help="index table for the built-in presentations")
    s.add_argument("--max-cosets", type=_positive, default=100_000)

    s = sub.add_parser("search", parents=[fmt], help="enumerate triangular relation words")
    s.add_argument("--p", type=_positive, required=True)
    s.add_argument("--r", type=_positive, required=True)
    s.add_argument("--max-syllables", type=_positive, default=7)
    s.add_argument("--max-exp", type=_positive, default=12)
    s.add_argument("--strong", action="store_true", help="only diagonals +-p^k with k != 0")
    s.add_argument("--workers", type=_positive, default=1)

    s = sub.add_parser("reduce", parents=[fmt], help="certificate word for a subgroup element")
    s.add_argument("--p", type=_positive, required=True)
    s.add_argument("--r", type=_positive, required=True)
    s.add_argument("--k", type=_positive, help="U = U_p^k (default: order of p mod r)")
    s.add_argument("--matrix", required=True, help='entries "a b c d" or "[[a,b],[c,d]]"')
    s.add_argument("--bound", type=_positive, default=10**5)
    s.add_argument("--method", choices=("auto", "pipeline", "padic"), default="auto")
    s.add_argument("--criterion", choices=("exact", "artin"), default="exact")

    s = sub.add_parser("pell", parents=[fmt], help="Pell sequence witnesses")
    s.add_argument("--count", type=_positive, default=6)

    sub.add_parser("diamond", parents=[fmt], help="the 3/2 diagonal identity and congruence facts")
    return parser


def _coprime(p: int, r: int) -> None:
    if gcd(p, r) != 1:
        raise UsageError(f"p = {p} and r = {r} must be coprime")


def _cmd_jordan(cfg: RunConfig, out: Output) -> int:
    from .numtheory import jordan2

    out.scalar(jordan2(cfg.args.r))
    return EXIT_OK


def _cmd_order(cfg: RunConfig, out: Output) -> int:
    from .numtheory import mult_order

    _coprime(cfg.args.p, cfg.args.r)
    out.scalar(mult_order(cfg.args.p, cfg.args.r))
    return EXIT_OK


def _cmd_verify(cfg: RunConfig, out: Output) -> int:
    from .identities import by_name, verify_all

    a = cfg.args
    try:
        templates = [by_name(n) for n in a.template] if a.template else None
    except KeyError as exc:
        raise UsageError(str(exc)) from None
    reports = verify_all(primes=a.p, k_values=a.k, templates=templates, r=a.r)
    status = EXIT_OK
    for rep in reports:
        out.record(rep.as_dict())
        if not rep.ok:
            status = EXIT_FAIL
    if not reports:
        sys.stderr.write("no applicable templates\n")
    return status


def _report_status(rep) -> int:
    if rep.index is None:
        return EXIT_BOUND
    return EXIT_FAIL if rep.equal_gamma1bar is False else EXIT_OK


def _cmd_index(cfg: RunConfig, out: Output) -> int:
    from .fpgroups import PresentationError, load_presentation, verify_conjecture

    a = cfg.args
    pres = None
    if a.presentation:
        try:
            with open(a.presentation, encoding="utf-8") as fh:
                pres = load_presentation(fh.read())
        except OSError as exc:
            raise UsageError(f"cannot read {a.presentation}: {exc.strerror}") from None
        except PresentationError as exc:
            raise UsageError(f"{a.presentation}: {exc}") from None
    elif a.p not in (2, 3):
        raise UsageError(f"no built-in presentation for p = {a.p}; pass --presentation")
    rep = verify_conjecture(a.p, a.r, a.max_cosets, pres)
    out.record(rep.as_dict())
    return _report_status(rep)


def _cmd_table1(cfg: RunConfig, out: Output) -> int:
    from .fpgroups import verify_conjecture

    status = EXIT_OK
    for p, rs in TABLE1_GRID:
        for r in rs:
            rep = verify_conjecture(p, r, cfg.args.max_cosets)
            out.record(rep.as_dict())
            code = _report_status(rep)
            if code == EXIT_BOUND and gcd(p, r) != 1:
                continue  # integer ratio r/p: infinite index, overflow expected
            status = max(status, code)
    return status


def _cmd_search(cfg: RunConfig, out: Output) -> int:
    from .search import RELATION, STRONG, SearchBounds, search_witness

    a = cfg.args
    _coprime(a.p, a.r)
    bounds = SearchBounds(a.max_syllables, a.max_exp, STRONG if a.strong else RELATION)
    for w in search_witness(a.p, a.r, bounds, workers=a.workers):
        out.record(w.as_dict())
    return EXIT_OK


def _cmd_reduce(cfg: RunConfig, out: Output) -> int:
    from .mat2 import Mat2
    from .reduction import ArtinSearchFailure, NotInSubgroupError, ReductionError, reduce_to_word

    a = cfg.args
    _coprime(a.p, a.r)
    try:
        m = Mat2.parse(a.matrix)
    except (ValueError, TypeError) as exc:
        raise UsageError(f"bad matrix {a.matrix!r}: {exc}") from None
    try:
        cert = reduce_to_word(m, a.p, a.r, a.k, bound=a.bound, method=a.method, criterion=a.criterion)
    except ArtinSearchFailure as exc:
        sys.stderr.write(f"bound reached: {exc}\n")
        out.record({"status": "bound-exceeded", "message": str(exc), "steps": [list(s) for s in exc.steps]})
        return EXIT_BOUND
    except NotInSubgroupError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_FAIL
    except ReductionError as exc:
        sys.stderr.write(f"reduction failed: {exc}\n")
        out.record({"status": "failed", "message": str(exc), "steps": [list(s) for s in exc.steps]})
        return EXIT_BOUND
    d = cert.as_dict()
    if cfg.fmt == "text":
        out.scalar(d["word"])
        for rule, params in cert.steps:
            out.scalar(f"  {rule} {_text(params)}")
    else:
        out.record(d)
    return EXIT_OK


def _cmd_pell(cfg: RunConfig, out: Output) -> int:
    from .search import pell_witness_check

    status = EXIT_OK
    for n in range(1, cfg.args.count + 1):
        chk = pell_witness_check(n)
        out.record(chk.as_dict())
        if not chk.ok:
            status = EXIT_FAIL
    return status


def _cmd_diamond(cfg: RunConfig, out: Output) -> int:
    from .search import diamond_checks

    status = EXIT_OK
    for rep in diamond_checks():
        out.record(rep.as_dict())
        if not rep.ok:
            status = EXIT_FAIL
    return status


COMMANDS: dict[str, Callable[[RunConfig, Output], int]] = {
    "jordan": _cmd_jordan,
    "order": _cmd_order,
    "verify-identities": _cmd_verify,
    "index": _cmd_index,
    "table1": _cmd_table1,
    "search": _cmd_search,
    "reduce": _cmd_reduce,
    "pell": _cmd_pell,
    "diamond": _cmd_diamond,
}


def parse(argv: Sequence[str] | None = None) -> RunConfig:
    ns = build_parser().parse_args(argv)
    return RunConfig(ns.subcommand, ns, ns.fmt)


def dispatch(cfg: RunConfig, stream=None) -> int:
    out = Output(cfg.fmt, stream)
    try:
        return COMMANDS[cfg.subcommand](cfg, out)
    except UsageError as exc:
        sys.stderr.write(f"twoparabolic {cfg.subcommand}: error: {exc}\n")
        return EXIT_USAGE


def main(argv: Iterable[str] | None = None) -> int:
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)  # certificate entries can be huge
    try:
        cfg = parse(list(argv) if argv is not None else None)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_USAGE
    return dispatch(cfg)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
