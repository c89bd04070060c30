"""Command-line front end: ``chrconf check | run | compat``."""

from __future__ import annotations

import argparse
import sys
import time
import warnings
from dataclasses import replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from . import report
from .checker import CONFLUENT, NOT_CONFLUENT, confluence_verdict
from .engine import explore
from .equivalence import compat_report
from .specs import AnalysisConfig, conjoin
from .syntax import ArityWarning, ConfigError, ParseError, parse_config, parse_equivalence, parse_invariant, parse_program, parse_state

EXIT_CONFLUENT, EXIT_NOT_CONFLUENT, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3

VERDICT_EXIT = {CONFLUENT: EXIT_CONFLUENT, NOT_CONFLUENT: EXIT_NOT_CONFLUENT, "unknown": EXIT_UNKNOWN}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--invariant", action="append", default=[], metavar="SPEC",
                        help='e.g. "functor_count mset/1 max 1" (repeatable; conjoined)')
    common.add_argument("--equiv", action="append", default=[], metavar="SPEC",
                        help='e.g. "list_perm mset/1 arg 1"')
    common.add_argument("--config", metavar="FILE", help="directive file applied before flags")
    common.add_argument("--bound", type=int, help="derivation bound per branch (default 1000)")
    common.add_argument("--budget", type=int, help="class-representative budget (default 64)")
    common.add_argument("--trials", type=int, help="random trials per compatibility check (default 1000)")
    common.add_argument("--seed", type=int, help="seed for randomized checks (default 0)")
    common.add_argument("--assume-terminating", action="store_true",
                        help="assume the program terminates on invariant states")
    common.add_argument("--json", metavar="PATH", help="write the JSON report to PATH ('-' for stdout)")
    common.add_argument("--timings", action="store_true", help="include per-phase timings in JSON")

    parser = _Parser(prog="chrconf", description="Confluence modulo equivalence for CHR programs.")
    sub = parser.add_subparsers(dest="command", required=True)
    check = sub.add_parser("check", parents=[common], help="analyse a program")
    check.add_argument("program")
    check.add_argument("--obligations", choices=("strict", "warn"), default="strict",
                       help="exit status when only symbolic obligations remain")
    run = sub.add_parser("run", parents=[common], help="list the final states of a query")
    run.add_argument("program")
    run.add_argument("state", help='e.g. "item(a), item(b), mset([])"')
    sub.add_parser("compat", parents=[common], help="check equivalence compatibility")
    return parser


def _config(args) -> AnalysisConfig:
    cfg = AnalysisConfig()
    if args.config:
        cfg = parse_config(_read(args.config), cfg)
    if args.invariant:
        cfg = replace(cfg, invariant=conjoin([parse_invariant(t) for t in args.invariant]))
    if len(args.equiv) > 1 and args.command != "compat":
        raise UsageError("only one --equiv may be given to this command")
    if args.equiv:
        cfg = replace(cfg, equivalence=parse_equivalence(args.equiv[0]))
    for flag, name in (("bound", "derivation_bound"), ("budget", "representative_budget"),
                       ("trials", "trials"), ("seed", "seed")):
        value = getattr(args, flag)
        if value is not None:
            cfg = replace(cfg, **{name: value})
    if args.assume_terminating:
        cfg = replace(cfg, termination_assumed=True)
    return cfg


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from None


def _emit_json(path: Optional[str], doc: dict, out) -> None:
    if not path:
        return
    text = report.dumps(doc)
    if path == "-":
        out.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def cmd_check(args, out) -> int:
    text = _read(args.program)
    timings: Dict[str, float] = {}
    t = time.perf_counter()
    program = parse_program(text)
    timings["parse"] = time.perf_counter() - t
    cfg = _config(args)
    t = time.perf_counter()
    r = confluence_verdict(program, cfg)
    timings["analysis"] = time.perf_counter() - t
    if args.json != "-":
        out.write(report.check_text(r))
    _emit_json(args.json, report.check_document(r, text, timings if args.timings else None), out)
    if r.confluent_with_obligations and args.obligations == "warn":
        print("warning: confluent only modulo the listed obligations", file=sys.stderr)
        return EXIT_CONFLUENT
    return VERDICT_EXIT[r.verdict]


def cmd_run(args, out) -> int:
    text = _read(args.program)
    program = parse_program(text)
    try:
        start = parse_state(args.state)
    except ParseError as e:
        raise UsageError(f"cannot parse state: {e}") from None
    cfg = _config(args)
    t = time.perf_counter()
    ex = explore(program, start, cfg.derivation_bound, cfg.max_states)
    elapsed = {"run": time.perf_counter() - t}
    finals = [c.state for c in ex.finals]
    if args.json != "-":
        out.write(report.run_text(finals, ex.exhausted, cfg.derivation_bound))
    _emit_json(args.json, report.run_document(start, finals, ex.exhausted, cfg.derivation_bound,
                                              text, elapsed if args.timings else None), out)
    return EXIT_UNKNOWN if ex.exhausted else 0


def cmd_compat(args, out) -> int:
    cfg = _config(args)
    specs = [parse_equivalence(t) for t in args.equiv] or [cfg.equivalence]
    inv = cfg.invariant if args.invariant or args.config else None
    results = []
    t = time.perf_counter()
    for spec in specs:
        c = compat_report(spec, inv, cfg.trials, cfg.seed)
        results.append((spec.directive(), c))
        if args.json != "-":
            out.write(f"equivalence: {spec.directive()}\n")
            out.write(report.compat_text(c))
    elapsed = {"compat": time.perf_counter() - t}
    _emit_json(args.json, report.compat_document(results, cfg, elapsed if args.timings else None), out)
    return 0 if all(c.ok for _, c in results) else 1


def main(argv: Optional[Sequence[str]] = None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", ArityWarning)
            args = parser.parse_args(argv)
            handler = {"check": cmd_check, "run": cmd_run, "compat": cmd_compat}[args.command]
            code = handler(args, out)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        return code
    except UsageError as e:
        print(f"chrconf: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as e:
        if isinstance(e, ConfigError) and not e.line:
            print(f"chrconf: error: {e}", file=sys.stderr)
            return EXIT_USAGE
        if isinstance(e, ConfigError):
            where = args.config
        else:
            where = getattr(args, "program", None) or "<input>"
        print(f"{where}:{e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"chrconf: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
