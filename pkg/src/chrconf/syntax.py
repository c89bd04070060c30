"""Parsers and printers for CHR programs, states and analysis configuration.

Program syntax::

    name @ Hk \\ Hr <=> Guard | Body.
    Hr <=> Guard | Body.
    Hk ==> Guard | Body.

``Guard |`` is optional.  Guards may only contain ``true`` and ``=``;
bodies may mix CHR constraints with ``=`` and ``true``.  ``%`` starts a
line comment.  State syntax is ``goal ; builtins ; [G1,...]``.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

from . import specs
from .terms import (
    NIL,
    TRUE,
    Atom,
    Compound,
    EquationSet,
    Int,
    Term,
    Var,
    constants_of,
    format_equations,
    format_term,
    functor_of,
    mklist,
    vars_in,
)
from .state import ChrState


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{message}")


class ConfigError(ParseError):
    pass


class ArityWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Rule:
    name: str
    kept: Tuple[Term, ...]
    removed: Tuple[Term, ...]
    guard: EquationSet = TRUE
    body: Tuple[Term, ...] = ()
    body_builtins: EquationSet = TRUE
    named: bool = field(default=True, compare=False)
    line: int = field(default=0, compare=False)

    def __post_init__(self):
        if not self.kept and not self.removed:
            raise ValueError("rule needs at least one head constraint")

    @property
    def kind(self) -> str:
        if not self.removed:
            return "propagation"
        if not self.kept:
            return "simplification"
        return "simpagation"

    @property
    def heads(self) -> Tuple[Term, ...]:
        return self.kept + self.removed

    def head_guard_vars(self) -> set:
        return vars_in(self.heads) | self.guard.variables()

    def variables(self) -> set:
        return self.head_guard_vars() | vars_in(self.body) | self.body_builtins.variables()

    def __str__(self) -> str:
        return format_rule(self)


@dataclass(frozen=True)
class Program:
    rules: Tuple[Rule, ...] = ()
    functors: frozenset = frozenset()
    warnings: Tuple[str, ...] = field(default=(), compare=False)

    def rule(self, name: str) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def constants(self) -> List[str]:
        """Constant symbols (atoms in argument positions), sorted."""
        args = [a for r in self.rules
                for c in r.heads + r.body if isinstance(c, Compound) for a in c.args]
        args += [t for r in self.rules for eq in r.guard.equations + r.body_builtins.equations for t in eq]
        return sorted(constants_of(args))


# -- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<arrow><=>|==>)
  | (?P<var>[A-Z_][A-Za-z0-9_]*'*)
  | (?P<atom>[a-z][A-Za-z0-9_]*)
  | (?P<int>-?\d+)
  | (?P<punct>[()\[\],|.@\\=;/])
""", re.VERBOSE)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> List[Token]:
    out = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            out.append(Token(kind if kind != "punct" else chunk, chunk, line, pos - line_start + 1))
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1))
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.anon = 0
        self.names = {t.text for t in self.toks if t.kind == "var"}

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def error(self, msg: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def eat(self, kind: str) -> Token:
        tok = self.tok
        if tok.kind != kind:
            found = tok.text or "end of input"
            raise self.error(f"expected {kind!r}, found {found!r}")
        self.i += 1
        return tok

    def at(self, kind: str) -> bool:
        return self.tok.kind == kind

    # terms
    def term(self) -> Term:
        tok = self.tok
        if tok.kind == "var":
            self.i += 1
            if tok.text == "_":
                return self.anonymous()
            return Var(tok.text)
        if tok.kind == "int":
            self.i += 1
            return Int(int(tok.text))
        if tok.kind == "atom":
            self.i += 1
            if self.at("("):
                self.i += 1
                args = [self.term()]
                while self.at(","):
                    self.i += 1
                    args.append(self.term())
                self.eat(")")
                return Compound(tok.text, tuple(args))
            return Atom(tok.text)
        if tok.kind == "[":
            self.i += 1
            if self.at("]"):
                self.i += 1
                return NIL
            items = [self.term()]
            while self.at(","):
                self.i += 1
                items.append(self.term())
            tail: Term = NIL
            if self.at("|"):
                self.i += 1
                tail = self.term()
            self.eat("]")
            return mklist(items, tail)
        raise self.error(f"expected a term, found {tok.text or 'end of input'!r}")

    def anonymous(self) -> Var:
        while True:
            self.anon += 1
            name = f"_{self.anon}"
            if name not in self.names:
                self.names.add(name)
                return Var(name)

    # goals: list of constraints / equations / true
    def goal_item(self):
        tok = self.tok
        lhs = self.term()
        if self.at("="):
            self.i += 1
            rhs = self.term()
            return ("eq", (lhs, rhs), tok)
        if lhs == Atom("true"):
            return ("true", None, tok)
        if not isinstance(lhs, (Atom, Compound)) or lhs == NIL or (
                isinstance(lhs, Compound) and lhs.functor == "."):
            raise ParseError(f"{format_term(lhs)} is not a constraint", tok.line, tok.col)
        return ("chr", lhs, tok)

    def goal_list(self):
        items = [self.goal_item()]
        while self.at(","):
            self.i += 1
            items.append(self.goal_item())
        return items


def _heads(items, what: str) -> Tuple[Term, ...]:
    out = []
    for kind, value, tok in items:
        if kind != "chr":
            raise ParseError(f"{what} must be CHR constraints", tok.line, tok.col)
        out.append(value)
    return tuple(out)


def _guard(items) -> EquationSet:
    eqs = []
    for kind, value, tok in items:
        if kind == "chr":
            raise ParseError(f"{format_term(value)} is not allowed in a guard "
                             "(only true and =)", tok.line, tok.col)
        if kind == "eq":
            eqs.append(value)
    return EquationSet(tuple(eqs))


def _body(items) -> Tuple[Tuple[Term, ...], EquationSet]:
    chr_, eqs = [], []
    for kind, value, _ in items:
        if kind == "chr":
            chr_.append(value)
        elif kind == "eq":
            eqs.append(value)
    return tuple(chr_), EquationSet(tuple(eqs))


def _parse_rule(p: _Parser, index: int) -> Rule:
    start = p.tok
    name = None
    if p.at("atom") and p.peek().kind == "@":
        name = p.tok.text
        p.i += 2
    first = p.goal_list()
    kept: Tuple[Term, ...] = ()
    if p.at("\\"):
        p.i += 1
        kept = _heads(first, "kept heads")
        removed = _heads(p.goal_list(), "removed heads")
        arrow = p.eat("arrow")
        if arrow.text != "<=>":
            raise p.error("simpagation rules use <=>", arrow)
    else:
        arrow = p.eat("arrow")
        heads = _heads(first, "rule heads")
        if arrow.text == "==>":
            kept, removed = heads, ()
        else:
            removed = heads
    second = p.goal_list()
    guard = TRUE
    if p.at("|"):
        p.i += 1
        guard = _guard(second)
        second = p.goal_list()
    body, body_eqs = _body(second)
    p.eat(".")
    return Rule(name or f"r{index}", kept, removed, guard, body, body_eqs,
                named=name is not None, line=start.line)


def _check_arities(rules) -> List[str]:
    seen: Dict[str, int] = {}
    out = []
    for r in rules:
        for c in r.heads + r.body:
            f, n = functor_of(c)
            if f in seen and seen[f] != n:
                msg = f"line {r.line}: {f} used with arities {seen[f]} and {n}"
                if msg not in out:
                    out.append(msg)
            seen.setdefault(f, n)
    return out


def parse_program(text: str) -> Program:
    p = _Parser(text)
    rules: List[Rule] = []
    while not p.at("eof"):
        p.anon = 0
        rules.append(_parse_rule(p, len(rules) + 1))
    names = [r.name for r in rules]
    for i, r in enumerate(rules):
        if r.name in names[:i]:
            raise ParseError(f"duplicate rule name {r.name!r}", r.line, 1)
    notes = _check_arities(rules)
    for msg in notes:
        warnings.warn(msg, ArityWarning, stacklevel=2)
    functors = frozenset(functor_of(c) for r in rules for c in r.heads + r.body)
    return Program(tuple(rules), functors, tuple(notes))


def parse_term(text: str) -> Term:
    p = _Parser(text)
    t = p.term()
    p.eat("eof")
    return t


def parse_state(text: str) -> ChrState:
    """Parse ``goal ; builtins ; [globals]``; trailing parts may be omitted."""
    p = _Parser(text)
    goal: List[Term] = []
    eqs: List = []
    inconsistent = False
    globals_: List[str] = []
    for kind, value, tok in p.goal_list():
        if kind == "eq":
            raise ParseError("equations belong in the builtin part", tok.line, tok.col)
        if kind == "chr":
            goal.append(value)
    if p.at(";"):
        p.i += 1
        if p.at("atom") and p.tok.text == "false":
            p.i += 1
            inconsistent = True
        else:
            for kind, value, tok in p.goal_list():
                if kind == "chr":
                    raise ParseError(f"{format_term(value)} is not a builtin constraint", tok.line, tok.col)
                if kind == "eq":
                    eqs.append(value)
        if p.at(";"):
            p.i += 1
            p.eat("[")
            if not p.at("]"):
                globals_.append(p.eat("var").text)
                while p.at(","):
                    p.i += 1
                    globals_.append(p.eat("var").text)
            p.eat("]")
    p.eat("eof")
    return ChrState(tuple(goal), EquationSet(tuple(eqs), inconsistent), frozenset(globals_))


# -- configuration -----------------------------------------------------------

def _functor_arity(word: str, where: int) -> Tuple[str, int]:
    m = re.fullmatch(r"([a-z][A-Za-z0-9_]*)/(\d+)", word)
    if not m:
        raise ConfigError(f"expected functor/arity, got {word!r}", where)
    return m.group(1), int(m.group(2))


def _int(word: str, where: int) -> int:
    try:
        return int(word)
    except ValueError:
        raise ConfigError(f"expected an integer, got {word!r}", where) from None


def parse_invariant(text: str, line: int = 0) -> specs.InvariantSpec:
    words = text.split()
    try:
        if words == ["true"]:
            return specs.AlwaysTrue()
        if len(words) == 4 and words[0] == "functor_count" and words[2] == "max":
            f, n = _functor_arity(words[1], line)
            return specs.FunctorCount(f, n, _int(words[3], line))
        if len(words) == 2 and words[0] == "ground":
            f, n = _functor_arity(words[1], line)
            return specs.Ground(f, n)
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e), line) from None
    raise ConfigError(f"unknown invariant {text.strip()!r}", line)


def parse_equivalence(text: str, line: int = 0) -> specs.EquivSpec:
    words = text.split()
    try:
        if words == ["identity"]:
            return specs.Identity()
        if len(words) == 4 and words[0] == "list_perm" and words[2] == "arg":
            f, n = _functor_arity(words[1], line)
            return specs.ListPerm(f, n, _int(words[3], line))
        if len(words) == 4 and words[0] == "count_partition" and words[2] == "threshold":
            f, n = _functor_arity(words[1], line)
            return specs.CountPartition(f, n, _int(words[3], line))
        if len(words) == 3 and words[0] == "pair_collapse":
            for w in words[1:]:
                if not re.fullmatch(r"[a-z][A-Za-z0-9_]*", w):
                    raise ConfigError(f"expected a constraint name, got {w!r}", line)
            return specs.PairCollapse(words[1], words[2])
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e), line) from None
    raise ConfigError(f"unknown equivalence {text.strip()!r}", line)


_INT_DIRECTIVES = {
    "bound": "derivation_bound",
    "budget": "representative_budget",
    "trials": "trials",
    "seed": "seed",
    "sweep": "sweep_length",
    "max_states": "max_states",
}


def parse_config(text: str, base: Optional[specs.AnalysisConfig] = None) -> specs.AnalysisConfig:
    """One directive per line: ``invariant ...``, ``equiv ...``, ``bound N``,
    ``budget N``, ``trials N``, ``seed N``, ``assume_terminating``.
    Multiple invariants conjoin."""
    cfg = base or specs.AnalysisConfig()
    invariants = []
    equiv = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("%", 1)[0].split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        if head == "invariant":
            invariants.append(parse_invariant(rest, lineno))
        elif head == "equiv":
            if equiv is not None:
                raise ConfigError("only one equivalence relation may be configured", lineno)
            equiv = parse_equivalence(rest, lineno)
        elif head == "assume_terminating" and not rest:
            cfg = replace(cfg, termination_assumed=True)
        elif head in _INT_DIRECTIVES:
            try:
                cfg = replace(cfg, **{_INT_DIRECTIVES[head]: _int(rest, lineno)})
            except ValueError as e:
                if isinstance(e, ConfigError):
                    raise
                raise ConfigError(str(e), lineno) from None
        else:
            raise ConfigError(f"unknown directive {head!r}", lineno)
    if invariants:
        cfg = replace(cfg, invariant=specs.conjoin(invariants))
    if equiv is not None:
        cfg = replace(cfg, equivalence=equiv)
    return cfg


# -- printing ----------------------------------------------------------------

def format_rule(r: Rule) -> str:
    prefix = f"{r.name} @ " if r.named else ""
    heads = lambda cs: ", ".join(format_term(c) for c in cs)
    if r.kind == "propagation":
        lhs, arrow = heads(r.kept), "==>"
    elif r.kind == "simplification":
        lhs, arrow = heads(r.removed), "<=>"
    else:
        lhs, arrow = f"{heads(r.kept)} \\ {heads(r.removed)}", "<=>"
    guard = f"{format_equations(r.guard.equations)} | " if r.guard.equations else ""
    parts = [format_term(c) for c in r.body]
    if r.body_builtins.equations:
        parts.append(format_equations(r.body_builtins.equations))
    body = ", ".join(parts) or "true"
    return f"{prefix}{lhs} {arrow} {guard}{body}."


def format_program(p: Program) -> str:
    return "\n".join(format_rule(r) for r in p.rules) + ("\n" if p.rules else "")
