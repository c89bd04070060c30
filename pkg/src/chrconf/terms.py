"""Herbrand terms, substitutions, unification and matching.

This is the constraint theory of the toolkit: built-in constraints are
equations between finite first-order terms, decided by syntactic
unification with occurs check.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple, Union


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True)
class Int:
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Compound:
    functor: str
    args: Tuple["Term", ...]

    def __post_init__(self):
        if not self.functor:
            raise ValueError("empty functor name")
        if not self.args:
            raise ValueError(f"compound {self.functor!r} needs at least one argument")

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self) -> str:
        return format_term(self)


Term = Union[Var, Atom, Int, Compound]
Substitution = Dict[str, Term]
Equation = Tuple[Term, Term]

NIL = Atom("[]")
CONS = "."


@dataclass(frozen=True)
class EquationSet:
    """A conjunction of equations; ``inconsistent`` marks the constraint false."""

    equations: Tuple[Equation, ...] = ()
    inconsistent: bool = False

    @classmethod
    def of(cls, equations: Iterable[Equation]) -> "EquationSet":
        return cls(tuple(equations))

    def __and__(self, other: "EquationSet") -> "EquationSet":
        return EquationSet(self.equations + other.equations,
                           self.inconsistent or other.inconsistent)

    def __len__(self) -> int:
        return len(self.equations)

    def variables(self) -> set:
        out: set = set()
        for lhs, rhs in self.equations:
            out |= term_vars(lhs)
            out |= term_vars(rhs)
        return out


TRUE = EquationSet()
FALSE = EquationSet((), inconsistent=True)


def mklist(items: Sequence[Term], tail: Term = NIL) -> Term:
    out = tail
    for item in reversed(items):
        out = Compound(CONS, (item, out))
    return out


def list_parts(t: Term) -> Tuple[list, Term]:
    """Split a (possibly partial) list into its explicit elements and its tail."""
    items = []
    while isinstance(t, Compound) and t.functor == CONS and len(t.args) == 2:
        items.append(t.args[0])
        t = t.args[1]
    return items, t


def is_list_cell(t: Term) -> bool:
    return isinstance(t, Compound) and t.functor == CONS and len(t.args) == 2


def functor_of(t: Term) -> Tuple[str, int]:
    if isinstance(t, Compound):
        return t.functor, len(t.args)
    if isinstance(t, Atom):
        return t.name, 0
    raise TypeError(f"{t!r} has no functor")


def term_vars(t: Term) -> set:
    out: set = set()
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            out.add(x.name)
        elif isinstance(x, Compound):
            stack.extend(x.args)
    return out


def vars_in(terms: Iterable[Term]) -> set:
    out: set = set()
    for t in terms:
        out |= term_vars(t)
    return out


def vars_in_order(terms: Iterable[Term]) -> list:
    """Variable names in first-occurrence order (left to right, depth first)."""
    seen: Dict[str, None] = {}

    def walk(x):
        if isinstance(x, Var):
            seen.setdefault(x.name, None)
        elif isinstance(x, Compound):
            for a in x.args:
                walk(a)

    for t in terms:
        walk(t)
    return list(seen)


def is_ground(t: Term) -> bool:
    return not term_vars(t)


# -- fresh names -----------------------------------------------------------

_counter = itertools.count(1)
_counter_lock = threading.Lock()
FRESH_MARK = "~"


def base_name(name: str) -> str:
    return name.split(FRESH_MARK, 1)[0]


def fresh_name(name: str) -> str:
    # '~' cannot appear in parsed variable names, so fresh names never clash
    with _counter_lock:
        n = next(_counter)
    return f"{base_name(name)}{FRESH_MARK}{n}"


def fresh_renaming(names: Iterable[str]) -> Substitution:
    return {n: Var(fresh_name(n)) for n in sorted(names)}


# -- substitutions ---------------------------------------------------------

def substitute(t: Term, theta: Mapping[str, Term]) -> Term:
    """Apply ``theta`` to ``t``, following chains of bindings."""
    if not theta:
        return t
    if isinstance(t, Var):
        bound = theta.get(t.name)
        if bound is None:
            return t
        return substitute(bound, theta) if bound != t else t
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(substitute(a, theta) for a in t.args))
    return t


def compose(first: Mapping[str, Term], second: Mapping[str, Term]) -> Substitution:
    """Substitution equivalent to applying ``first`` then ``second``."""
    out = {k: substitute(v, second) for k, v in first.items()}
    for k, v in second.items():
        out.setdefault(k, v)
    return {k: v for k, v in out.items() if v != Var(k)}


def resolve(theta: Mapping[str, Term]) -> Substitution:
    """Make a triangular substitution idempotent."""
    return {k: substitute(v, theta) for k, v in theta.items()}


def occurs(name: str, t: Term, theta: Mapping[str, Term]) -> bool:
    stack = [t]
    while stack:
        x = stack.pop()
        if isinstance(x, Var):
            if x.name == name:
                return True
            if x.name in theta:
                stack.append(theta[x.name])
        elif isinstance(x, Compound):
            stack.extend(x.args)
    return False


def _walk(t: Term, theta: Mapping[str, Term]) -> Term:
    while isinstance(t, Var) and t.name in theta:
        t = theta[t.name]
    return t


def _unify_into(pairs: list, theta: Substitution, rigid: frozenset,
                prefer: frozenset) -> bool:
    """Destructively extend ``theta`` (triangular form). Returns success.

    Variables in ``rigid`` are never bound.  In a variable-variable
    equation, a variable outside ``prefer`` is bound to one inside it;
    otherwise the lexicographically larger name is bound to the smaller.
    """
    while pairs:
        a, b = pairs.pop()
        a = _walk(a, theta)
        b = _walk(b, theta)
        if a == b:
            continue
        if isinstance(a, Var) and isinstance(b, Var):
            a_fixed, b_fixed = a.name in rigid, b.name in rigid
            if a_fixed and b_fixed:
                return False
            if a_fixed:
                theta[b.name] = a
            elif b_fixed:
                theta[a.name] = b
            else:
                a_pref, b_pref = a.name in prefer, b.name in prefer
                if a_pref != b_pref:
                    loser, winner = (b, a) if a_pref else (a, b)
                else:
                    loser, winner = (a, b) if a.name > b.name else (b, a)
                theta[loser.name] = winner
            continue
        if isinstance(b, Var):
            a, b = b, a
        if isinstance(a, Var):
            if a.name in rigid or occurs(a.name, b, theta):
                return False
            theta[a.name] = b
            continue
        if isinstance(a, Compound) and isinstance(b, Compound):
            if a.functor != b.functor or len(a.args) != len(b.args):
                return False
            pairs.extend(zip(a.args, b.args))
            continue
        return False
    return True


def unify(t1: Term, t2: Term, theta: Optional[Mapping[str, Term]] = None) -> Optional[Substitution]:
    """Most general unifier of ``t1`` and ``t2`` (idempotent), or None."""
    out = dict(theta or {})
    if not _unify_into([(t1, t2)], out, frozenset(), frozenset()):
        return None
    return resolve(out)


def solve(eqs: Union[EquationSet, Iterable[Equation]], prefer: Iterable[str] = (),
          rigid: Iterable[str] = ()) -> Optional[Substitution]:
    """Solved form of a conjunction of equations, or None if unsatisfiable.

    ``prefer`` names variables that should survive variable-variable
    bindings (used to keep global variables as representatives).
    """
    if isinstance(eqs, EquationSet):
        if eqs.inconsistent:
            return None
        eqs = eqs.equations
    theta: Substitution = {}
    if not _unify_into(list(eqs), theta, frozenset(rigid), frozenset(prefer)):
        return None
    return resolve(theta)


def entails(store: Union[EquationSet, Iterable[Equation]],
            goal: Union[EquationSet, Iterable[Equation]],
            protected: Iterable[str]) -> Optional[Substitution]:
    """Guard entailment by matching.

    Returns a substitution binding only unprotected variables such that the
    instantiated goal follows from ``store``; None when that would require
    instantiating a protected variable or contradicts the store.
    """
    sigma = solve(store)
    if sigma is None:
        return None
    if isinstance(goal, EquationSet):
        if goal.inconsistent:
            return None
        goal = goal.equations
    pairs = [(substitute(a, sigma), substitute(b, sigma)) for a, b in goal]
    rigid = frozenset(protected) | frozenset(sigma)
    theta: Substitution = {}
    if not _unify_into(pairs, theta, rigid, frozenset()):
        return None
    return resolve(theta)


def match(pattern: Term, target: Term, theta: Optional[Mapping[str, Term]] = None) -> Optional[Substitution]:
    """One-way matching: extend ``theta`` so that pattern·theta == target.

    Only variables of ``pattern`` get bound; variables of ``target`` are
    treated as constants.
    """
    out = dict(theta or {})
    stack = [(pattern, target)]
    while stack:
        p, t = stack.pop()
        if isinstance(p, Var):
            bound = out.get(p.name)
            if bound is None:
                out[p.name] = t
            elif bound != t:
                return None
        elif isinstance(p, Compound):
            if not isinstance(t, Compound) or t.functor != p.functor or len(t.args) != len(p.args):
                return None
            stack.extend(zip(p.args, t.args))
        elif p != t:
            return None
    return out


# -- ordering and printing -------------------------------------------------

def order_key(t: Term, anonymous: frozenset = frozenset()):
    """Total order: numbers, then atoms/compounds by name, arity, arguments;
    variables last by name.  Variables in ``anonymous`` all compare equal."""
    if isinstance(t, Int):
        return (0, t.value)
    if isinstance(t, Atom):
        return (1, t.name, 0, ())
    if isinstance(t, Compound):
        return (1, t.functor, len(t.args), tuple(order_key(a, anonymous) for a in t.args))
    if t.name in anonymous:
        return (3,)
    return (2, t.name)


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Int):
        return str(t.value)
    if isinstance(t, Atom):
        return t.name
    if is_list_cell(t):
        items, tail = list_parts(t)
        body = ",".join(format_term(x) for x in items)
        if tail == NIL:
            return f"[{body}]"
        return f"[{body}|{format_term(tail)}]"
    return f"{t.functor}({','.join(format_term(a) for a in t.args)})"


def format_equations(eqs: Iterable[Equation]) -> str:
    parts = [f"{format_term(a)}={format_term(b)}" for a, b in eqs]
    return ", ".join(parts) if parts else "true"


def rename(t: Term, mapping: Mapping[str, str]) -> Term:
    if isinstance(t, Var):
        new = mapping.get(t.name)
        return Var(new) if new is not None else t
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(rename(a, mapping) for a in t.args))
    return t


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, Compound):
        for a in t.args:
            yield from subterms(a)


def constants_of(terms: Iterable[Term]) -> set:
    """Atom names (excluding the empty list) occurring anywhere in ``terms``."""
    out = set()
    for t in terms:
        for s in subterms(t):
            if isinstance(s, Atom) and s != NIL:
                out.add(s.name)
    return out
