"""Random states for property checks."""

from __future__ import annotations

import random
from typing import List, Optional, Sequence, Tuple

from .state import ChrState
from .syntax import Program
from .terms import Atom, Compound, EquationSet, Term, Var, mklist

DEFAULT_CONSTANTS = ("a", "b", "c")


def random_list(rng: random.Random, constants: Sequence[str], max_len: int = 3,
                variables: Sequence[str] = (), tail_vars: Sequence[str] = ()) -> Term:
    items = [random_atom(rng, constants, variables) for _ in range(rng.randint(0, max_len))]
    tail: Term = Atom("[]")
    if tail_vars and rng.random() < 0.3:
        tail = Var(rng.choice(list(tail_vars)))
    return mklist(items, tail)


def random_atom(rng: random.Random, constants: Sequence[str], variables: Sequence[str] = ()) -> Term:
    if variables and rng.random() < 0.25:
        return Var(rng.choice(list(variables)))
    return Atom(rng.choice(list(constants)))


def random_arg(rng: random.Random, constants: Sequence[str], variables: Sequence[str] = ()) -> Term:
    if rng.random() < 0.3:
        return random_list(rng, constants, 2, variables)
    return random_atom(rng, constants, variables)


def random_constraint(rng: random.Random, functors: Sequence[Tuple[str, int]],
                      constants: Sequence[str], variables: Sequence[str] = ()) -> Term:
    f, n = rng.choice(list(functors))
    if n == 0:
        return Atom(f)
    return Compound(f, tuple(random_arg(rng, constants, variables) for _ in range(n)))


def random_state(rng: random.Random, functors: Sequence[Tuple[str, int]],
                 constants: Sequence[str] = DEFAULT_CONSTANTS, max_size: int = 4,
                 variables: Sequence[str] = (), global_prob: float = 0.5,
                 binding_prob: float = 0.0) -> ChrState:
    """A state over the given functors.  Each name in ``variables`` is made
    global with probability ``global_prob``; global variables are bound to a
    constant with probability ``binding_prob``."""
    goal = tuple(random_constraint(rng, functors, constants, variables)
                 for _ in range(rng.randint(0, max_size)))
    globals_ = frozenset(v for v in variables if rng.random() < global_prob)
    eqs = tuple((Var(v), Atom(rng.choice(list(constants))))
                for v in sorted(globals_) if rng.random() < binding_prob)
    return ChrState(goal, EquationSet(eqs), globals_)


def random_program_state(p: Program, rng: random.Random, max_size: int = 4,
                         variables: Sequence[str] = (), binding_prob: float = 0.0) -> ChrState:
    """A state over the program's constraint symbols and constants."""
    functors = sorted(p.functors)
    constants = sorted(set(p.constants()) | set(DEFAULT_CONSTANTS))
    return random_state(rng, functors, constants, max_size, variables, binding_prob=binding_prob)
