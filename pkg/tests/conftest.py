import itertools
import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from chrconf.specs import AnalysisConfig
from chrconf.state import ChrState
from chrconf.syntax import parse_program, parse_state
from chrconf.terms import Atom, Compound, EquationSet, Int, Var, mklist

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

MSET = "mset(L), item(A) <=> mset([A|L]).\n"


@pytest.fixture
def mset_program():
    return parse_program(MSET)


def S(text):
    return parse_state(text)


def fast_config(**kw):
    """Analysis config with fewer compatibility trials, for quick tests."""
    kw.setdefault("trials", 150)
    return AnalysisConfig(**kw)


# -- hypothesis strategies -------------------------------------------------------

VARS = ("X", "Y", "Z")
CONSTS = ("a", "b", "c")


def terms(max_leaves=6, variables=VARS):
    leaves = st.one_of(
        st.sampled_from([Atom(c) for c in CONSTS]),
        st.integers(0, 2).map(Int),
        st.sampled_from([Var(v) for v in variables]),
    )

    def extend(children):
        return st.one_of(
            st.tuples(st.sampled_from(["f", "g"]), st.lists(children, min_size=1, max_size=2))
              .map(lambda p: Compound(p[0], tuple(p[1]))),
            st.lists(children, max_size=2).map(mklist),
        )

    return st.recursive(leaves, extend, max_leaves=max_leaves)


def ground_terms():
    return st.recursive(
        st.sampled_from([Atom(c) for c in CONSTS]),
        lambda ch: st.tuples(st.sampled_from(["f", "g"]), st.lists(ch, min_size=1, max_size=2))
                     .map(lambda p: Compound(p[0], tuple(p[1]))),
        max_leaves=4)


def constraints(variables=VARS):
    arg = terms(3, variables)
    return st.one_of(
        st.just(Atom("r")),
        arg.map(lambda t: Compound("p", (t,))),
        st.tuples(arg, arg).map(lambda ts: Compound("q", ts)),
    )


@st.composite
def states(draw, max_goal=3, variables=VARS, bindings=True):
    goal = tuple(draw(st.lists(constraints(variables), max_size=max_goal)))
    globals_ = frozenset(draw(st.sets(st.sampled_from(variables))))
    eqs = ()
    if bindings and variables:
        eqs = tuple(draw(st.lists(st.tuples(st.sampled_from([Var(v) for v in variables]),
                                            terms(3, variables)), max_size=2)))
    return ChrState(goal, EquationSet(eqs), globals_)


@st.composite
def renamed_variant(draw, s):
    """An ≡-equal presentation: locals renamed, goal shuffled."""
    locals_ = sorted(s.local_vars())
    new = draw(st.permutations([f"L{i}" for i in range(len(locals_))]))
    mapping = dict(zip(locals_, new))
    from chrconf.terms import rename
    goal = [rename(c, mapping) for c in s.goal]
    goal = draw(st.permutations(goal))
    eqs = [(rename(a, mapping), rename(b, mapping)) for a, b in s.builtins.equations]
    eqs = draw(st.permutations(eqs))
    # orient some equations the other way round
    flips = draw(st.lists(st.booleans(), min_size=len(eqs), max_size=len(eqs)))
    eqs = tuple((b, a) if f else (a, b) for (a, b), f in zip(eqs, flips))
    return ChrState(tuple(goal), EquationSet(eqs, s.builtins.inconsistent), s.globals)


def ground_goals(functors, consts=CONSTS, max_size=3, list_args=()):
    """All ground goals up to ``max_size`` over the given functors."""
    atoms = []
    lists = [mklist([Atom(x) for x in xs]) for n in range(2) for xs in itertools.product(consts, repeat=n)]
    for f, n in functors:
        if n == 0:
            atoms.append(Atom(f))
            continue
        pools = [lists if (f, i) in list_args else [Atom(c) for c in consts] for i in range(n)]
        atoms.extend(Compound(f, args) for args in itertools.product(*pools))
    for size in range(max_size + 1):
        yield from itertools.combinations_with_replacement(atoms, size)


# -- acceptance summary -----------------------------------------------------------

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
