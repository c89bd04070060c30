from collections import Counter

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from chrconf.state import (
    EMPTY,
    FAILED,
    ChrState,
    StateClass,
    format_state,
    merge,
    normalize,
    state_to_json,
    states_equivalent,
    try_extension_remainder,
)
from chrconf.syntax import parse_state
from chrconf.terms import Atom, Compound, EquationSet, Var

from conftest import S, renamed_variant, states


# -- normalization ------------------------------------------------------------

def test_normalize_applies_global_binding():
    n = normalize(S("c(X) ; X=0 ; [X]"))
    assert format_state(n) == "c(0) ; X=0 ; [X]"


def test_normalize_empty_fixed_point():
    assert normalize(EMPTY) == EMPTY


def test_normalize_eliminates_local_chain():
    n = normalize(S("c(Y) ; Y=Z, Z=1 ; []"))
    assert format_state(n) == "c(1) ; true ; []"
    assert states_equivalent(n, S("c(Y) ; Y=Z, Z=1 ; []"))


def test_normalize_unsatisfiable_is_failed():
    assert normalize(S("c(X) ; X=a, X=b ; [X]")) == FAILED
    assert states_equivalent(S("p ; a=b"), S("q, r ; false ; [X]"))


def test_normalize_sorts_goal():
    assert normalize(S("q, p(b), p(a)")).goal == normalize(S("p(a), q, p(b)")).goal


# -- the five equivalence examples ---------------------------------------------

@pytest.mark.parametrize("left,right,expected", [
    ("c(X) ; X=0 ; [X]", "c(0) ; X=0 ; [X]", True),
    ("true ; X=Y, Y=0 ; []", "true ; X=0, Y=0 ; []", True),
    ("c(X) ; true ; []", "c(Y) ; true ; []", True),
    ("c(0) ; true ; [X]", "c(0) ; true ; []", True),
    ("c(X) ; true ; [X]", "c(Y) ; true ; [Y]", False),
])
def test_golden_equivalences(left, right, expected):
    assert states_equivalent(S(left), S(right)) is expected
    assert (StateClass(S(left)) == StateClass(S(right))) is expected


def test_local_global_distinction():
    assert not states_equivalent(S("c(X) ; true ; [X]"), S("c(X) ; true ; []"))


def test_shared_locals_must_be_consistent():
    assert states_equivalent(S("p(X), p(X)"), S("p(Y), p(Y)"))
    assert not states_equivalent(S("p(X), p(X)"), S("p(X), p(Y)"))


# -- merge ------------------------------------------------------------------------

def test_merge_shares_globals():
    m = merge(S("c(X) ; true ; [X]"), S("true ; X=1 ; [X]"), {"X"})
    assert states_equivalent(m, S("c(1)"))


def test_merge_renames_locals_apart():
    m = merge(S("c(X)"), S("true ; X=1 ; []"))
    assert states_equivalent(m, S("c(W)"))
    assert not states_equivalent(m, S("c(1)"))


def test_merge_identity_example():
    s = S("p(X, Y), q(Y) ; X=a ; [X]")
    assert states_equivalent(merge(s, EMPTY), s)


def test_merge_with_failed_fails():
    assert merge(S("p"), FAILED) == FAILED


# -- extension order ----------------------------------------------------------

def test_remainder_of_empty_base_is_whole():
    whole = S("p(X), q ; X=a ; [X]")
    assert states_equivalent(try_extension_remainder(EMPTY, whole), whole)


def test_remainder_fails_on_cardinality():
    assert try_extension_remainder(S("c, c"), S("c")) is None


def test_remainder_with_variable_base():
    # the local A of the base can be instantiated only by an equation that
    # mentions it, which no extension can do; the base must use the same
    # local shape
    base, whole = S("item(A)"), S("item(B), mset([])")
    delta = try_extension_remainder(base, whole)
    assert states_equivalent(merge(base, delta), whole)
    assert states_equivalent(delta, S("mset([])"))
    assert try_extension_remainder(S("item(A)"), S("item(a), mset([])")) is None


def test_remainder_with_globals():
    base = S("item(A) ; true ; [A]")
    whole = S("item(a), mset([]) ; A=a ; [A]")
    delta = try_extension_remainder(base, whole)
    assert delta is not None
    assert states_equivalent(merge(base, delta), whole)


# -- text and json ------------------------------------------------------------

def test_format_and_parse_round_trip():
    for text in ("item(a), item(b), mset([]) ; true ; []", "true ; true ; []",
                 "mset([A|L]), p(B) ; B=c ; [A,B,L]"):
        s = normalize(S(text))
        assert format_state(normalize(parse_state(format_state(s)))) == format_state(s)


def test_failed_state_text():
    assert format_state(FAILED) == "true ; false ; []"
    assert state_to_json(FAILED)["builtins"] == "false"


def test_parse_state_binding_matches_substituted_form():
    assert states_equivalent(S("mset(X) ; X=[] ; [X]"), S("mset([]) ; X=[] ; [X]"))


# -- properties ------------------------------------------------------------------

@given(st.data())
def test_equivalence_is_an_equivalence_relation(data):
    s = data.draw(states())
    t = data.draw(renamed_variant(s))
    u = data.draw(renamed_variant(t))
    assert states_equivalent(s, s)
    assert states_equivalent(s, t) and states_equivalent(t, s)
    assert states_equivalent(t, u) and states_equivalent(s, u)


@given(states(), states())
def test_equivalence_is_symmetric(s, t):
    assert states_equivalent(s, t) == states_equivalent(t, s)


@given(states(), states())
def test_state_class_hash_agrees_with_equality(s, t):
    if StateClass(s) == StateClass(t):
        assert hash(StateClass(s)) == hash(StateClass(t))


@given(states())
def test_merge_empty_is_identity(s):
    assert states_equivalent(merge(s, EMPTY), s)
    assert states_equivalent(merge(EMPTY, s), s)


@given(states(), states(), st.sets(st.sampled_from(["X", "Y", "Z"])))
def test_merge_commutes(s1, s2, V):
    assert states_equivalent(merge(s1, s2, V), merge(s2, s1, V))


@given(states(), states(), states())
def test_merge_associates(s1, s2, s3):
    assert states_equivalent(merge(s1, merge(s2, s3)), merge(merge(s1, s2), s3))


@given(states(), states(), states(), st.sets(st.sampled_from(["X", "Y", "Z"])))
def test_restricted_associativity(s1, s2, s3, V):
    # merge renames every operand's locals apart, so the disjointness
    # precondition always holds
    assert states_equivalent(merge(s1, merge(s2, s3), V), merge(merge(s1, s2), s3, V))


@given(states(max_goal=2), states(max_goal=2))
def test_remainder_finds_constructed_extension(base, delta):
    whole = merge(base, delta)
    found = try_extension_remainder(base, whole)
    assert found is not None
    assert states_equivalent(merge(base, found), whole)


def _ground_goal(max_size):
    atom = st.sampled_from([Atom("r"), Compound("p", (Atom("a"),)), Compound("p", (Atom("b"),)),
                            Compound("q", (Atom("a"), Atom("b")))])
    return st.lists(atom, max_size=max_size)


@given(_ground_goal(3), _ground_goal(4))
def test_remainder_matches_multiset_oracle(base_goal, whole_goal):
    # on ground states, base ◁ whole iff base's goal is a sub-multiset
    base, whole = ChrState(tuple(base_goal)), ChrState(tuple(whole_goal))
    expected = not (Counter(base_goal) - Counter(whole_goal))
    found = try_extension_remainder(base, whole)
    assert (found is not None) == expected
    if found is not None:
        assert Counter(found.goal) == Counter(whole_goal) - Counter(base_goal)
