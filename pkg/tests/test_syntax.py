import warnings

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chrconf.specs import (
    AlwaysTrue,
    AnalysisConfig,
    Conjunction,
    CountPartition,
    FunctorCount,
    Ground,
    Identity,
    ListPerm,
    PairCollapse,
)
from chrconf.state import EMPTY, normalize, states_equivalent
from chrconf.syntax import (
    ArityWarning,
    ConfigError,
    ParseError,
    Rule,
    format_program,
    format_rule,
    parse_config,
    parse_equivalence,
    parse_invariant,
    parse_program,
    parse_state,
)
from chrconf.terms import EquationSet, Int, Var

from conftest import MSET, constraints, terms


def test_simplification_rule():
    p = parse_program(MSET)
    (r,) = p.rules
    assert r.kind == "simplification" and r.kept == ()
    assert r.name == "r1" and not r.named
    assert format_rule(r) == "mset(L), item(A) <=> mset([A|L])."


def test_simpagation_rule_with_guard():
    (r,) = parse_program(r"r1 @ p \ q <=> X=1 | s(X).").rules
    assert r.kind == "simpagation" and r.named
    assert [str(c) for c in r.kept] == ["p"] and [str(c) for c in r.removed] == ["q"]
    assert r.guard.equations == ((Var("X"), Int(1)),)


def test_propagation_rule():
    (r,) = parse_program("p ==> q.").rules
    assert r.kind == "propagation" and r.removed == ()


def test_body_builtins_split_from_constraints():
    (r,) = parse_program("p(X) <=> q(Y), X = Y, true.").rules
    assert len(r.body) == 1 and len(r.body_builtins.equations) == 1


def test_anonymous_variables_are_distinct():
    (r,) = parse_program("p(_, _) <=> true.").rules
    a, b = r.removed[0].args
    assert a != b


def test_comments_and_auto_names():
    p = parse_program("% header\np <=> q. % trailing\nfoo @ q <=> r.\ns <=> t.\n")
    assert [r.name for r in p.rules] == ["r1", "foo", "r3"]


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_program("p <=> q\nr <=> s.")
    assert e.value.line == 2


def test_guard_with_chr_constraint_rejected():
    with pytest.raises(ParseError):
        parse_program("p(X) <=> q(X) | r.")


def test_duplicate_names_rejected():
    with pytest.raises(ParseError):
        parse_program("a @ p <=> q.\na @ q <=> r.")


def test_arity_mismatch_is_warning():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        p = parse_program("p(X) <=> p.")
    assert any(issubclass(w.category, ArityWarning) for w in caught)
    assert p.warnings


def test_guard_omission_equals_true_guard():
    assert parse_program("p(X) <=> q(X).").rules == parse_program("p(X) <=> true | q(X).").rules


def test_empty_body_is_true():
    (r,) = parse_program("p <=> true.").rules
    assert r.body == () and format_rule(r) == "p <=> true."


def test_parse_state_examples():
    s = parse_state("item(a), item(b), mset([]) ; true ; []")
    assert len(s.goal) == 3 and not s.globals and not s.variables()
    assert normalize(parse_state("true ; true ; []")) == EMPTY
    assert states_equivalent(parse_state("mset(X) ; X=[] ; [X]"), parse_state("mset([]) ; X=[] ; [X]"))


def test_parse_state_rejects_equation_in_goal():
    with pytest.raises(ParseError):
        parse_state("p, X=1 ; true ; [X]")


def test_parse_state_false_builtins():
    assert parse_state("p ; false ; []").builtins.inconsistent


# -- configuration ------------------------------------------------------------

def test_config_directives():
    cfg = parse_config("invariant functor_count mset/1 max 1\nequiv list_perm mset/1 arg 1\n"
                       "bound 50\nbudget 8\nassume_terminating\n# comment\n")
    assert cfg.invariant == FunctorCount("mset", 1, 1)
    assert cfg.equivalence == ListPerm("mset", 1, 1)
    assert cfg.derivation_bound == 50 and cfg.representative_budget == 8
    assert cfg.termination_assumed


def test_config_identity_and_conjunction():
    cfg = parse_config("equiv identity\ninvariant ground item/1\ninvariant functor_count mset/1 max 1")
    assert cfg.equivalence == Identity()
    assert cfg.invariant == Conjunction((Ground("item", 1), FunctorCount("mset", 1, 1)))


def test_config_errors_carry_line():
    with pytest.raises(ConfigError) as e:
        parse_config("bound 3\nequiv frobnicate")
    assert e.value.line == 2
    with pytest.raises(ConfigError):
        parse_config("bound 0")
    with pytest.raises(ConfigError):
        parse_config("equiv identity\nequiv identity")


@pytest.mark.parametrize("text,spec", [
    ("true", AlwaysTrue()),
    ("functor_count mset/1 max 1", FunctorCount("mset", 1, 1)),
    ("ground item/1", Ground("item", 1)),
])
def test_invariant_directives_round_trip(text, spec):
    assert parse_invariant(text) == spec
    assert parse_invariant(spec.directive()) == spec


@pytest.mark.parametrize("text,spec", [
    ("identity", Identity()),
    ("list_perm mset/1 arg 1", ListPerm("mset", 1, 1)),
    ("count_partition c/0 threshold 3", CountPartition("c", 0, 3)),
    ("pair_collapse c d", PairCollapse("c", "d")),
])
def test_equivalence_directives_round_trip(text, spec):
    assert parse_equivalence(text) == spec
    assert parse_equivalence(spec.directive()) == spec


def test_bad_specs_rejected():
    for text in ("functor_count mset/1 max -1", "ground mset", "nonsense"):
        with pytest.raises(ConfigError):
            parse_invariant(text)
    with pytest.raises(ConfigError):
        parse_equivalence("list_perm mset/1 arg 2")


def test_config_bounds_validated():
    with pytest.raises(ValueError):
        AnalysisConfig(derivation_bound=0)


# -- round-trip property ------------------------------------------------------

NAMES = st.sampled_from(["p", "q", "r"])
RULE_VARS = ("X", "Y", "Z")


@st.composite
def rules(draw):
    heads = st.lists(constraints(RULE_VARS), min_size=1, max_size=2)
    kind = draw(st.sampled_from(["simplification", "propagation", "simpagation"]))
    kept = tuple(draw(heads)) if kind != "simplification" else ()
    removed = tuple(draw(heads)) if kind != "propagation" else ()
    eq = st.tuples(st.sampled_from([Var(v) for v in RULE_VARS]), terms(3, RULE_VARS))
    guard = EquationSet(tuple(draw(st.lists(eq, max_size=2))))
    body = tuple(draw(st.lists(constraints(RULE_VARS), max_size=2)))
    body_eqs = EquationSet(tuple(draw(st.lists(eq, max_size=1))))
    named = draw(st.booleans())
    return Rule("rule" if named else "r1", kept, removed, guard, body, body_eqs, named=named)


@given(rules())
def test_rule_print_parse_round_trip(r):
    text = format_rule(r)
    (back,) = parse_program(text).rules
    assert back == r
    assert format_rule(back) == text


@given(st.lists(rules(), min_size=1, max_size=3))
def test_program_print_parse_round_trip(rs):
    rs = [Rule(f"n{i}", r.kept, r.removed, r.guard, r.body, r.body_builtins, named=True)
          for i, r in enumerate(rs)]
    from chrconf.syntax import Program
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        text = format_program(Program(tuple(rs)))
        assert format_program(parse_program(text)) == text
