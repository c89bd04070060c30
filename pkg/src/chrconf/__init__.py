"""Confluence modulo equivalence for Constraint Handling Rules programs,
restricted to states satisfying an invariant."""

from .checker import (
    ConfluenceReport,
    JoinVerdict,
    alpha_check,
    beta_check,
    confluence_verdict,
    joinable_mod,
)
from .engine import explore, final_states, successors
from .equivalence import Obligation, class_representatives, compat_report, equivalent
from .invariants import holds, minimal_extensions
from .overlaps import all_overlaps, overlaps, rule_state
from .specs import (
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
from .state import ChrState, StateClass, merge, normalize, states_equivalent, try_extension_remainder
from .syntax import ParseError, parse_config, parse_program, parse_state, parse_term

__version__ = "0.1.0"

__all__ = [
    "AlwaysTrue", "AnalysisConfig", "ChrState", "ConfluenceReport", "Conjunction",
    "CountPartition", "FunctorCount", "Ground", "Identity", "JoinVerdict", "ListPerm",
    "Obligation", "PairCollapse", "ParseError", "StateClass", "all_overlaps", "alpha_check",
    "beta_check", "class_representatives", "compat_report", "confluence_verdict", "equivalent",
    "explore", "final_states", "holds", "joinable_mod", "merge", "minimal_extensions",
    "normalize", "overlaps", "parse_config", "parse_program", "parse_state", "parse_term",
    "rule_state", "states_equivalent", "successors", "try_extension_remainder",
]
