"""Configuration values: invariant and equivalence-relation specifications."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple, Union


@dataclass(frozen=True)
class AlwaysTrue:
    def directive(self) -> str:
        return "true"


@dataclass(frozen=True)
class FunctorCount:
    """At most ``max`` constraints with the given functor/arity."""

    functor: str
    arity: int
    max: int

    def __post_init__(self):
        if self.max < 0:
            raise ValueError("functor_count max must be >= 0")

    def directive(self) -> str:
        return f"functor_count {self.functor}/{self.arity} max {self.max}"


@dataclass(frozen=True)
class Ground:
    """Every constraint with the given functor/arity is ground."""

    functor: str
    arity: int

    def directive(self) -> str:
        return f"ground {self.functor}/{self.arity}"


@dataclass(frozen=True)
class Conjunction:
    parts: Tuple["InvariantSpec", ...]

    def directive(self) -> str:
        return " & ".join(p.directive() for p in self.parts)


InvariantSpec = Union[AlwaysTrue, FunctorCount, Ground, Conjunction]


def conjoin(specs) -> InvariantSpec:
    flat = []
    for s in specs:
        if isinstance(s, Conjunction):
            flat.extend(s.parts)
        elif not isinstance(s, AlwaysTrue):
            flat.append(s)
    if not flat:
        return AlwaysTrue()
    if len(flat) == 1:
        return flat[0]
    return Conjunction(tuple(flat))


@dataclass(frozen=True)
class Identity:
    """State equivalence itself."""

    def directive(self) -> str:
        return "identity"


@dataclass(frozen=True)
class ListPerm:
    """Constraints ``functor/arity`` are equal when their ``arg``-th argument
    (1-based, a list) is a permutation.  With mset/1 arg 1 this is the
    multiset relation of the running example."""

    functor: str
    arity: int
    arg: int = 1

    def __post_init__(self):
        if not 1 <= self.arg <= self.arity:
            raise ValueError(f"argument index {self.arg} out of range for {self.functor}/{self.arity}")

    def directive(self) -> str:
        return f"list_perm {self.functor}/{self.arity} arg {self.arg}"


@dataclass(frozen=True)
class CountPartition:
    """Two classes: fewer than ``threshold`` ``functor`` constraints, or not."""

    functor: str
    arity: int
    threshold: int

    def directive(self) -> str:
        return f"count_partition {self.functor}/{self.arity} threshold {self.threshold}"


@dataclass(frozen=True)
class PairCollapse:
    """Any two ``c`` constraints may be replaced by one ``d``."""

    c: str
    d: str

    def directive(self) -> str:
        return f"pair_collapse {self.c} {self.d}"


EquivSpec = Union[Identity, ListPerm, CountPartition, PairCollapse]


@dataclass(frozen=True)
class AnalysisConfig:
    invariant: InvariantSpec = field(default_factory=AlwaysTrue)
    equivalence: EquivSpec = field(default_factory=Identity)
    derivation_bound: int = 1000
    representative_budget: int = 64
    termination_assumed: bool = False
    trials: int = 1000
    seed: int = 0
    sweep_length: int = 3
    max_states: int = 20000

    def __post_init__(self):
        for name in ("derivation_bound", "representative_budget", "trials", "max_states"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.sweep_length < 0:
            raise ValueError("sweep_length must be >= 0")

    def to_json(self) -> dict:
        return {
            "invariant": self.invariant.directive(),
            "equivalence": self.equivalence.directive(),
            "derivation_bound": self.derivation_bound,
            "representative_budget": self.representative_budget,
            "termination_assumed": self.termination_assumed,
            "trials": self.trials,
            "seed": self.seed,
            "sweep_length": self.sweep_length,
            "max_states": self.max_states,
        }
