"""State invariants and their sets of minimal extensions."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

from .specs import AlwaysTrue, Conjunction, FunctorCount, Ground, InvariantSpec
from .engine import successors
from .generators import random_program_state
from .overlaps import rule_state
from .state import EMPTY, ChrState, StateClass, merge, normalize, state_to_json, try_extension_remainder
from .syntax import Program
from .terms import Atom, EquationSet, Var, functor_of, term_vars


def holds(inv: InvariantSpec, s: ChrState) -> bool:
    s = normalize(s)
    if isinstance(inv, AlwaysTrue):
        return True
    if isinstance(inv, FunctorCount):
        key = (inv.functor, inv.arity)
        return sum(1 for c in s.goal if functor_of(c) == key) <= inv.max
    if isinstance(inv, Ground):
        return not _offending_vars(inv, s)
    if isinstance(inv, Conjunction):
        return all(holds(part, s) for part in inv.parts)
    raise TypeError(f"unknown invariant {inv!r}")


def _offending_vars(inv: Ground, s: ChrState) -> List[str]:
    key = (inv.functor, inv.arity)
    out: List[str] = []
    for c in s.goal:
        if functor_of(c) == key:
            for v in sorted(term_vars(c)):
                if v not in out:
                    out.append(v)
    return out


@dataclass(frozen=True)
class MinimalExtensionSet:
    extensions: Tuple[ChrState, ...]
    complete: bool

    def __iter__(self):
        return iter(self.extensions)

    def __len__(self) -> int:
        return len(self.extensions)


def fresh_constant(signature: Sequence[str]) -> str:
    taken = set(signature)
    for name in "abcdefghijklmnopqrstuvwxyz":
        if name not in taken:
            return name
    for n in itertools.count(1):
        if f"k{n}" not in taken:
            return f"k{n}"


def minimal_extensions(inv: InvariantSpec, s: ChrState,
                       signature: Sequence[str] = ()) -> MinimalExtensionSet:
    """``◁``-minimal states without local variables whose merge with ``s``
    satisfies ``inv``.  ``complete`` is False when the returned set is only a
    finite under-approximation."""
    s = normalize(s)
    if holds(inv, s):
        return MinimalExtensionSet((EMPTY,), True)
    if isinstance(inv, FunctorCount):
        # extending a state never removes constraints
        return MinimalExtensionSet((), True)
    if isinstance(inv, Ground):
        offending = _offending_vars(inv, s)
        if any(v not in s.globals for v in offending):
            # an extension can only constrain global variables
            return MinimalExtensionSet((), True)
        constants = list(signature) + [fresh_constant(signature)]
        exts = []
        for values in itertools.product(constants, repeat=len(offending)):
            eqs = [(Var(v), Atom(c)) for v, c in zip(offending, values)]
            exts.append(normalize(ChrState((), EquationSet(tuple(eqs)), frozenset(offending))))
        return MinimalExtensionSet(tuple(exts), False)
    if isinstance(inv, Conjunction):
        parts = [minimal_extensions(p, s, signature) for p in inv.parts]
        complete = all(p.complete for p in parts)
        if any(not p.extensions for p in parts) and complete:
            return MinimalExtensionSet((), True)
        found: List[StateClass] = []
        for combo in itertools.product(*(p.extensions for p in parts)):
            ext = EMPTY
            for e in combo:
                ext = merge(ext, e)
            if holds(inv, merge(s, ext)):
                cls = StateClass(ext)
                if cls not in found:
                    found.append(cls)
        return MinimalExtensionSet(tuple(c.state for c in found), complete)
    raise TypeError(f"unknown invariant {inv!r}")


def is_minimal_set(exts: Sequence[ChrState]) -> bool:
    """No element strictly ``◁``-below another."""
    for a, b in itertools.permutations(exts, 2):
        if try_extension_remainder(a, b) is not None and StateClass(a) != StateClass(b):
            return False
    return True


@dataclass(frozen=True)
class PreservationResult:
    ok: bool
    checked: int
    witness: Optional[Tuple[ChrState, str, ChrState]] = None

    def to_json(self) -> dict:
        out = {"status": "pass" if self.ok else "fail", "checked": self.checked}
        if self.witness:
            state, rule, succ = self.witness
            out["witness"] = {"state": state_to_json(state), "rule": rule,
                              "successor": state_to_json(succ)}
        return out


def check_preservation(p: Program, inv: InvariantSpec, samples: int = 200,
                       rng: Optional[random.Random] = None) -> PreservationResult:
    """Evidence that ``inv`` is preserved by every rule: rule states with
    their minimal extensions, then random invariant-satisfying states."""
    rng = rng or random.Random(0)
    signature = p.constants()
    checked = 0
    for r in p.rules:
        rs = rule_state(r)
        for ext in minimal_extensions(inv, rs, signature):
            start = merge(rs, ext)
            if not holds(inv, start):
                continue
            for inst, succ in successors(p, start):
                checked += 1
                if not holds(inv, succ.state):
                    return PreservationResult(False, checked, (start, inst.rule.name, succ.state))
    if p.rules:
        for _ in range(samples):
            s = random_program_state(p, rng)
            if not holds(inv, s):
                continue
            for inst, succ in successors(p, s):
                checked += 1
                if not holds(inv, succ.state):
                    return PreservationResult(False, checked, (normalize(s), inst.rule.name, succ.state))
    return PreservationResult(True, checked)
