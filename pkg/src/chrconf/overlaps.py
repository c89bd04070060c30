"""Rule states, rule overlaps and critical pairs."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Tuple

from .state import ChrState, StateClass, normalize, state_to_json
from .syntax import Program, Rule
from .terms import EquationSet, functor_of, rename, solve


def rule_state(r: Rule) -> ChrState:
    """``<Hk ⊎ Hr; G; vars(Hk, Hr, G)>``, all variables global."""
    return normalize(ChrState(r.kept + r.removed, r.guard, frozenset(r.head_guard_vars())))


def rename_apart(r: Rule, avoid: set) -> Rule:
    """Deterministic variant of ``r`` whose variables avoid ``avoid``,
    made by appending primes (``A`` becomes ``A'``)."""
    taken = set(avoid) | r.variables()
    mapping: Dict[str, str] = {}
    for v in sorted(r.variables()):
        new = v + "'"
        while new in taken:
            new += "'"
        taken.add(new)
        mapping[v] = new
    eqs = lambda es: EquationSet(tuple((rename(a, mapping), rename(b, mapping)) for a, b in es.equations))
    return Rule(r.name, tuple(rename(c, mapping) for c in r.kept),
                tuple(rename(c, mapping) for c in r.removed), eqs(r.guard),
                tuple(rename(c, mapping) for c in r.body), eqs(r.body_builtins),
                named=r.named, line=r.line)


@dataclass(frozen=True)
class OverlapDescriptor:
    rule1: Rule
    rule2: Rule                      # renamed-apart copy of the second rule
    kept1: Tuple[int, ...]           # O_k  (indices into rule1.kept)
    removed1: Tuple[int, ...]        # O_r  (indices into rule1.removed)
    kept2: Tuple[int, ...]           # O_k'
    removed2: Tuple[int, ...]        # O_r'
    pairing: Tuple[Tuple[int, int], ...]   # (head of rule1, head of rule2), heads = kept + removed
    unifier: Tuple[Tuple[str, object], ...]
    overlap_state: ChrState

    @property
    def label(self) -> str:
        pairs = ", ".join(f"{self.rule1.heads[i]}={self.rule2.heads[j]}" for i, j in self.pairing)
        return f"{self.rule1.name}/{self.rule2.name}: {pairs}"

    def to_json(self) -> dict:
        return {
            "rule1": self.rule1.name,
            "rule2": self.rule2.name,
            "pairing": [[str(self.rule1.heads[i]), str(self.rule2.heads[j])] for i, j in self.pairing],
            "overlap_state": state_to_json(self.overlap_state),
        }


@dataclass(frozen=True)
class CriticalPair:
    left: ChrState
    right: ChrState
    source: OverlapDescriptor

    @property
    def trivial(self) -> bool:
        return StateClass(self.left) == StateClass(self.right)


def _critical_pair(r1: Rule, r2: Rule, pairing, B: EquationSet, V: frozenset):
    in1 = {i for i, _ in pairing}
    in2 = {j for _, j in pairing}
    rest2 = tuple(c for j, c in enumerate(r2.heads) if j not in in2)
    overlap = r1.heads + rest2
    # apply r1: its removed heads go, everything else stays
    left_goal = r1.kept + rest2 + r1.body
    # apply r2: r1's non-overlapped heads, r2's kept heads, r2's body
    rest1 = tuple(c for i, c in enumerate(r1.heads) if i not in in1)
    right_goal = rest1 + r2.kept + r2.body
    left = normalize(ChrState(left_goal, B & r1.body_builtins, V))
    right = normalize(ChrState(right_goal, B & r2.body_builtins, V))
    return normalize(ChrState(overlap, B, V)), left, right


def overlaps(r1: Rule, r2: Rule) -> List[Tuple[OverlapDescriptor, CriticalPair]]:
    """All overlaps of ``r1`` with (a renamed-apart copy of) ``r2``."""
    same = r1 == r2 and r1.name == r2.name
    r2 = rename_apart(r2, r1.variables())
    h1, h2 = r1.heads, r2.heads
    n1k, n2k = len(r1.kept), len(r2.kept)
    V = frozenset(r1.head_guard_vars() | r2.head_guard_vars())
    f1 = [functor_of(c) for c in h1]
    f2 = [functor_of(c) for c in h2]
    out: List[Tuple[OverlapDescriptor, CriticalPair]] = []
    seen: List[Tuple[StateClass, StateClass, StateClass]] = []
    for k in range(1, min(len(h1), len(h2)) + 1):
        for sel1 in itertools.combinations(range(len(h1)), k):
            for sel2 in itertools.permutations(range(len(h2)), k):
                pairing = tuple(zip(sel1, sel2))
                if any(f1[i] != f2[j] for i, j in pairing):
                    continue
                if all(i < n1k for i in sel1) and all(j < n2k for j in sel2):
                    continue  # O_r ⊎ O_r' must be nonempty
                if same and tuple(sorted((j, i) for i, j in pairing)) < pairing:
                    continue  # mirror image of an overlap already enumerated
                B = EquationSet(tuple((h1[i], h2[j]) for i, j in pairing)) & r1.guard & r2.guard
                theta = solve(B)
                if theta is None:
                    continue
                state, left, right = _critical_pair(r1, r2, pairing, B, V)
                key = (StateClass(state, True), StateClass(left, True), StateClass(right, True))
                if any(key[0] == s and {key[1], key[2]} == {l, r} for s, l, r in seen):
                    continue
                seen.append(key)
                desc = OverlapDescriptor(
                    r1, r2,
                    tuple(i for i in sel1 if i < n1k),
                    tuple(i - n1k for i in sel1 if i >= n1k),
                    tuple(j for j in sel2 if j < n2k),
                    tuple(j - n2k for j in sel2 if j >= n2k),
                    pairing, tuple(sorted(theta.items())), state)
                out.append((desc, CriticalPair(left, right, desc)))
    return out


def all_overlaps(p: Program) -> List[Tuple[OverlapDescriptor, CriticalPair]]:
    """Overlaps of every unordered pair of rules, self-overlaps included.
    The ordered pair (r2, r1) only mirrors (r1, r2), so it is skipped."""
    out = []
    for i, r1 in enumerate(p.rules):
        for r2 in p.rules[i:]:
            out.extend(overlaps(r1, r2))
    return out
