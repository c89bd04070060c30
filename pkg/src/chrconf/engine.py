"""Rule application under the equivalence-class semantics and bounded
exhaustive derivation."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .state import ChrState, StateClass, normalize, states_equivalent
from .syntax import Program, Rule
from .terms import (
    EquationSet,
    Substitution,
    Var,
    entails,
    fresh_renaming,
    functor_of,
    match,
    rename,
    substitute,
)


@dataclass(frozen=True)
class RuleInstance:
    rule: Rule
    kept: Tuple[int, ...]      # goal positions matched by the kept heads
    removed: Tuple[int, ...]   # goal positions matched by the removed heads
    theta: Tuple[Tuple[str, object], ...]
    variant: Rule              # the renamed-apart copy that was matched

    @property
    def substitution(self) -> Substitution:
        return dict(self.theta)


def rename_rule(r: Rule) -> Rule:
    """A variant of ``r`` with all variables fresh."""
    mapping = {k: v.name for k, v in fresh_renaming(r.variables()).items()}
    eqs = lambda es: EquationSet(tuple((rename(a, mapping), rename(b, mapping)) for a, b in es.equations))
    return Rule(r.name, tuple(rename(c, mapping) for c in r.kept),
                tuple(rename(c, mapping) for c in r.removed), eqs(r.guard),
                tuple(rename(c, mapping) for c in r.body), eqs(r.body_builtins),
                named=r.named, line=r.line)


def _injections(heads, goal, theta, used=()):
    if not heads:
        yield tuple(used), theta
        return
    h = heads[0]
    fh = functor_of(h)
    for j, c in enumerate(goal):
        if j in used or functor_of(c) != fh:
            continue
        t2 = match(h, c, theta)
        if t2 is not None:
            yield from _injections(heads[1:], goal, t2, used + (j,))


def rule_instances(r: Rule, s: ChrState) -> List[RuleInstance]:
    if s.failed:
        return []
    v = rename_rule(r)
    heads = v.kept + v.removed
    protected = s.variables() | s.globals
    out = []
    for positions, theta in _injections(heads, s.goal, {}):
        guard = [(substitute(a, theta), substitute(b, theta)) for a, b in v.guard.equations]
        extra = entails(s.builtins, guard, protected)
        if extra is None:
            continue
        theta = {**{k: substitute(t, extra) for k, t in theta.items()}, **extra}
        k = len(v.kept)
        out.append(RuleInstance(r, positions[:k], positions[k:],
                                tuple(sorted(theta.items())), v))
    return out


def applicable_instances(p: Program, s: ChrState) -> List[RuleInstance]:
    """Every way of applying every rule to the normalized state ``s``,
    in rule order and then goal-occurrence order."""
    out = []
    for r in p.rules:
        out.extend(rule_instances(r, s))
    return out


def apply_instance(s: ChrState, i: RuleInstance) -> ChrState:
    theta = i.substitution
    v = i.variant
    # body-only variables are the variant's fresh locals
    goal = [c for j, c in enumerate(s.goal) if j not in i.removed]
    goal += [substitute(c, theta) for c in v.body]
    eqs = tuple((substitute(a, theta), substitute(b, theta))
                for a, b in v.guard.equations + v.body_builtins.equations)
    return normalize(ChrState(tuple(goal), s.builtins & EquationSet(eqs), s.globals))


def successors(p: Program, s: ChrState) -> List[Tuple[RuleInstance, StateClass]]:
    """One-step successors, deduplicated up to ≡ (first instance kept)."""
    s = normalize(s)
    out: List[Tuple[RuleInstance, StateClass]] = []
    seen = set()
    for inst in applicable_instances(p, s):
        cls = StateClass(apply_instance(s, inst), normalized=True)
        if cls not in seen:
            seen.add(cls)
            out.append((inst, cls))
    return out


@dataclass
class Exploration:
    """Reachable part of the transition graph from ``start``."""

    start: StateClass
    depth: Dict[StateClass, int]
    parent: Dict[StateClass, Tuple[Optional[StateClass], Optional[str]]]
    edges: Dict[StateClass, List[StateClass]]
    finals: List[StateClass]
    bound_hit: bool
    cyclic: bool

    @property
    def exhausted(self) -> bool:
        """True when termination could not be established within the bound."""
        return self.bound_hit or self.cyclic

    @property
    def states(self) -> List[StateClass]:
        return list(self.depth)

    def path_to(self, target: StateClass) -> List[Tuple[Optional[str], StateClass]]:
        """Derivation from ``start`` to ``target`` as (rule name, state) steps."""
        steps = []
        cur: Optional[StateClass] = target
        while cur is not None:
            prev, rule = self.parent[cur]
            steps.append((rule, cur))
            cur = prev
        steps.reverse()
        return steps


def explore(p: Program, s: ChrState, bound: int, max_states: int = 20000) -> Exploration:
    """Breadth-first search of ``s``'s derivations up to ``bound`` steps."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    start = StateClass(s)
    depth = {start: 0}
    parent: Dict[StateClass, Tuple[Optional[StateClass], Optional[str]]] = {start: (None, None)}
    edges: Dict[StateClass, List[StateClass]] = {}
    finals: List[StateClass] = []
    bound_hit = False
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        succ = successors(p, cur.state)
        if not succ:
            finals.append(cur)
            continue
        if depth[cur] >= bound or len(depth) >= max_states:
            bound_hit = True
            continue
        edges[cur] = []
        for inst, nxt in succ:
            edges[cur].append(nxt)
            if nxt not in depth:
                depth[nxt] = depth[cur] + 1
                parent[nxt] = (cur, inst.rule.name)
                queue.append(nxt)
    return Exploration(start, depth, parent, edges, finals, bound_hit, _has_cycle(edges))


def _has_cycle(edges: Dict[StateClass, List[StateClass]]) -> bool:
    white, grey, black = 0, 1, 2
    color: Dict[StateClass, int] = {}
    for root in edges:
        if color.get(root, white) != white:
            continue
        stack = [(root, iter(edges.get(root, ())))]
        color[root] = grey
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[node] = black
                stack.pop()
                continue
            c = color.get(nxt, white)
            if c == grey:
                return True
            if c == white:
                color[nxt] = grey
                stack.append((nxt, iter(edges.get(nxt, ()))))
    return False


def final_states(p: Program, s: ChrState, bound: int) -> Tuple[List[StateClass], bool]:
    """Final states reachable within ``bound`` steps per branch, and whether
    some branch could not be shown to terminate (bound hit or a cycle)."""
    ex = explore(p, s, bound)
    return ex.finals, ex.exhausted


def replay(p: Program, steps: Sequence[Tuple[Optional[str], ChrState]]) -> bool:
    """Check that each step follows from the previous one by the named rule."""
    if not steps:
        return True
    prev = normalize(steps[0][1])
    for rule_name, state in steps[1:]:
        target = StateClass(state)
        if not any(inst.rule.name == rule_name and cls == target
                   for inst, cls in successors(p, prev)):
            return False
        prev = target.state
    return True
