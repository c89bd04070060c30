"""User-defined equivalence relations on CHR states.

Each relation kind supplies a membership test, an enumeration of (a finite
part of) an equivalence class, and the class moves used by the randomized
compatibility checks.  Compatibility checking refutes; a pass is evidence,
not a proof.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .invariants import holds
from .specs import CountPartition, EquivSpec, Identity, InvariantSpec, ListPerm, PairCollapse
from .state import (
    ChrState,
    StateClass,
    format_state,
    goal_bijections,
    merge,
    normalize,
    state_to_json,
    states_equivalent,
    variant,
)
from .generators import random_state
from .terms import (
    NIL,
    Atom,
    Compound,
    EquationSet,
    Term,
    Var,
    format_term,
    functor_of,
    list_parts,
    mklist,
    order_key,
)


@dataclass(frozen=True)
class Obligation:
    """An equivalence that holds only if the stated permutation facts do."""

    text: str

    def __bool__(self):
        raise TypeError("an Obligation is neither true nor false; compare with `is True`")

    def __str__(self) -> str:
        return self.text


Perms = Mapping[str, Term]   # symbolic variable -> the list it permutes


def perm_text(perms: Perms) -> str:
    return ", ".join(f"perm({format_term(t)}, {v})" for v, t in sorted(perms.items()))


# -- membership ----------------------------------------------------------------

def _tag(spec: ListPerm):
    return (spec.functor, spec.arity)


def _expand(t: Term, perms: Perms) -> Tuple[List[Term], Term]:
    items, tail = list_parts(t)
    seen = set()
    while isinstance(tail, Var) and tail.name in perms and tail.name not in seen:
        seen.add(tail.name)
        more, tail = list_parts(perms[tail.name])
        items = items + more
    return items, tail


def _list_pairs(a: Term, b: Term, ren, l1, l2, perms: Perms) -> Iterator:
    if perms:
        items1, tail1 = _expand(a, perms)
        items2, tail2 = _expand(b, perms)
    else:
        items1, tail1 = list_parts(a)
        items2, tail2 = list_parts(b)
    ren = variant(tail1, tail2, ren, l1, l2)
    if ren is None or len(items1) != len(items2):
        return

    def pair(x, y, r):
        out = variant(x, y, r, l1, l2)
        if out is not None:
            yield out

    yield from goal_bijections(items1, items2, ren, pair,
                               lambda x: order_key(x, l1), lambda y: order_key(y, l2))


def _list_perm_equivalent(spec: ListPerm, n1: ChrState, n2: ChrState, perms: Perms) -> bool:
    l1, l2 = frozenset(n1.local_vars()), frozenset(n2.local_vars())
    b1, b2 = n1.bindings(), n2.bindings()
    if b1.keys() != b2.keys() or len(n1.goal) != len(n2.goal):
        return False
    ren = ({}, {})
    for x in sorted(b1):
        ren = variant(b1[x], b2[x], ren, l1, l2)
        if ren is None:
            return False
    tag = _tag(spec)
    k = spec.arg - 1

    def pair(c1, c2, r):
        if functor_of(c1) != tag:
            out = variant(c1, c2, r, l1, l2)
            if out is not None:
                yield out
            return
        for i, (a, b) in enumerate(zip(c1.args, c2.args)):
            if i != k:
                r = variant(a, b, r, l1, l2)
                if r is None:
                    return
        yield from _list_pairs(c1.args[k], c2.args[k], r, l1, l2, perms)

    def group(locals_):
        return lambda c: functor_of(c) if functor_of(c) == tag else order_key(c, locals_)

    for _ in goal_bijections(n1.goal, n2.goal, ren, pair, group(l1), group(l2)):
        return True
    return False


def _count(s: ChrState, key) -> int:
    return sum(1 for c in s.goal if functor_of(c) == key)


def collapse_pairs(spec: PairCollapse, s: ChrState) -> ChrState:
    """Normal form for ``pair_collapse``: every pair of ``c`` becomes ``d``."""
    c, d = Atom(spec.c), Atom(spec.d)
    n = sum(1 for x in s.goal if x == c)
    rest = tuple(x for x in s.goal if x != c)
    goal = rest + (c,) * (n % 2) + (d,) * (n // 2)
    return normalize(ChrState(goal, s.builtins, s.globals))


def equivalent(spec: EquivSpec, s1: ChrState, s2: ChrState,
               perms: Perms = None) -> Union[bool, Obligation]:
    """Decide ``s1 ≈ s2``.

    ``perms`` records symbolic facts "variable V is a permutation of term T"
    (only meaningful for ``list_perm``).  If the states are equivalent only
    by appeal to those facts the result is an :class:`Obligation`.
    """
    n1, n2 = normalize(s1), normalize(s2)
    if isinstance(spec, Identity):
        return states_equivalent(n1, n2, normalized=True)
    if isinstance(spec, ListPerm):
        if n1.failed or n2.failed:
            return n1.failed and n2.failed
        if _list_perm_equivalent(spec, n1, n2, {}):
            return True
        if perms and _list_perm_equivalent(spec, n1, n2, perms):
            return Obligation(f"{format_state(n1)}  ≈  {format_state(n2)}  given {perm_text(perms)}")
        return False
    if isinstance(spec, CountPartition):
        key = (spec.functor, spec.arity)
        return (_count(n1, key) < spec.threshold) == (_count(n2, key) < spec.threshold)
    if isinstance(spec, PairCollapse):
        return states_equivalent(collapse_pairs(spec, n1), collapse_pairs(spec, n2), normalized=True)
    raise TypeError(f"unknown equivalence {spec!r}")


def quick_key(spec: EquivSpec, s: ChrState):
    """A value equal for any two ``≈``-equivalent states (bucketing aid)."""
    s = normalize(s)
    if isinstance(spec, CountPartition):
        return _count(s, (spec.functor, spec.arity)) < spec.threshold
    if isinstance(spec, PairCollapse):
        s = collapse_pairs(spec, s)
    if s.failed:
        return ("failed",)
    return tuple(sorted(functor_of(c) for c in s.goal))


# -- class enumeration ---------------------------------------------------------

@dataclass(frozen=True)
class SymbolicRepresentative:
    state: ChrState
    perms: Tuple[Tuple[str, Term], ...]

    @property
    def obligation(self) -> Obligation:
        return Obligation(perm_text(dict(self.perms)))


@dataclass(frozen=True)
class ClassEnumeration:
    states: Tuple[ChrState, ...]
    complete: bool
    symbolic: Tuple[SymbolicRepresentative, ...] = ()

    def __iter__(self):
        # unpacks as (states, complete)
        return iter((list(self.states), self.complete))


def _distinct_permutations(items: Sequence[Term]) -> List[Tuple[Term, ...]]:
    out, seen = [], set()
    for perm in itertools.permutations(items):
        if perm not in seen:
            seen.add(perm)
            out.append(perm)
    return out


def _fresh_global(stem: str, taken: set) -> str:
    name = stem + "'"
    while name in taken:
        name += "'"
    taken.add(name)
    return name


def class_representatives(spec: EquivSpec, s: ChrState, budget: int = 64) -> ClassEnumeration:
    """Pairwise ``≡``-distinct members of the ``≈``-class of ``s``."""
    if budget < 1:
        raise ValueError("budget must be >= 1")
    s = normalize(s)
    if isinstance(spec, Identity) or s.failed:
        return ClassEnumeration((s,), True)
    if isinstance(spec, ListPerm):
        return _list_perm_class(spec, s, budget)
    if isinstance(spec, PairCollapse):
        nf = collapse_pairs(spec, s)
        c, d = Atom(spec.c), Atom(spec.d)
        rest = tuple(x for x in nf.goal if x not in (c, d))
        nc = sum(1 for x in nf.goal if x == c)
        nd = sum(1 for x in nf.goal if x == d)
        found = []
        for j in range(nd + 1):
            if len(found) >= budget:
                return ClassEnumeration(tuple(found), False)
            goal = rest + (c,) * (nc + 2 * j) + (d,) * (nd - j)
            found.append(normalize(ChrState(goal, nf.builtins, nf.globals)))
        return ClassEnumeration(tuple(found), True)
    if isinstance(spec, CountPartition):
        # the class is infinite; offer the state and its nearest neighbours
        found = [StateClass(s, True)]
        for t in neighbours(spec, s):
            cls = StateClass(t)
            if cls not in found and len(found) < budget:
                found.append(cls)
        return ClassEnumeration(tuple(c.state for c in found), False)
    raise TypeError(f"unknown equivalence {spec!r}")


def _list_perm_class(spec: ListPerm, s: ChrState, budget: int) -> ClassEnumeration:
    tag, k = _tag(spec), spec.arg - 1
    choices: List[List[Term]] = []
    complete = True
    perms: Dict[str, Term] = {}
    symbolic_goal = []
    taken = set(s.variables()) | set(s.globals)
    for c in s.goal:
        if functor_of(c) != tag:
            choices.append([c])
            symbolic_goal.append(c)
            continue
        items, tail = list_parts(c.args[k])
        if tail != NIL:
            complete = False
            stem = tail.name if isinstance(tail, Var) else "L"
            new = _fresh_global(stem, taken)
            perms[new] = c.args[k]
            symbolic_goal.append(_with_arg(c, k, Var(new)))
        else:
            symbolic_goal.append(c)
        choices.append([_with_arg(c, k, mklist(p, tail)) for p in _distinct_permutations(items)])
    found: List[StateClass] = []
    for goal in itertools.product(*choices):
        if len(found) >= budget:
            complete = False
            break
        cls = StateClass(ChrState(tuple(goal), s.builtins, s.globals))
        if cls not in found:
            found.append(cls)
    symbolic = ()
    if perms:
        sym = normalize(ChrState(tuple(symbolic_goal), s.builtins, s.globals | frozenset(perms)))
        symbolic = (SymbolicRepresentative(sym, tuple(sorted(perms.items()))),)
    return ClassEnumeration(tuple(c.state for c in found), complete, symbolic)


def _with_arg(c: Compound, k: int, value: Term) -> Compound:
    args = list(c.args)
    args[k] = value
    return Compound(c.functor, tuple(args))


# -- class moves and generators for compatibility checks ----------------------

def neighbours(spec: EquivSpec, s: ChrState) -> List[ChrState]:
    """Deterministic one-step moves inside the ``≈``-class of ``s``."""
    s = normalize(s)
    if isinstance(spec, Identity):
        return [s]
    if isinstance(spec, ListPerm):
        return list(class_representatives(spec, s, 24).states)
    if isinstance(spec, PairCollapse):
        c, d = Atom(spec.c), Atom(spec.d)
        out = []
        goal = list(s.goal)
        if goal.count(c) >= 2:
            g = list(goal)
            g.remove(c)
            g.remove(c)
            out.append(normalize(ChrState(tuple(g) + (d,), s.builtins, s.globals)))
        if d in goal:
            g = list(goal)
            g.remove(d)
            out.append(normalize(ChrState(tuple(g) + (c, c), s.builtins, s.globals)))
        return out
    if isinstance(spec, CountPartition):
        key = (spec.functor, spec.arity)
        n = _count(s, key)
        side = n < spec.threshold
        tagged = _sample_constraint(spec)
        out = []
        if (n + 1 < spec.threshold) == side:
            out.append(normalize(ChrState(s.goal + (tagged,), s.builtins, s.globals)))
        if n > 0 and ((n - 1) < spec.threshold) == side:
            g = list(s.goal)
            g.pop(next(i for i, x in enumerate(g) if functor_of(x) == key))
            out.append(normalize(ChrState(tuple(g), s.builtins, s.globals)))
        out.append(normalize(ChrState(s.goal + (Atom("other"),), s.builtins, s.globals)))
        return out
    raise TypeError(f"unknown equivalence {spec!r}")


def _sample_constraint(spec: CountPartition) -> Term:
    if spec.arity == 0:
        return Atom(spec.functor)
    return Compound(spec.functor, (Atom("a"),) * spec.arity)


def random_move(spec: EquivSpec, s: ChrState, rng: random.Random) -> ChrState:
    """A random member of the ``≈``-class of ``s`` reached by class moves."""
    s = normalize(s)
    if isinstance(spec, ListPerm):
        tag, k = _tag(spec), spec.arg - 1
        goal = []
        for c in s.goal:
            if functor_of(c) == tag:
                items, tail = list_parts(c.args[k])
                items = list(items)
                rng.shuffle(items)
                c = _with_arg(c, k, mklist(items, tail))
            goal.append(c)
        rng.shuffle(goal)
        return normalize(ChrState(tuple(goal), s.builtins, s.globals))
    if isinstance(spec, Identity):
        goal = list(s.goal)
        rng.shuffle(goal)
        return normalize(ChrState(tuple(goal), s.builtins, s.globals))
    for _ in range(rng.randint(1, 3)):
        options = neighbours(spec, s)
        if not options:
            break
        s = rng.choice(options)
    return s


def alphabet(spec: EquivSpec) -> List[Tuple[str, int]]:
    if isinstance(spec, ListPerm):
        return [(spec.functor, spec.arity), ("item", 1), ("other", 0)]
    if isinstance(spec, CountPartition):
        return [(spec.functor, spec.arity), ("other", 0)]
    if isinstance(spec, PairCollapse):
        return [(spec.c, 0), (spec.d, 0), ("other", 0)]
    return [("p", 1), ("q", 0)]


def _tagged_random_state(spec: EquivSpec, rng: random.Random, size_bound: int,
                         extra: Sequence[Tuple[str, int]] = (), variables=("X", "Y"),
                         binding_prob: float = 0.2) -> ChrState:
    functors = alphabet(spec) + [f for f in extra if f not in alphabet(spec)]
    s = random_state(rng, functors, ("a", "b", "c"), size_bound, variables, global_prob=0.7,
                     binding_prob=binding_prob)
    if isinstance(spec, ListPerm):
        # the tagged argument must be a list
        k = spec.arg - 1
        from .generators import random_list
        goal = []
        for c in s.goal:
            if functor_of(c) == _tag(spec):
                c = _with_arg(c, k, random_list(rng, ("a", "b", "c"), 3, variables,
                                                tail_vars=variables))
            goal.append(c)
        s = ChrState(tuple(goal), s.builtins, s.globals)
    return normalize(s)


def small_states(spec: EquivSpec, max_size: int, extra: Sequence[Tuple[str, int]] = ()) -> List[ChrState]:
    """All ground states over the relation's alphabet with at most
    ``max_size`` constraints (lists of length <= 2 over {a, b})."""
    functors = alphabet(spec) + [f for f in extra if f not in alphabet(spec)]
    atoms: List[Term] = []
    lists = [mklist([Atom(x) for x in xs]) for n in range(3) for xs in itertools.product("ab", repeat=n)]
    for f, n in functors:
        if n == 0:
            atoms.append(Atom(f))
            continue
        pools = []
        for i in range(n):
            if isinstance(spec, ListPerm) and (f, n) == _tag(spec) and i == spec.arg - 1:
                pools.append(lists)
            else:
                pools.append([Atom("a"), Atom("b")])
        atoms.extend(Compound(f, args) for args in itertools.product(*pools))
    out = []
    for size in range(max_size + 1):
        for goal in itertools.combinations_with_replacement(atoms, size):
            out.append(normalize(ChrState(goal)))
    return out


# -- compatibility checks ------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    ok: bool
    trials: int
    witness: Optional[dict] = None
    note: str = ""

    def to_json(self) -> dict:
        out = {"status": "pass" if self.ok else "fail", "trials": self.trials}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.note:
            out["note"] = self.note
        return out


def _is_true(x) -> bool:
    return x is True


def _subgoals(goal: Sequence[Term]) -> Iterator[Tuple[Tuple[Term, ...], Tuple[Term, ...]]]:
    seen = set()
    n = len(goal)
    for mask in range(1 << n):
        left = tuple(goal[i] for i in range(n) if mask >> i & 1)
        right = tuple(goal[i] for i in range(n) if not mask >> i & 1)
        key = (tuple(sorted(map(str, left))), tuple(sorted(map(str, right))))
        if key in seen:
            continue
        seen.add(key)
        yield left, right


def check_congruence(spec: EquivSpec, trials: int = 1000, size_bound: int = 3,
                     rng: Optional[random.Random] = None) -> CheckResult:
    """Refutation search for: x ≈ x', y ≈ y' implies x ◇_V y ≈ x' ◇_V y'."""
    rng = rng or random.Random(0)

    def test(x, x2, y, y2, V):
        left, right = merge(x, y, V), merge(x2, y2, V)
        if not _is_true(equivalent(spec, left, right)):
            return {"x": state_to_json(x), "x_prime": state_to_json(x2),
                    "y": state_to_json(y), "y_prime": state_to_json(y2),
                    "V": sorted(V), "merged": state_to_json(left),
                    "merged_prime": state_to_json(right)}
        return None

    # exhaustive over tiny ground states, nonempty operands first
    tiny = [s for s in small_states(spec, 2) if s.goal]
    ys = [s for s in small_states(spec, 1) if s.goal]
    for x in tiny:
        for x2 in neighbours(spec, x):
            for y in ys:
                w = test(x, x2, y, y, frozenset())
                if w:
                    return CheckResult("congruence", False, 0, w)
    for t in range(trials):
        x = _tagged_random_state(spec, rng, size_bound)
        y = _tagged_random_state(spec, rng, size_bound)
        x2, y2 = random_move(spec, x, rng), random_move(spec, y, rng)
        V = frozenset(v for v in sorted(x.globals | y.globals) if rng.random() < 0.5)
        w = test(x, x2, y, y2, V)
        if w:
            return CheckResult("congruence", False, t + 1, w)
    return CheckResult("congruence", True, trials, note="no counterexample found (evidence, not proof)")


def _binding_subsets(y: ChrState) -> List[EquationSet]:
    pairs = [(Var(v), t) for v, t in sorted(y.bindings().items())]
    out = []
    for mask in range(1 << len(pairs)):
        out.append(EquationSet(tuple(p for i, p in enumerate(pairs) if mask >> i & 1)))
    return out


def find_split(spec: EquivSpec, y: ChrState, x1: ChrState, x2: ChrState) -> Optional[Tuple[ChrState, ChrState]]:
    """Search y1 ≈ x1, y2 ≈ x2 with y ≡ y1 ◇ y2 among splits of y's goal
    and of its global bindings."""
    y = normalize(y)
    if states_equivalent(y, merge(x1, x2)):
        return normalize(x1), normalize(x2)
    if y.failed:
        return None
    subsets = _binding_subsets(y)
    for left, right in _subgoals(y.goal):
        for b1 in subsets:
            y1 = ChrState(left, b1, y.globals)
            if not _is_true(equivalent(spec, y1, x1)):
                continue
            for b2 in subsets:
                y2 = ChrState(right, b2, y.globals)
                if not _is_true(equivalent(spec, y2, x2)):
                    continue
                if states_equivalent(merge(y1, y2), y):
                    return normalize(y1), normalize(y2)
    return None


def check_split(spec: EquivSpec, trials: int = 1000, size_bound: int = 2,
                rng: Optional[random.Random] = None) -> CheckResult:
    """Refutation search for: x = x1 ◇ x2, x ≈ y implies y ≡ y1 ◇ y2 with
    y1 ≈ x1 and y2 ≈ x2."""
    rng = rng or random.Random(0)

    def test(x1, x2, y):
        if find_split(spec, y, x1, x2) is None:
            return {"x1": state_to_json(x1), "x2": state_to_json(x2),
                    "x": state_to_json(merge(x1, x2)), "y": state_to_json(y)}
        return None

    tiny = small_states(spec, 1)
    for x1 in tiny:
        for x2 in tiny:
            x = merge(x1, x2)
            for y in neighbours(spec, x):
                w = test(x1, x2, y)
                if w:
                    return CheckResult("split", False, 0, w)
    for t in range(trials):
        # operands carry no bindings: normalization would substitute them
        # into the goal, which the split search cannot undo
        x1 = _tagged_random_state(spec, rng, size_bound, binding_prob=0.0)
        x2 = _tagged_random_state(spec, rng, size_bound, binding_prob=0.0)
        y = random_move(spec, merge(x1, x2), rng)
        w = test(x1, x2, y)
        if w:
            return CheckResult("split", False, t + 1, w)
    return CheckResult("split", True, trials, note="no counterexample found (evidence, not proof)")


def _functors_of(inv: InvariantSpec) -> List[Tuple[str, int]]:
    from .specs import Conjunction, FunctorCount, Ground
    if isinstance(inv, (FunctorCount, Ground)):
        return [(inv.functor, inv.arity)]
    if isinstance(inv, Conjunction):
        return [f for p in inv.parts for f in _functors_of(p)]
    return []


def check_maintains(spec: EquivSpec, inv: InvariantSpec, trials: int = 1000,
                    size_bound: int = 3, rng: Optional[random.Random] = None) -> CheckResult:
    """Refutation search for: x ≈ x' implies I(x) <-> I(x')."""
    rng = rng or random.Random(0)
    extra = _functors_of(inv)

    def test(x, x2):
        if holds(inv, x) != holds(inv, x2):
            return {"x": state_to_json(x), "x_prime": state_to_json(x2),
                    "holds_x": holds(inv, x), "holds_x_prime": holds(inv, x2)}
        return None

    # larger states first, so a collapse is reported before an expansion
    for x in sorted(small_states(spec, 2, extra), key=lambda s: -len(s.goal)):
        for x2 in neighbours(spec, x):
            w = test(x, x2)
            if w:
                return CheckResult("maintains", False, 0, w)
    for t in range(trials):
        x = _tagged_random_state(spec, rng, size_bound, extra)
        w = test(x, random_move(spec, x, rng))
        if w:
            return CheckResult("maintains", False, t + 1, w)
    return CheckResult("maintains", True, trials, note="no counterexample found (evidence, not proof)")


@dataclass
class CompatReport:
    congruence: CheckResult
    split: CheckResult
    maintains: Optional[CheckResult] = None
    trials: int = 0

    @property
    def compatible(self) -> bool:
        return self.congruence.ok and self.split.ok

    @property
    def ok(self) -> bool:
        return self.compatible and (self.maintains is None or self.maintains.ok)

    def to_json(self) -> dict:
        out = {
            "congruence": self.congruence.to_json(),
            "split": self.split.to_json(),
            "trials": self.trials,
            "evidence_only": True,
        }
        if self.maintains is not None:
            out["maintains_invariant"] = self.maintains.to_json()
        return out


def compat_report(spec: EquivSpec, inv: Optional[InvariantSpec] = None,
                  trials: int = 1000, seed: int = 0) -> CompatReport:
    """Congruence, split and (optionally) invariant maintenance, each with
    its own seeded generator so results do not depend on check order."""
    return CompatReport(
        check_congruence(spec, trials, rng=random.Random(seed)),
        check_split(spec, trials, rng=random.Random(seed + 1)),
        check_maintains(spec, inv, trials, rng=random.Random(seed + 2)) if inv is not None else None,
        trials,
    )
