"""CHR states, state equivalence, merging and the extension order."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from .terms import (
    FALSE,
    TRUE,
    Compound,
    EquationSet,
    Term,
    Var,
    base_name,
    format_term,
    fresh_name,
    functor_of,
    order_key,
    rename,
    solve,
    substitute,
    vars_in,
    vars_in_order,
)


@dataclass(frozen=True)
class ChrState:
    """``<goal; builtins; globals>``.  Any variable not in ``globals`` is local."""

    goal: Tuple[Term, ...] = ()
    builtins: EquationSet = TRUE
    globals: FrozenSet[str] = frozenset()

    @property
    def failed(self) -> bool:
        return self.builtins.inconsistent

    def variables(self) -> set:
        return vars_in(self.goal) | self.builtins.variables()

    def local_vars(self) -> set:
        return self.variables() - self.globals

    def used_globals(self) -> set:
        return self.variables() & self.globals

    def bindings(self) -> Dict[str, Term]:
        """Global bindings of a normalized state."""
        return {a.name: b for a, b in self.builtins.equations if isinstance(a, Var)}

    def __str__(self) -> str:
        return format_state(self)


EMPTY = ChrState()
FAILED = ChrState((), FALSE, frozenset())


def make_state(goal: Iterable[Term] = (), builtins: Iterable = (), globals: Iterable[str] = ()) -> ChrState:
    eqs = builtins if isinstance(builtins, EquationSet) else EquationSet.of(builtins)
    return ChrState(tuple(goal), eqs, frozenset(globals))


def _goal_sort_key(locals_: frozenset):
    return lambda c: order_key(c, locals_)


def normalize(s: ChrState) -> ChrState:
    """Canonical representative: builtins solved and applied, local bindings
    eliminated, goal sorted.  Unsatisfiable builtins give ``FAILED``."""
    if s.failed:
        return FAILED
    theta = solve(s.builtins, prefer=s.globals)
    if theta is None:
        return FAILED
    goal = [substitute(c, theta) for c in s.goal]
    eqs = tuple((Var(x), theta[x]) for x in sorted(s.globals) if x in theta)
    locals_ = frozenset((vars_in(goal) | vars_in(t for _, t in eqs)) - s.globals)
    goal.sort(key=_goal_sort_key(locals_))
    return ChrState(tuple(goal), EquationSet(eqs), s.globals)


def abstract_key(s: ChrState):
    """Hash key invariant under renaming of local variables."""
    if s.failed:
        return ("failed",)
    locals_ = frozenset(s.local_vars())
    goal = tuple(sorted(order_key(c, locals_) for c in s.goal))
    eqs = tuple((a.name, order_key(b, locals_)) for a, b in s.builtins.equations)
    return goal, eqs


# -- variant matching under a local-variable bijection ---------------------

Renaming = Tuple[Dict[str, str], Dict[str, str]]


def variant(t1: Term, t2: Term, ren: Renaming, locals1: frozenset, locals2: frozenset) -> Optional[Renaming]:
    """Extend the bijection ``ren`` (locals1 -> locals2) so that t1 and t2 are
    identical up to it.  Global variables must coincide by name."""
    fwd, bwd = ren
    copied = False
    stack = [(t1, t2)]
    while stack:
        a, b = stack.pop()
        if isinstance(a, Var) or isinstance(b, Var):
            if not (isinstance(a, Var) and isinstance(b, Var)):
                return None
            la, lb = a.name in locals1, b.name in locals2
            if la != lb:
                return None
            if not la:
                if a.name != b.name:
                    return None
                continue
            cur = fwd.get(a.name)
            if cur is not None:
                if cur != b.name:
                    return None
                continue
            if b.name in bwd:
                return None
            if not copied:
                fwd, bwd = dict(fwd), dict(bwd)
                copied = True
            fwd[a.name] = b.name
            bwd[b.name] = a.name
        elif isinstance(a, Compound):
            if not isinstance(b, Compound) or a.functor != b.functor or len(a.args) != len(b.args):
                return None
            stack.extend(zip(a.args, b.args))
        elif a != b:
            return None
    return fwd, bwd


PairFn = Callable[[Term, Term, Renaming], Iterator[Renaming]]


def goal_bijections(goal1: Sequence[Term], goal2: Sequence[Term], ren: Renaming,
                    pair: PairFn, group1: Callable[[Term], object],
                    group2: Optional[Callable[[Term], object]] = None) -> Iterator[Renaming]:
    """All ways (as renamings) to pair goal1 with goal2 bijectively so that
    ``pair`` accepts every matched couple.  Any two pairable constraints must
    share their group key; the keys prune the search."""
    group2 = group2 or group1
    if len(goal1) != len(goal2):
        return
    buckets1: Dict[object, List[Term]] = {}
    buckets2: Dict[object, List[Term]] = {}
    for c in goal1:
        buckets1.setdefault(group1(c), []).append(c)
    for c in goal2:
        buckets2.setdefault(group2(c), []).append(c)
    if buckets1.keys() != buckets2.keys():
        return
    if any(len(buckets1[k]) != len(buckets2[k]) for k in buckets1):
        return
    # fewest candidates first
    order = sorted(buckets1, key=lambda k: (len(buckets1[k]), repr(k)))
    items = [(c, buckets2[k]) for k in order for c in buckets1[k]]

    def search(i: int, used: frozenset, ren: Renaming) -> Iterator[Renaming]:
        if i == len(items):
            yield ren
            return
        c1, candidates = items[i]
        tried = set()
        for j, c2 in enumerate(candidates):
            key = (id(candidates), j)
            if key in used or (id(candidates), c2) in tried:
                continue
            tried.add((id(candidates), c2))
            for ren2 in pair(c1, c2, ren):
                yield from search(i + 1, used | {key}, ren2)

    yield from search(0, frozenset(), ren)


def _match_builtins(n1: ChrState, n2: ChrState, ren: Renaming, l1, l2) -> Optional[Renaming]:
    b1, b2 = n1.bindings(), n2.bindings()
    # a bound variable that is global on one side only cannot be matched
    if b1.keys() != b2.keys():
        return None
    for x in sorted(b1):
        ren = variant(b1[x], b2[x], ren, l1, l2)
        if ren is None:
            return None
    return ren


def states_equivalent(s1: ChrState, s2: ChrState, normalized: bool = False) -> bool:
    """Decide ``s1 ≡ s2`` over Herbrand equality."""
    n1 = s1 if normalized else normalize(s1)
    n2 = s2 if normalized else normalize(s2)
    if n1.failed or n2.failed:
        return n1.failed and n2.failed
    if len(n1.goal) != len(n2.goal):
        return False
    l1, l2 = frozenset(n1.local_vars()), frozenset(n2.local_vars())
    # a variable occurring globally on one side must be global on the other
    if n1.used_globals() != n2.used_globals():
        return False
    ren = _match_builtins(n1, n2, ({}, {}), l1, l2)
    if ren is None:
        return False

    def pair(c1, c2, r):
        out = variant(c1, c2, r, l1, l2)
        if out is not None:
            yield out

    for _ in goal_bijections(n1.goal, n2.goal, ren, pair,
                             lambda c: order_key(c, l1), lambda c: order_key(c, l2)):
        return True
    return False


class StateClass:
    """An equivalence class ``[s]`` under ``≡``; hashable for memoization."""

    __slots__ = ("state", "_key")

    def __init__(self, state: ChrState, normalized: bool = False):
        self.state = state if normalized else normalize(state)
        self._key = abstract_key(self.state)

    def __hash__(self) -> int:
        return hash(self._key)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StateClass):
            return NotImplemented
        return self._key == other._key and states_equivalent(self.state, other.state, normalized=True)

    def __repr__(self) -> str:
        return f"StateClass({format_state(self.state)})"

    def __str__(self) -> str:
        return format_state(self.state)


# -- merging and the extension order ---------------------------------------

def rename_locals_fresh(s: ChrState) -> ChrState:
    mapping = {v: fresh_name(v) for v in sorted(s.local_vars())}
    if not mapping:
        return s
    goal = tuple(rename(c, mapping) for c in s.goal)
    eqs = tuple((rename(a, mapping), rename(b, mapping)) for a, b in s.builtins.equations)
    return ChrState(goal, EquationSet(eqs, s.builtins.inconsistent), s.globals)


def merge(s1: ChrState, s2: ChrState, V: Iterable[str] = ()) -> ChrState:
    """``s1 ◇_V s2``.  Local variables of both operands are renamed apart."""
    a = rename_locals_fresh(s1)
    b = rename_locals_fresh(s2)
    glob = (a.globals | b.globals) - frozenset(V)
    return normalize(ChrState(a.goal + b.goal, a.builtins & b.builtins, glob))


def try_extension_remainder(base: ChrState, whole: ChrState) -> Optional[ChrState]:
    """Find ``δ`` with ``[whole] = [base] ◇ [δ]``, or None if base ⋪ whole."""
    nb, nw = normalize(base), normalize(whole)
    if nw.failed:
        # [failed] = [base] ◇ [failed] for any base
        return FAILED
    if nb.failed or len(nb.goal) > len(nw.goal):
        return None
    fb = [functor_of(c) for c in nb.goal]
    fw = [functor_of(c) for c in nw.goal]
    seen = set()
    for positions in itertools.permutations(range(len(nw.goal)), len(nb.goal)):
        if any(fb[i] != fw[j] for i, j in enumerate(positions)):
            continue
        rest = frozenset(positions)
        if rest in seen:
            continue
        seen.add(rest)
        remainder = tuple(c for j, c in enumerate(nw.goal) if j not in rest)
        delta = ChrState(remainder, nw.builtins, nw.globals)
        if states_equivalent(merge(nb, delta), nw):
            return normalize(delta)
    return None


# -- printing --------------------------------------------------------------

def display_names(s: ChrState) -> Dict[str, str]:
    """Readable, collision-free names for the local variables of ``s``."""
    terms = list(s.goal) + [t for eq in s.builtins.equations for t in eq]
    locals_ = s.local_vars()
    taken = set(s.globals)
    out: Dict[str, str] = {}
    for v in vars_in_order(terms):
        if v not in locals_:
            continue
        stem = base_name(v)
        name, n = stem, 0
        while name in taken:
            n += 1
            name = f"{stem}{n}"
        taken.add(name)
        out[v] = name
    return out


def format_state(s: ChrState, pretty: bool = True) -> str:
    if s.failed:
        return "true ; false ; []"
    mapping = display_names(s) if pretty else {}
    goal = ", ".join(format_term(rename(c, mapping)) for c in s.goal) or "true"
    eqs = [f"{format_term(rename(a, mapping))}={format_term(rename(b, mapping))}"
           for a, b in s.builtins.equations]
    return f"{goal} ; {', '.join(eqs) or 'true'} ; [{','.join(sorted(s.globals))}]"


def state_to_json(s: ChrState) -> dict:
    mapping = display_names(s)
    return {
        "goal": [format_term(rename(c, mapping)) for c in s.goal],
        "builtins": "false" if s.failed else [
            f"{format_term(rename(a, mapping))}={format_term(rename(b, mapping))}"
            for a, b in s.builtins.equations],
        "globals": sorted(s.globals),
        "text": format_state(s),
    }
