"""Joinability modulo an equivalence, the α and β tests, and the overall
verdict."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .engine import Exploration, explore, successors
from .equivalence import (
    CompatReport,
    Obligation,
    Perms,
    class_representatives,
    compat_report,
    equivalent,
    quick_key,
)
from .generators import DEFAULT_CONSTANTS
from .invariants import PreservationResult, check_preservation, holds, minimal_extensions
from .overlaps import OverlapDescriptor, all_overlaps, rule_state
from .specs import AnalysisConfig, Identity, ListPerm
from .state import ChrState, StateClass, format_state, merge, normalize, state_to_json
from .syntax import Program
from .terms import Atom, Var, format_term, functor_of, list_parts, mklist, substitute

JOINABLE, NOT_JOINABLE, UNKNOWN = "joinable", "not_joinable", "unknown"
CONFLUENT, NOT_CONFLUENT = "confluent", "not_confluent"

Derivation = List[Tuple[Optional[str], ChrState]]


@dataclass
class JoinVerdict:
    status: str
    left: ChrState
    right: ChrState
    witnesses: Tuple[ChrState, ...] = ()
    left_finals: Tuple[ChrState, ...] = ()
    right_finals: Tuple[ChrState, ...] = ()
    derivations: Tuple[Derivation, Derivation] = ((), ())
    obligations: Tuple[str, ...] = ()
    bound_exhausted: bool = False
    label: str = ""
    vacuous: bool = False
    complete: bool = True
    concrete: bool = True     # a not_joinable here refutes confluence

    @property
    def joinable(self) -> bool:
        return self.status == JOINABLE

    def to_json(self) -> dict:
        out = {
            "label": self.label,
            "status": self.status,
            "left": state_to_json(self.left),
            "right": state_to_json(self.right),
            "bound_exhausted": self.bound_exhausted,
            "vacuous": self.vacuous,
            "complete": self.complete,
            "obligations": list(self.obligations),
        }
        if self.witnesses:
            out["witnesses"] = [state_to_json(s) for s in self.witnesses]
        if self.status == NOT_JOINABLE:
            out["left_finals"] = [state_to_json(s) for s in self.left_finals]
            out["right_finals"] = [state_to_json(s) for s in self.right_finals]
        if any(self.derivations):
            out["derivations"] = [[{"rule": r, "state": state_to_json(s)} for r, s in d]
                                  for d in self.derivations]
        return out


def _path(ex: Exploration, target: StateClass) -> Derivation:
    return [(rule, cls.state) for rule, cls in ex.path_to(target)]


def joinable_mod(p: Program, s1: ChrState, s2: ChrState, e=None, bound: int = 1000,
                 perms: Optional[Perms] = None, max_states: int = 20000,
                 label: str = "") -> JoinVerdict:
    """Decide ``s1 ↓≈ s2`` by bounded exhaustive exploration of both sides.

    Finals are compared first, then all reachable states, since joining
    does not require final states."""
    if bound < 1:
        raise ValueError("bound must be >= 1")
    e = e if e is not None else Identity()
    s1, s2 = normalize(s1), normalize(s2)
    first = equivalent(e, s1, s2, perms)
    if first is True:
        return JoinVerdict(JOINABLE, s1, s2, (s1, s2), derivations=([(None, s1)], [(None, s2)]),
                           label=label)
    ex1 = explore(p, s1, bound, max_states)
    ex2 = explore(p, s2, bound, max_states)
    obligation: Optional[Tuple[StateClass, StateClass, Obligation]] = None
    if isinstance(first, Obligation):
        obligation = (ex1.start, ex2.start, first)

    def search(xs, ys):
        nonlocal obligation
        buckets: Dict[object, List[StateClass]] = {}
        for y in ys:
            buckets.setdefault(quick_key(e, y.state), []).append(y)
        for x in xs:
            for y in buckets.get(quick_key(e, x.state), ()):
                res = equivalent(e, x.state, y.state, perms)
                if res is True:
                    return x, y
                if obligation is None and isinstance(res, Obligation):
                    obligation = (x, y, res)
        return None

    hit = search(ex1.finals, ex2.finals) or search(ex1.states, ex2.states)
    exhausted = ex1.exhausted or ex2.exhausted
    finals = (tuple(c.state for c in ex1.finals), tuple(c.state for c in ex2.finals))
    if hit:
        x, y = hit
        return JoinVerdict(JOINABLE, s1, s2, (x.state, y.state), *finals,
                           (_path(ex1, x), _path(ex2, y)), bound_exhausted=exhausted, label=label)
    if obligation is not None:
        x, y, ob = obligation
        return JoinVerdict(UNKNOWN, s1, s2, (x.state, y.state), *finals,
                           (_path(ex1, x), _path(ex2, y)), (str(ob),), exhausted, label)
    if exhausted:
        return JoinVerdict(UNKNOWN, s1, s2, (), *finals, bound_exhausted=True, label=label)
    d1 = _path(ex1, ex1.finals[0]) if ex1.finals else []
    d2 = _path(ex2, ex2.finals[0]) if ex2.finals else []
    return JoinVerdict(NOT_JOINABLE, s1, s2, (), *finals, (d1, d2), label=label)


# -- α test --------------------------------------------------------------------

def alpha_check(p: Program, inv, e, cfg: AnalysisConfig) -> List[JoinVerdict]:
    """Join every critical pair, extended by each minimal extension of its
    overlap state."""
    signature = p.constants()
    out: List[JoinVerdict] = []
    for desc, cp in all_overlaps(p):
        exts = minimal_extensions(inv, desc.overlap_state, signature)
        if not exts.extensions:
            out.append(JoinVerdict(JOINABLE if exts.complete else UNKNOWN, cp.left, cp.right,
                                   label=desc.label, vacuous=exts.complete, complete=exts.complete))
            continue
        for ext in exts:
            label = desc.label if not ext.builtins.equations and not ext.goal else \
                f"{desc.label} with {format_state(ext)}"
            v = joinable_mod(p, merge(cp.left, ext), merge(cp.right, ext), e,
                             cfg.derivation_bound, max_states=cfg.max_states, label=label)
            v.complete = exts.complete
            out.append(v)
    return out


# -- β test --------------------------------------------------------------------

def _sweep_instances(spec: ListPerm, s: ChrState, constants: Sequence[str],
                     length: int) -> List[Tuple[str, ChrState]]:
    """Instances of ``s`` whose tagged list tails are ground lists up to
    ``length`` elements."""
    tails = []
    for c in s.goal:
        if functor_of(c) == (spec.functor, spec.arity):
            _, tail = list_parts(c.args[spec.arg - 1])
            if isinstance(tail, Var) and tail.name not in tails and tail.name in s.globals:
                tails.append(tail.name)
    if not tails:
        return []
    lists = [mklist([Atom(x) for x in xs])
             for n in range(length + 1) for xs in itertools.product(constants, repeat=n)]
    out = []
    for combo in itertools.product(lists, repeat=len(tails)):
        theta = dict(zip(tails, combo))
        goal = tuple(substitute(c, theta) for c in s.goal)
        inst = normalize(ChrState(goal, s.builtins, s.globals - set(tails)))
        tag = ", ".join(f"{v}={format_term(t)}" for v, t in zip(tails, combo))
        out.append((tag, inst))
    return out


def _beta_for_state(p: Program, inv, e, cfg: AnalysisConfig, sigma: ChrState,
                    label: str, signature) -> List[JoinVerdict]:
    out: List[JoinVerdict] = []
    exts1 = minimal_extensions(inv, sigma, signature)
    succs = successors(p, sigma)
    reps = class_representatives(e, sigma, cfg.representative_budget)
    for inst, s1 in succs:
        for m1 in exts1:
            start = merge(sigma, m1)
            left = merge(s1.state, m1)
            m_reps = class_representatives(e, m1, cfg.representative_budget)
            # a symbolic representative stands in for the unenumerated part
            # of the class; its obligation records what remains
            complete = exts1.complete and m_reps.complete and (reps.complete or bool(reps.symbolic))
            for i, s2 in enumerate(reps.states):
                for m2 in m_reps.states:
                    right = merge(s2, m2)
                    if not holds(inv, right):
                        continue
                    tag = f"{label} via {inst.rule.name}"
                    if len(reps.states) > 1:
                        tag += f" vs representative {i + 1}"
                    if m1.goal or m1.builtins.equations:
                        tag += f" with {format_state(m1)}"
                    v = joinable_mod(p, left, right, e, cfg.derivation_bound,
                                     max_states=cfg.max_states, label=tag)
                    v.complete = complete
                    if v.status == NOT_JOINABLE:
                        v.concrete = equivalent(e, start, right) is True and holds(inv, start)
                    out.append(v)
            for sym in reps.symbolic:
                right = merge(sym.state, m1)
                if not holds(inv, right):
                    continue
                v = joinable_mod(p, left, right, e, cfg.derivation_bound,
                                 perms=dict(sym.perms), max_states=cfg.max_states,
                                 label=f"{label} via {inst.rule.name} vs symbolic "
                                       f"{format_state(sym.state)}")
                v.complete = False
                v.concrete = False
                if not v.obligations and v.status == JOINABLE:
                    # joined without appeal to the permutation facts
                    v.complete = True
                out.append(v)
    return out


def beta_check(p: Program, inv, e, cfg: AnalysisConfig) -> List[JoinVerdict]:
    """Join each rule-state step with every enumerated equivalent state."""
    signature = p.constants()
    out: List[JoinVerdict] = []
    for r in p.rules:
        sigma = rule_state(r)
        out.extend(_beta_for_state(p, inv, e, cfg, sigma, f"rule state {r.name}", signature))
        if isinstance(e, ListPerm) and class_representatives(e, sigma, 1).symbolic:
            constants = sorted(set(signature) | set(DEFAULT_CONSTANTS))
            for tag, inst in _sweep_instances(e, sigma, constants, cfg.sweep_length):
                out.extend(_beta_for_state(p, inv, e, cfg, inst,
                                           f"rule state {r.name} [{tag}]", signature))
    return out


# -- verdict -------------------------------------------------------------------

@dataclass
class ConfluenceReport:
    program: Program
    config: AnalysisConfig
    overlaps: List[OverlapDescriptor]
    alpha: List[JoinVerdict]
    beta: List[JoinVerdict]
    compat: CompatReport
    preservation: PreservationResult
    verdict: str
    notes: List[str] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)

    @property
    def obligations(self) -> List[str]:
        seen: List[str] = []
        for v in self.alpha + self.beta:
            for ob in v.obligations:
                if ob not in seen:
                    seen.append(ob)
        return seen

    @property
    def complete(self) -> bool:
        return all(v.complete for v in self.alpha + self.beta)

    @property
    def confluent_with_obligations(self) -> bool:
        return "confluent_with_obligations" in self.notes

    def refutations(self) -> List[JoinVerdict]:
        return [v for v in self.alpha + self.beta if v.status == NOT_JOINABLE and v.concrete]

    def witness(self) -> Optional[JoinVerdict]:
        """The refutation whose final stores are largest (earliest on ties)."""
        size = lambda v: sum(len(s.goal) for s in v.left_finals + v.right_finals)
        found = self.refutations()
        return max(found, key=size) if found else None


def confluence_verdict(p: Program, cfg: Optional[AnalysisConfig] = None) -> ConfluenceReport:
    cfg = cfg or AnalysisConfig()
    inv, e = cfg.invariant, cfg.equivalence
    compat = compat_report(e, inv, cfg.trials, cfg.seed)
    preservation = check_preservation(p, inv, rng=random.Random(cfg.seed))
    warnings = []
    if not compat.congruence.ok:
        warnings.append("equivalence is not a congruence: the α test is not sound for it")
    if not compat.ok:
        warnings.append("equivalence is not compatible or does not maintain the invariant: "
                        "the β test is not sound for it")
    if not preservation.ok:
        warnings.append("invariant is not preserved by the program")
    alpha = alpha_check(p, inv, e, cfg)
    beta = beta_check(p, inv, e, cfg)
    report = ConfluenceReport(p, cfg, [d for d, _ in all_overlaps(p)], alpha, beta, compat,
                              preservation, UNKNOWN, warnings=warnings)
    notes = report.notes
    if report.witness() is not None:
        report.verdict = NOT_CONFLUENT
        notes.append(f"non-joinable: {report.witness().label}")
        return report
    blockers = []
    if any(v.status != JOINABLE for v in alpha + beta if not v.obligations):
        blockers.append("some joinability checks were inconclusive (derivation bound exhausted)")
    if not compat.ok:
        blockers.append("compatibility checks failed")
    if not preservation.ok:
        blockers.append("invariant preservation failed")
    if not cfg.termination_assumed:
        blockers.append("termination not assumed (pass --assume-terminating)")
    incomplete = [v.label for v in alpha + beta if not v.complete and not v.obligations]
    if incomplete:
        blockers.append("enumeration incomplete for: " + "; ".join(incomplete[:5]) +
                        ("" if len(incomplete) <= 5 else f" (+{len(incomplete) - 5} more)"))
    obligations = report.obligations
    if not blockers and not obligations:
        report.verdict = CONFLUENT
    elif not blockers:
        notes.append("confluent_with_obligations")
        notes.extend(f"residual obligation: {ob}" for ob in obligations)
    else:
        notes.extend(blockers)
        notes.extend(f"residual obligation: {ob}" for ob in obligations)
    return report
