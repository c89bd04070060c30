"""Report documents: JSON payloads (schema ``report_v1``) and text."""

from __future__ import annotations

import hashlib
import json
from importlib import resources
from typing import Dict, List, Optional, Sequence, Tuple

from .checker import CONFLUENT, NOT_CONFLUENT, ConfluenceReport, JoinVerdict
from .equivalence import CompatReport
from .specs import AnalysisConfig
from .state import ChrState, format_state, state_to_json

SCHEMA_ID = "report_v1"
TOOL_VERSION = "0.1.0"


def program_digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode("utf-8")).hexdigest()


def load_schema() -> dict:
    return json.loads(resources.files("chrconf").joinpath("report_v1.schema.json").read_text("utf-8"))


def _envelope(command: str, text: Optional[str], timings: Optional[Dict[str, float]]) -> dict:
    doc = {"schema": SCHEMA_ID, "tool_version": TOOL_VERSION, "command": command}
    if text is not None:
        doc["program_digest"] = program_digest(text)
    if timings is not None:
        doc["timings"] = {k: round(v, 6) for k, v in timings.items()}
    return doc


def check_document(r: ConfluenceReport, program_text: str,
                   timings: Optional[Dict[str, float]] = None) -> dict:
    doc = _envelope("check", program_text, timings)
    w = r.witness()
    doc.update({
        "config": r.config.to_json(),
        "verdict": r.verdict,
        "confluent_with_obligations": r.confluent_with_obligations,
        "assumptions": {"termination_assumed": r.config.termination_assumed,
                        "enumerations_complete": r.complete},
        "notes": list(r.notes),
        "warnings": list(r.warnings),
        "overlap_count": len(r.overlaps),
        "overlaps": [d.to_json() for d in r.overlaps],
        "alpha": [v.to_json() for v in r.alpha],
        "beta": [v.to_json() for v in r.beta],
        "compat": r.compat.to_json(),
        "preservation": r.preservation.to_json(),
        "obligations": r.obligations,
        "witness": w.to_json() if w is not None else None,
    })
    return doc


def run_document(start: ChrState, finals: Sequence[ChrState], exhausted: bool, bound: int,
                 program_text: str, timings: Optional[Dict[str, float]] = None) -> dict:
    doc = _envelope("run", program_text, timings)
    doc.update({
        "start": state_to_json(start),
        "bound": bound,
        "bound_exhausted": exhausted,
        "finals": [state_to_json(s) for s in finals],
    })
    return doc


def compat_document(results: Sequence[Tuple[str, CompatReport]], cfg: AnalysisConfig,
                    timings: Optional[Dict[str, float]] = None) -> dict:
    doc = _envelope("compat", None, timings)
    doc.update({
        "config": cfg.to_json(),
        "results": [{"equivalence": name, "compat": c.to_json(), "status": "pass" if c.ok else "fail"}
                    for name, c in results],
    })
    return doc


def dumps(doc: dict) -> str:
    """Canonical JSON: sorted keys, fixed separators, trailing newline."""
    return json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


# -- text ------------------------------------------------------------------------

def _derivation_lines(d) -> List[str]:
    out = []
    for rule, s in d:
        arrow = "   " if rule is None else f"-{rule}->"
        out.append(f"      {arrow} {format_state(s)}")
    return out


def _verdict_lines(v: JoinVerdict) -> List[str]:
    tag = "vacuous" if v.vacuous else v.status
    lines = [f"  [{tag}] {v.label}"]
    if v.vacuous:
        lines.append("      no minimal extension satisfies the invariant")
        return lines
    lines.append(f"      left:  {format_state(v.left)}")
    lines.append(f"      right: {format_state(v.right)}")
    if v.witnesses:
        lines.append(f"      joins: {format_state(v.witnesses[0])}  ~  {format_state(v.witnesses[1])}")
    if v.status == "not_joinable":
        lines.append("      left finals:  " + " | ".join(format_state(s) for s in v.left_finals))
        lines.append("      right finals: " + " | ".join(format_state(s) for s in v.right_finals))
    if v.bound_exhausted:
        lines.append("      derivation bound exhausted or non-terminating branch")
    for ob in v.obligations:
        lines.append(f"      obligation: {ob}")
    return lines


def check_text(r: ConfluenceReport) -> str:
    lines = [f"verdict: {r.verdict}"]
    if r.confluent_with_obligations:
        lines[0] += " (confluent with obligations)"
    lines.append(f"invariant: {r.config.invariant.directive()}")
    lines.append(f"equivalence: {r.config.equivalence.directive()}")
    lines.append(f"termination assumed: {'yes' if r.config.termination_assumed else 'no'}")
    lines.append(f"overlap classes: {len(r.overlaps)}")
    for d in r.overlaps:
        lines.append(f"  {d.label}  state: {format_state(d.overlap_state)}")
    lines.append(f"alpha checks: {len(r.alpha)}")
    for v in r.alpha:
        lines.extend(_verdict_lines(v))
    counts: Dict[str, int] = {}
    for v in r.beta:
        counts[v.status] = counts.get(v.status, 0) + 1
    lines.append(f"beta checks: {len(r.beta)} (" +
                 ", ".join(f"{k} {n}" for k, n in sorted(counts.items())) + ")")
    for v in r.beta:
        if v.status != "joinable" or v.obligations:
            lines.extend(_verdict_lines(v))
    lines.append("compatibility (evidence, not proof):")
    c = r.compat
    for check in (c.congruence, c.split, c.maintains):
        if check is None:
            continue
        lines.append(f"  {check.name}: {'pass' if check.ok else 'fail'} ({check.trials} random trials)")
        if check.witness:
            for key, value in check.witness.items():
                shown = value["text"] if isinstance(value, dict) else value
                lines.append(f"      {key}: {shown}")
    lines.append(f"invariant preservation: {'pass' if r.preservation.ok else 'fail'}")
    if r.preservation.witness:
        s, rule, t = r.preservation.witness
        lines.append(f"      {format_state(s)} -{rule}-> {format_state(t)}")
    w = r.witness()
    if w is not None:
        lines.append("witness (non-joinable):")
        lines.extend(_verdict_lines(w))
        lines.append("    derivations:")
        for d in w.derivations:
            lines.extend(_derivation_lines(d))
    for ob in r.obligations:
        lines.append(f"obligation: {ob}")
    for n in r.notes:
        lines.append(f"note: {n}")
    for n in r.warnings:
        lines.append(f"warning: {n}")
    return "\n".join(lines) + "\n"


def run_text(finals: Sequence[ChrState], exhausted: bool, bound: int) -> str:
    lines = [f"final states: {len(finals)}"]
    lines.extend(f"  {format_state(s)}" for s in finals)
    if exhausted:
        lines.append(f"notice: derivation bound {bound} exhausted or non-terminating branch; "
                     "the listing may be incomplete")
    return "\n".join(lines) + "\n"


def compat_text(c: CompatReport) -> str:
    lines = ["compatibility (evidence, not proof):"]
    for check in (c.congruence, c.split, c.maintains):
        if check is None:
            continue
        lines.append(f"  {check.name}: {'pass' if check.ok else 'fail'}")
        if check.witness:
            for key, value in check.witness.items():
                shown = value["text"] if isinstance(value, dict) else value
                lines.append(f"      {key}: {shown}")
    return "\n".join(lines) + "\n"
