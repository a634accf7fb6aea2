"""Plan JSON format, one-line-per-step rendering and step-aligned diffs."""

from __future__ import annotations

import difflib
import json

from ..pddl.printer import format_number
from .search import Plan, PlanStep, extract_reconfigurations


class PlanFormatError(ValueError):
    pass


def plan_to_dict(plan: Plan) -> dict:
    return {
        "steps": [
            {
                "index": i,
                "action": s.action,
                "args": list(s.args),
                "designs": dict(sorted(s.selected_designs.items())),
                "cost": s.cost,
            }
            for i, s in enumerate(plan.steps)
        ],
        "total_cost": plan.total_cost,
    }


def dumps_plan(plan: Plan) -> str:
    return json.dumps(plan_to_dict(plan), indent=2) + "\n"


def plan_from_dict(doc) -> Plan:
    if not isinstance(doc, dict) or set(doc) != {"steps", "total_cost"}:
        raise PlanFormatError("plan must be an object with exactly 'steps' and 'total_cost'")
    steps = []
    for i, s in enumerate(doc["steps"]):
        if not isinstance(s, dict) or set(s) != {"index", "action", "args", "designs", "cost"}:
            raise PlanFormatError(f"step {i}: expected keys index, action, args, designs, cost")
        if s["index"] != i:
            raise PlanFormatError(f"step {i}: index is {s['index']}")
        if not isinstance(s["action"], str) or not isinstance(s["args"], list) or not isinstance(s["designs"], dict):
            raise PlanFormatError(f"step {i}: malformed fields")
        if isinstance(s["cost"], bool) or not isinstance(s["cost"], (int, float)):
            raise PlanFormatError(f"step {i}: cost must be a number")
        steps.append(PlanStep(s["action"], tuple(s["args"]), dict(s["designs"]), float(s["cost"])))
    if isinstance(doc["total_cost"], bool) or not isinstance(doc["total_cost"], (int, float)):
        raise PlanFormatError("total_cost must be a number")
    return Plan(tuple(steps), float(doc["total_cost"]))


def loads_plan(text: str) -> Plan:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanFormatError(f"invalid JSON: {exc.msg} (line {exc.lineno})") from exc
    return plan_from_dict(doc)


def render_step(i: int, step: PlanStep) -> str:
    designs = ", ".join(f"{f}={d}" for f, d in sorted(step.selected_designs.items()))
    return f"{i}: {step.action}({', '.join(step.args)}) [{designs}] cost={format_number(step.cost)}"


def render_plan(plan: Plan) -> str:
    lines = [render_step(i, s) for i, s in enumerate(plan.steps)]
    lines.append(f"total_cost={format_number(plan.total_cost)}")
    return "\n".join(lines) + "\n"


def _changes(a: PlanStep, b: PlanStep) -> list[str]:
    notes = []
    if a.action != b.action:
        notes.append(f"action {a.action} -> {b.action}")
    if a.args != b.args:
        notes.append("route/arguments changed")
    if a.selected_designs != b.selected_designs:
        for f in sorted(set(a.selected_designs) | set(b.selected_designs)):
            da, db = a.selected_designs.get(f), b.selected_designs.get(f)
            if da != db:
                notes.append(f"design {f}: {da} -> {db}")
    if abs(a.cost - b.cost) > 1e-9:
        notes.append("cost changed")
    return notes


def _design_sequences(plan: Plan) -> dict[str, list[str]]:
    """Per function, the designs a plan switches through in order."""
    seqs: dict[str, list[str]] = {}
    for _, function, design in extract_reconfigurations(plan):
        seqs.setdefault(function, []).append(design)
    return seqs


def _key(step: PlanStep) -> tuple:
    return (step.action, step.args, tuple(sorted(step.selected_designs.items())), round(step.cost, 9))


def diff_plans(a: Plan, b: Plan) -> list[str]:
    """Aligned, step-by-step differences; empty when the plans are identical.

    Identical steps anchor the alignment, so inserted or dropped steps show
    up as such rather than shifting every later step; runs of differing
    steps between anchors are compared position by position.
    """
    out = []
    matcher = difflib.SequenceMatcher(a=[_key(s) for s in a.steps], b=[_key(s) for s in b.steps],
                                      autojunk=False)
    for tag, i1, i2, j1, j2 in matcher.get_opcodes():
        if tag == "equal":
            continue
        if tag == "replace":
            pairs = list(zip(range(i1, i2), range(j1, j2)))
            for i, j in pairs:
                notes = _changes(a.steps[i], b.steps[j])
                if notes:
                    out.append(f"- {render_step(i, a.steps[i])}")
                    out.append(f"+ {render_step(j, b.steps[j])}")
                    out.append("  ! " + "; ".join(notes))
            for i in range(i1 + len(pairs), i2):
                out.append(f"- {render_step(i, a.steps[i])}")
                out.append("  ! step removed")
            for j in range(j1 + len(pairs), j2):
                out.append(f"+ {render_step(j, b.steps[j])}")
                out.append("  ! step inserted")
        elif tag == "delete":
            for i in range(i1, i2):
                out.append(f"- {render_step(i, a.steps[i])}")
                out.append("  ! step removed")
        elif tag == "insert":
            for j in range(j1, j2):
                out.append(f"+ {render_step(j, b.steps[j])}")
                out.append("  ! step inserted")
    seq_a, seq_b = _design_sequences(a), _design_sequences(b)
    for function in sorted(set(seq_a) | set(seq_b)):
        if seq_a.get(function) != seq_b.get(function):
            before = ", ".join(seq_a.get(function, [])) or "none"
            after = ", ".join(seq_b.get(function, [])) or "none"
            out.append(f"designs for {function}: {before} -> {after}")
    if abs(a.total_cost - b.total_cost) > 1e-9:
        out.append(f"total_cost {format_number(a.total_cost)} -> {format_number(b.total_cost)}")
    return out
