"""Plan validation straight from the domain and problem syntax trees.

Deliberately shares nothing with grounding or search: states here are sets
of atoms and dictionaries of fluent values, and schemas are re-instantiated
per step from the plan's own arguments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..pddl.ast import Atom, BinOp, Comparison, Domain, FluentTerm, Literal, Num, Problem
from ..pddl.linking import FD_SOLVE_F
from .search import Plan

COST_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Valid:
    total_cost: float

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class Invalid:
    reason: str
    step: int | None

    def __bool__(self) -> bool:
        return False


class _Undefined(Exception):
    pass


def _value(expr, fluents: dict, binding: dict) -> float:
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, FluentTerm):
        term = FluentTerm(expr.name, tuple(binding.get(a, a) for a in expr.args))
        if term not in fluents:
            raise _Undefined(str(term))
        return fluents[term]
    if isinstance(expr, BinOp):
        left = _value(expr.left, fluents, binding)
        right = _value(expr.right, fluents, binding)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if right == 0:
            raise _Undefined("division by zero")
        return left / right
    raise TypeError(expr)


def _compare(op: str, left: float, right: float) -> bool:
    if op == ">=":
        return left >= right
    if op == ">":
        return left > right
    if op == "<=":
        return left <= right
    if op == "<":
        return left < right
    return left == right


def _holds(cond, facts: set, fluents: dict, binding: dict) -> bool:
    if isinstance(cond, Literal):
        atom = Atom(cond.atom.predicate, tuple(binding.get(a, a) for a in cond.atom.args))
        return (atom in facts) == cond.positive
    if isinstance(cond, Comparison):
        try:
            return _compare(cond.op, _value(cond.left, fluents, binding), _value(cond.right, fluents, binding))
        except _Undefined:
            return False
    raise TypeError(cond)


def _describe(cond, binding: dict) -> str:
    if isinstance(cond, Literal):
        atom = Atom(cond.atom.predicate, tuple(binding.get(a, a) for a in cond.atom.args))
        return str(atom) if cond.positive else f"(not {atom})"
    return f"numeric condition {cond.op}"


def validate_plan(domain: Domain, problem: Problem, plan: Plan) -> Valid | Invalid:
    objects = {c.name: c.type for c in domain.constants}
    objects.update(problem.object_types())
    facts = set(problem.init)
    fluents = dict(problem.fluents)
    fixed_cost = 0.0 if problem.metric else 1.0
    total = 0.0

    for i, step in enumerate(plan.steps):
        schema = domain.action(step.action)
        if schema is None:
            return Invalid(f"unknown-action: {step.action}", i)
        if len(step.args) != len(schema.parameters):
            return Invalid("bad-arguments: wrong arity", i)
        binding = {}
        for p, arg in zip(schema.parameters, step.args):
            if arg not in objects:
                return Invalid(f"bad-arguments: unknown object {arg}", i)
            if not domain.is_subtype(objects[arg], p.type):
                return Invalid(f"bad-arguments: {arg} is not a {p.type}", i)
            binding[p.name] = arg

        for cond in schema.precondition:
            if not _holds(cond, facts, fluents, binding):
                return Invalid(f"precondition-unsatisfied: {_describe(cond, binding)}", i)

        chosen = {}
        for cond in schema.precondition:
            if isinstance(cond, Literal) and cond.positive and cond.atom.predicate == FD_SOLVE_F:
                fd, f = (binding.get(a, a) for a in cond.atom.args)
                chosen[f] = fd
        if chosen != dict(step.selected_designs):
            return Invalid("design-mismatch", i)
        for design in chosen.values():
            if Atom("fd_available", (design,)) not in facts:
                return Invalid(f"design-unavailable: {design}", i)

        try:
            cost = _value(schema.cost, fluents, binding) if (schema.cost is not None and problem.metric) else fixed_cost
            updates = []
            for eff in schema.numeric_effects:
                term = FluentTerm(eff.fluent.name, tuple(binding.get(a, a) for a in eff.fluent.args))
                amount = _value(eff.expr, fluents, binding)
                if eff.op == "assign":
                    updates.append((term, amount))
                else:
                    if term not in fluents:
                        return Invalid(f"undefined-fluent: {term}", i)
                    sign = 1.0 if eff.op == "increase" else -1.0
                    updates.append((term, fluents[term] + sign * amount))
        except _Undefined as exc:
            return Invalid(f"undefined-fluent: {exc}", i)
        if not math.isfinite(cost) or abs(cost - step.cost) > COST_TOLERANCE:
            return Invalid(f"cost-mismatch: step says {step.cost}, recomputed {cost}", i)
        total += cost

        for atom in schema.del_effects:
            facts.discard(Atom(atom.predicate, tuple(binding.get(a, a) for a in atom.args)))
        for atom in schema.add_effects:
            facts.add(Atom(atom.predicate, tuple(binding.get(a, a) for a in atom.args)))
        for term, value in updates:
            if not math.isfinite(value):
                return Invalid(f"inconsistent-fluent: {term}", i)
            fluents[term] = value

    for cond in problem.goal:
        if not _holds(cond, facts, fluents, {}):
            return Invalid(f"goal-unsatisfied: {_describe(cond, {})}", len(plan.steps))
    if abs(total - plan.total_cost) > COST_TOLERANCE:
        return Invalid(f"total-cost-mismatch: plan says {plan.total_cost}, recomputed {total}", len(plan.steps))
    return Valid(total)


def validate(task, plan: Plan) -> Valid | Invalid:
    """Check ``plan`` against the domain and problem ``task`` was ground from."""
    return validate_plan(task.domain, task.problem, plan)
