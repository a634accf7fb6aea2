"""Canonical PDDL output: lowercase keywords, one clause per line, two-space indent."""

from __future__ import annotations

from .ast import (
    ActionSchema,
    Atom,
    BinOp,
    Comparison,
    Domain,
    Expr,
    FluentTerm,
    Literal,
    Num,
    Parameter,
    PredicateDecl,
    Problem,
)


def format_number(value: float) -> str:
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def format_expr(expr: Expr) -> str:
    if isinstance(expr, Num):
        return format_number(expr.value)
    if isinstance(expr, FluentTerm):
        return str(expr)
    if isinstance(expr, BinOp):
        return f"({expr.op} {format_expr(expr.left)} {format_expr(expr.right)})"
    raise TypeError(f"not an expression: {expr!r}")


def format_condition(cond) -> str:
    if isinstance(cond, Literal):
        return str(cond.atom) if cond.positive else f"(not {cond.atom})"
    if isinstance(cond, Comparison):
        return f"({cond.op} {format_expr(cond.left)} {format_expr(cond.right)})"
    raise TypeError(f"not a condition: {cond!r}")


def _typed(params: tuple[Parameter, ...]) -> str:
    return " ".join(f"{p.name} - {p.type}" for p in params)


def _decl(d: PredicateDecl) -> str:
    inner = " ".join([d.name] + ([_typed(d.parameters)] if d.parameters else []))
    return f"({inner})"


def _block(lines: list[str], indent: str) -> list[str]:
    return [indent + line for line in lines]


def _conjunction(keyword: str, parts: list[str], indent: str) -> list[str]:
    if not parts:
        return [f"{indent}{keyword} (and)"]
    out = [f"{indent}{keyword} (and"]
    out.extend(f"{indent}  {p}" for p in parts)
    out[-1] += ")"
    return out


def format_action(action: ActionSchema, indent: str = "  ") -> list[str]:
    out = [f"{indent}(:action {action.name}"]
    inner = indent + "  "
    out.append(f"{inner}:parameters ({_typed(action.parameters)})")
    out.extend(_conjunction(":precondition", [format_condition(c) for c in action.precondition], inner))
    effects = [str(a) for a in action.add_effects]
    effects += [f"(not {a})" for a in action.del_effects]
    effects += [f"({e.op} {e.fluent} {format_expr(e.expr)})" for e in action.numeric_effects]
    if action.cost is not None:
        effects.append(f"(increase (total-cost) {format_expr(action.cost)})")
    out.extend(_conjunction(":effect", effects, inner))
    out[-1] += ")"
    return out


def print_domain(domain: Domain) -> str:
    lines = [f"(define (domain {domain.name})"]
    if domain.requirements:
        lines.append("  (:requirements " + " ".join(domain.requirements) + ")")
    if domain.types:
        lines.append("  (:types")
        lines.extend(f"    {t} - {parent}" for t, parent in domain.types)
        lines[-1] += ")"
    if domain.constants:
        lines.append("  (:constants")
        lines.extend(f"    {c.name} - {c.type}" for c in domain.constants)
        lines[-1] += ")"
    if domain.predicates:
        lines.append("  (:predicates")
        lines.extend(f"    {_decl(p)}" for p in domain.predicates)
        lines[-1] += ")"
    if domain.functions:
        lines.append("  (:functions")
        lines.extend(f"    {_decl(f)} - number" for f in domain.functions)
        lines[-1] += ")"
    for action in domain.actions:
        lines.extend(format_action(action))
    lines.append(")")
    return "\n".join(lines) + "\n"


def _fact_key(atom: Atom):
    return (atom.predicate, atom.args)


def print_problem(problem: Problem) -> str:
    lines = [f"(define (problem {problem.name})", f"  (:domain {problem.domain_name})"]
    if problem.objects:
        lines.append("  (:objects")
        lines.extend(f"    {o.name} - {o.type}" for o in problem.objects)
        lines[-1] += ")"
    init = [str(a) for a in sorted(problem.init, key=_fact_key)]
    init += [f"(= {term} {format_number(v)})"
             for term, v in sorted(problem.fluents.items(), key=lambda kv: (kv[0].name, kv[0].args))]
    if init:
        lines.append("  (:init")
        lines.extend(f"    {f}" for f in init)
        lines[-1] += ")"
    else:
        lines.append("  (:init)")
    goal = _conjunction("(:goal", [format_condition(c) for c in problem.goal], "  ")
    goal[-1] += ")"
    lines.extend(goal)
    if problem.metric:
        lines.append(f"  (:metric minimize ({problem.metric}))")
    lines.append(")")
    return "\n".join(lines) + "\n"
