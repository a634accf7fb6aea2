"""The action/function/design linking convention and availability updates.

Every executable action schema must carry, for each function it needs::

    (<tag> ?a) (a_req_f ?a ?f) (fd_solve_f ?fd ?f) (fd_available ?fd)

and every action object in the problem needs at least one ``a_req_f`` fact.
"""

from __future__ import annotations

from dataclasses import dataclass

from .ast import ActionSchema, Atom, Domain, Literal, Problem

A_REQ_F = "a_req_f"
FD_SOLVE_F = "fd_solve_f"
FD_AVAILABLE = "fd_available"
FD_ALLOWED_ON = "fd_allowed_on"
LINK_PREDICATES = frozenset({A_REQ_F, FD_SOLVE_F, FD_AVAILABLE, FD_ALLOWED_ON})


@dataclass(frozen=True)
class Diagnostic:
    source: str
    line: int
    col: int
    severity: str
    message: str

    def __str__(self) -> str:
        return f"{self.source}:{self.line}:{self.col}: {self.severity}: {self.message}"


def _positive(schema: ActionSchema) -> list[Atom]:
    return [c.atom for c in schema.precondition if isinstance(c, Literal) and c.positive]


def function_links(schema: ActionSchema) -> list[tuple[str, str]]:
    """(function variable, design variable) pairs named by ``fd_solve_f`` preconditions."""
    return [(a.args[1], a.args[0]) for a in _positive(schema) if a.predicate == FD_SOLVE_F and len(a.args) == 2]


def action_variables(schema: ActionSchema) -> set[str]:
    return {a.args[0] for a in _positive(schema) if a.predicate == A_REQ_F and len(a.args) == 2}


def _schema_problems(schema: ActionSchema) -> list[str]:
    pos = _positive(schema)
    missing = []
    req = [(a.args[0], a.args[1]) for a in pos if a.predicate == A_REQ_F and len(a.args) == 2]
    if not req:
        return ["no (a_req_f ?a ?f) precondition"]
    for act_var, fun_var in req:
        tags = [a for a in pos if len(a.args) == 1 and a.args[0] == act_var and a.predicate not in LINK_PREDICATES]
        if not tags:
            missing.append(f"no action-tag literal on {act_var}")
        designs = [a.args[0] for a in pos if a.predicate == FD_SOLVE_F and len(a.args) == 2 and a.args[1] == fun_var]
        if not designs:
            missing.append(f"no (fd_solve_f ?fd {fun_var}) precondition")
        for fd in designs:
            if Atom(FD_AVAILABLE, (fd,)) not in pos:
                missing.append(f"no (fd_available {fd}) precondition")
    return sorted(set(missing))


def require_linking_pattern(domain: Domain, problem: Problem) -> list[Diagnostic]:
    diagnostics = []
    action_types: set[str] = set()
    tag_predicates: set[str] = set()
    for schema in domain.actions:
        problems = _schema_problems(schema)
        if problems:
            diagnostics.append(Diagnostic(
                domain.source, schema.line, schema.col, "error",
                f"action {schema.name} does not follow the linking pattern: " + "; ".join(problems),
            ))
        types = schema.parameter_types()
        for var in action_variables(schema):
            if var in types:
                action_types.add(types[var])
            tag_predicates.update(a.predicate for a in _positive(schema)
                                  if a.args == (var,) and a.predicate not in LINK_PREDICATES)

    tagged = {a.args[0] for a in problem.init if a.predicate in tag_predicates and len(a.args) == 1}
    typed = {o.name for o in problem.objects
             if any(domain.is_subtype(o.type, t) for t in action_types if t != "object")}
    linked = {a.args[0] for a in problem.init if a.predicate == A_REQ_F}
    for obj in sorted((tagged | typed) - linked):
        line, col = problem.positions.get(obj, (0, 0))
        diagnostics.append(Diagnostic(
            problem.source, line, col, "error", f"action object {obj} has no (a_req_f {obj} ?f) fact",
        ))
    return diagnostics


def update_problem(problem: Problem, available, contextual=()) -> Problem:
    """Replace availability facts in ``init``; every other fact is kept as is."""
    objects = problem.object_types()
    facts = []
    for d in sorted(available):
        if d not in objects:
            raise ValueError(f"unknown design object {d!r}")
        facts.append(Atom(FD_AVAILABLE, (d,)))
    for d, ctx in sorted(contextual):
        for ident in (d, ctx):
            if ident not in objects:
                raise ValueError(f"unknown object {ident!r}")
        facts.append(Atom(FD_ALLOWED_ON, (d, ctx)))
    kept = {a for a in problem.init if a.predicate not in (FD_AVAILABLE, FD_ALLOWED_ON)}
    return problem.replace(init=frozenset(kept | set(facts)))
