"""Instantiate action schemas over problem objects into a search task.

Atoms are indexed and states store them as an int bitmask; numeric fluents
that some action changes live in a tuple, all others are folded into the
compiled expressions as constants.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass, field
from typing import Callable

from .ast import Atom, BinOp, Comparison, Domain, Expr, FluentTerm, Literal, Num, Problem, is_variable
from .linking import function_links

_ARITH = {"+": operator.add, "-": operator.sub, "*": operator.mul, "/": operator.truediv}
_COMPARE = {">=": operator.ge, ">": operator.gt, "<=": operator.le, "<": operator.lt, "=": operator.eq}

NumFn = Callable[[tuple], float]


class Undefined(Exception):
    """A numeric fluent referenced by an instantiation has no value."""


@dataclass(frozen=True)
class State:
    facts: int  # bitmask over GroundTask.atoms
    fluent_values: tuple[float, ...] = ()

    def holds(self, index: int) -> bool:
        return bool(self.facts >> index & 1)


@dataclass(frozen=True, eq=False)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre_pos: int
    pre_neg: int
    numeric_pre: tuple[Callable[[tuple], bool], ...]
    add: int
    delete: int
    numeric_eff: tuple[tuple[int, str, NumFn], ...]
    cost_fn: NumFn
    designs: tuple[tuple[str, str], ...]  # (function, design)

    @property
    def key(self) -> tuple[str, tuple[str, ...]]:
        return (self.name, self.args)

    def applicable(self, state: State) -> bool:
        if state.facts & self.pre_pos != self.pre_pos or state.facts & self.pre_neg:
            return False
        return all(check(state.fluent_values) for check in self.numeric_pre)

    def apply(self, state: State) -> State:
        facts = (state.facts & ~self.delete) | self.add
        values = state.fluent_values
        if self.numeric_eff:
            new = list(values)
            for idx, op, fn in self.numeric_eff:
                amount = fn(values)
                if op == "assign":
                    new[idx] = amount
                elif op == "increase":
                    new[idx] = values[idx] + amount
                else:
                    new[idx] = values[idx] - amount
            values = tuple(new)
        return State(facts, values)

    def cost(self, state: State) -> float:
        return self.cost_fn(state.fluent_values)

    def __str__(self) -> str:
        return f"{self.name}({', '.join(self.args)})"


@dataclass
class GroundTask:
    atoms: list[Atom]
    fluents: list[FluentTerm]
    actions: list[GroundAction]
    init_state: State
    goal_pos: int
    goal_neg: int = 0
    goal_numeric: tuple[Callable[[tuple], bool], ...] = ()
    domain: Domain | None = None
    problem: Problem | None = None
    atom_index: dict[Atom, int] = field(default_factory=dict, repr=False)

    @property
    def goal(self) -> frozenset[int]:
        return frozenset(i for i in range(len(self.atoms)) if self.goal_pos >> i & 1)

    def is_goal(self, state: State) -> bool:
        if state.facts & self.goal_pos != self.goal_pos or state.facts & self.goal_neg:
            return False
        return all(check(state.fluent_values) for check in self.goal_numeric)

    def facts_of(self, state: State) -> list[Atom]:
        return [a for i, a in enumerate(self.atoms) if state.facts >> i & 1]


def default_cost(problem: Problem) -> float:
    # without a metric every action counts one step
    return 0.0 if problem.metric else 1.0


class _Compiler:
    def __init__(self, static_values: dict[FluentTerm, float], dynamic_index: dict[FluentTerm, int]):
        self.static_values = static_values
        self.dynamic_index = dynamic_index

    def expr(self, expr: Expr, binding: dict[str, str]) -> NumFn:
        if isinstance(expr, Num):
            value = expr.value
            return lambda v: value
        if isinstance(expr, FluentTerm):
            term = FluentTerm(expr.name, tuple(binding.get(a, a) for a in expr.args))
            if term in self.dynamic_index:
                idx = self.dynamic_index[term]
                return lambda v: v[idx]
            if term in self.static_values:
                value = self.static_values[term]
                return lambda v: value
            raise Undefined(str(term))
        if isinstance(expr, BinOp):
            left = self.expr(expr.left, binding)
            right = self.expr(expr.right, binding)
            op = _ARITH[expr.op]
            if isinstance(expr.left, Num) and isinstance(expr.right, Num):
                value = op(expr.left.value, expr.right.value)
                return lambda v: value
            return lambda v: op(left(v), right(v))
        raise TypeError(expr)

    def comparison(self, cond: Comparison, binding: dict[str, str]) -> Callable[[tuple], bool]:
        left = self.expr(cond.left, binding)
        right = self.expr(cond.right, binding)
        op = _COMPARE[cond.op]
        return lambda v: op(left(v), right(v))


def objects_by_type(domain: Domain, problem: Problem) -> dict[str, list[str]]:
    objects = [(c.name, c.type) for c in domain.constants] + [(o.name, o.type) for o in problem.objects]
    types = {"object"} | {t for t, _ in domain.types} | {p for _, p in domain.types}
    return {t: sorted(name for name, ot in objects if domain.is_subtype(ot, t)) for t in types}


def ground(domain: Domain, problem: Problem, prune_static: bool = True) -> GroundTask:
    """Build the ground task.

    With ``prune_static`` the static preconditions (predicates no action
    changes) are resolved against ``init`` while binding parameters, so
    instantiations that can never fire are not generated. Without it every
    type-consistent instantiation is produced and static atoms stay in the
    state.
    """
    dyn_preds = domain.dynamic_predicates()
    dyn_fluent_names = domain.dynamic_fluents()
    by_type = objects_by_type(domain, problem)

    dyn_terms = sorted(t for t in problem.fluents if t.name in dyn_fluent_names)
    dynamic_index = {t: i for i, t in enumerate(dyn_terms)}
    static_values = {t: v for t, v in problem.fluents.items() if t.name not in dyn_fluent_names}
    compiler = _Compiler(static_values, dynamic_index)

    atoms: list[Atom] = []
    atom_index: dict[Atom, int] = {}

    def index(atom: Atom) -> int:
        idx = atom_index.get(atom)
        if idx is None:
            idx = atom_index[atom] = len(atoms)
            atoms.append(atom)
        return idx

    def tracked(pred: str) -> bool:
        return pred in dyn_preds or not prune_static

    # init facts first so indices are stable across equal problems
    for atom in sorted(problem.init):
        if tracked(atom.predicate):
            index(atom)
    for cond in problem.goal:
        if isinstance(cond, Literal):
            index(cond.atom)

    init = problem.init
    ground_actions: list[GroundAction] = []
    for schema in domain.actions:
        static_checks = []
        if prune_static:
            static_checks = [c for c in schema.precondition
                             if isinstance(c, Literal) and c.atom.predicate not in dyn_preds]
        links = function_links(schema)
        params = schema.parameters
        binding: dict[str, str] = {}

        def fully_bound(atom: Atom, upto: set[str]) -> bool:
            return all(not is_variable(a) or a in upto for a in atom.args)

        # checks become due as soon as their last variable is bound
        due: list[list[Literal]] = [[] for _ in params]
        bound_after: list[set[str]] = []
        names: set[str] = set()
        for p in params:
            names = names | {p.name}
            bound_after.append(names)
        leftover = []
        for c in static_checks:
            for i in range(len(params)):
                if fully_bound(c.atom, bound_after[i]):
                    due[i].append(c)
                    break
            else:
                leftover.append(c)

        def subst(atom: Atom) -> Atom:
            return Atom(atom.predicate, tuple(binding.get(a, a) for a in atom.args))

        def static_ok(checks) -> bool:
            return all((subst(c.atom) in init) == c.positive for c in checks)

        if not static_ok(leftover):
            continue

        def instantiate() -> None:
            pre_pos = pre_neg = 0
            numeric_pre = []
            try:
                for cond in schema.precondition:
                    if isinstance(cond, Literal):
                        if not tracked(cond.atom.predicate):
                            continue
                        idx = index(subst(cond.atom))
                        if cond.positive:
                            pre_pos |= 1 << idx
                        else:
                            pre_neg |= 1 << idx
                    else:
                        numeric_pre.append(compiler.comparison(cond, binding))
                add = 0
                for atom in schema.add_effects:
                    add |= 1 << index(subst(atom))
                delete = 0
                for atom in schema.del_effects:
                    delete |= 1 << index(subst(atom))
                numeric_eff = []
                for eff in schema.numeric_effects:
                    term = FluentTerm(eff.fluent.name, tuple(binding.get(a, a) for a in eff.fluent.args))
                    if term not in dynamic_index:
                        raise Undefined(str(term))
                    numeric_eff.append((dynamic_index[term], eff.op, compiler.expr(eff.expr, binding)))
                if schema.cost is not None and problem.metric:
                    cost_fn = compiler.expr(schema.cost, binding)
                else:
                    fixed = default_cost(problem)
                    cost_fn = lambda v, fixed=fixed: fixed
            except Undefined:
                return
            if pre_pos & pre_neg:
                return
            designs = tuple(sorted((binding[f], binding[d]) for f, d in links if f in binding and d in binding))
            ground_actions.append(GroundAction(
                schema.name, tuple(binding[p.name] for p in params), pre_pos, pre_neg,
                tuple(numeric_pre), add, delete, tuple(numeric_eff), cost_fn, designs,
            ))

        def bind(i: int) -> None:
            if i == len(params):
                instantiate()
                return
            p = params[i]
            for obj in by_type.get(p.type, []):
                binding[p.name] = obj
                if static_ok(due[i]):
                    bind(i + 1)
            binding.pop(p.name, None)

        bind(0)

    ground_actions.sort(key=lambda a: a.key)

    facts = 0
    for atom in problem.init:
        if atom in atom_index:
            facts |= 1 << atom_index[atom]
    init_state = State(facts, tuple(problem.fluents[t] for t in dyn_terms))

    goal_pos = goal_neg = 0
    goal_numeric = []
    for cond in problem.goal:
        if isinstance(cond, Literal):
            idx = atom_index[cond.atom]
            if cond.positive:
                goal_pos |= 1 << idx
            else:
                goal_neg |= 1 << idx
        else:
            try:
                goal_numeric.append(compiler.comparison(cond, {}))
            except Undefined:
                goal_numeric.append(lambda v: False)

    return GroundTask(atoms, list(dyn_terms), ground_actions, init_state, goal_pos, goal_neg,
                      tuple(goal_numeric), domain, problem, atom_index)

