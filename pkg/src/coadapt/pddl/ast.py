"""Syntax tree for the supported PDDL subset.

Positions (``line``/``col``) are carried for diagnostics only and never take
part in equality, so ``parse(print(x)) == x`` is a structural comparison.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Union


def is_variable(term: str) -> bool:
    return term.startswith("?")


@dataclass(frozen=True, order=True)
class Atom:
    predicate: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate,) + self.args) + ")"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    positive: bool = True


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True, order=True)
class FluentTerm:
    name: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.name,) + self.args) + ")"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


Expr = Union[Num, FluentTerm, BinOp]


@dataclass(frozen=True)
class Comparison:
    op: str  # one of >= > <= < =
    left: Expr
    right: Expr


Condition = Union[Literal, Comparison]


@dataclass(frozen=True)
class NumericEffect:
    op: str  # assign | increase | decrease
    fluent: FluentTerm
    expr: Expr


@dataclass(frozen=True)
class Parameter:
    name: str
    type: str = "object"


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: tuple[Parameter, ...] = ()
    precondition: tuple[Condition, ...] = ()
    add_effects: tuple[Atom, ...] = ()
    del_effects: tuple[Atom, ...] = ()
    numeric_effects: tuple[NumericEffect, ...] = ()
    cost: Expr | None = None
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)

    def parameter_types(self) -> dict[str, str]:
        return {p.name: p.type for p in self.parameters}


@dataclass(frozen=True)
class PredicateDecl:
    name: str
    parameters: tuple[Parameter, ...] = ()


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: tuple[str, ...] = ()
    types: tuple[tuple[str, str], ...] = ()  # (type, parent)
    constants: tuple[Parameter, ...] = ()
    predicates: tuple[PredicateDecl, ...] = ()
    functions: tuple[PredicateDecl, ...] = ()
    actions: tuple[ActionSchema, ...] = ()
    source: str = field(default="<domain>", compare=False)

    def action(self, name: str) -> ActionSchema | None:
        for a in self.actions:
            if a.name == name:
                return a
        return None

    def type_parents(self) -> dict[str, str]:
        return dict(self.types)

    def is_subtype(self, child: str, ancestor: str) -> bool:
        if ancestor == "object":
            return True
        parents = self.type_parents()
        seen = set()
        while child not in seen:
            if child == ancestor:
                return True
            seen.add(child)
            if child not in parents:
                return False
            child = parents[child]
        return False

    def dynamic_predicates(self) -> frozenset[str]:
        names = set()
        for a in self.actions:
            names.update(x.predicate for x in a.add_effects)
            names.update(x.predicate for x in a.del_effects)
        return frozenset(names)

    def dynamic_fluents(self) -> frozenset[str]:
        return frozenset(e.fluent.name for a in self.actions for e in a.numeric_effects)


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: tuple[Parameter, ...] = ()
    init: frozenset[Atom] = frozenset()
    fluents: Mapping[FluentTerm, float] = field(default_factory=dict)
    goal: tuple[Condition, ...] = ()
    metric: str | None = None
    source: str = field(default="<problem>", compare=False)
    positions: Mapping[str, tuple[int, int]] = field(default_factory=dict, compare=False)

    def object_types(self) -> dict[str, str]:
        return {o.name: o.type for o in self.objects}

    def replace(self, **changes) -> "Problem":
        from dataclasses import replace
        return replace(self, **changes)
