"""PDDL subset: parsing, printing, linking checks and grounding."""

from .ast import (
    ActionSchema,
    Atom,
    BinOp,
    Comparison,
    Domain,
    FluentTerm,
    Literal,
    Num,
    NumericEffect,
    Parameter,
    PredicateDecl,
    Problem,
)
from .grounding import GroundAction, GroundTask, State, ground
from .linking import Diagnostic, require_linking_pattern, update_problem
from .parser import ParseError, parse_domain, parse_problem
from .printer import print_domain, print_problem

__all__ = [
    "ActionSchema", "Atom", "BinOp", "Comparison", "Diagnostic", "Domain", "FluentTerm",
    "GroundAction", "GroundTask", "Literal", "Num", "NumericEffect", "Parameter", "ParseError",
    "PredicateDecl", "Problem", "State", "ground", "parse_domain", "parse_problem",
    "print_domain", "print_problem", "require_linking_pattern", "update_problem",
]
