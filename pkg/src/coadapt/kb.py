"""Architectural knowledge base and the Analyze step.

The model follows the TOMASys split between design-time elements (functions,
function designs, components, attribute types) and runtime elements
(objectives, function groundings, measurements). Rules are evaluated by a
small built-in evaluator instead of an ontology reasoner.
"""

from __future__ import annotations

import json
import operator
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping


class KBError(ValueError):
    """Schema violation, dangling reference or duplicate id in a knowledge base."""

    def __init__(self, message: str, *, ident: str | None = None, location: str | None = None):
        self.ident = ident
        self.location = location
        where = f" at {location}" if location else ""
        super().__init__(f"{message}{where}")


class ComponentStatus(str, Enum):
    AVAILABLE = "Available"
    FAILED = "Failed"


class ObjectiveStatus(str, Enum):
    OK = "Ok"
    IN_ERROR = "InError"
    UNKNOWN = "Unknown"


class AttributeKind(str, Enum):
    QUALITY = "Quality"
    ENVIRONMENT = "Environment"


COMPARATORS = {
    ">=": operator.ge,
    ">": operator.gt,
    "<=": operator.le,
    "<": operator.lt,
}


@dataclass(frozen=True)
class FunctionSpec:
    id: str


@dataclass
class ComponentSpec:
    id: str
    status: ComponentStatus = ComponentStatus.AVAILABLE


@dataclass(frozen=True)
class AttributeType:
    id: str
    kind: AttributeKind
    unit: str = ""


@dataclass(frozen=True)
class Requirement:
    attribute: str
    comparator: str
    threshold: float

    def holds(self, value: float) -> bool:
        return COMPARATORS[self.comparator](value, self.threshold)


@dataclass(frozen=True)
class FunctionDesign:
    id: str
    solves: str
    required_components: frozenset[str] = frozenset()
    qa_expected: Mapping[str, float] = field(default_factory=dict)
    qa_requirements: tuple[Requirement, ...] = ()
    ea_capabilities: Mapping[str, float] = field(default_factory=dict)


@dataclass
class Objective:
    id: str
    function: str
    status: ObjectiveStatus = ObjectiveStatus.UNKNOWN


@dataclass
class FunctionGrounding:
    objective: str
    design: str
    active: bool = True


@dataclass(frozen=True)
class AnalysisResult:
    available_designs: frozenset[str]
    objectives_in_error: frozenset[str]
    generation: int


@dataclass
class KnowledgeBase:
    functions: dict[str, FunctionSpec]
    components: dict[str, ComponentSpec]
    designs: dict[str, FunctionDesign]
    attribute_types: dict[str, AttributeType]
    objectives: dict[str, Objective] = field(default_factory=dict)
    groundings: list[FunctionGrounding] = field(default_factory=list)
    measurements: dict[str, float] = field(default_factory=dict)
    generation: int = 0

    def active_grounding(self, objective: str) -> FunctionGrounding | None:
        for g in self.groundings:
            if g.active and g.objective == objective:
                return g
        return None

    def designs_for(self, function: str) -> list[str]:
        return sorted(d.id for d in self.designs.values() if d.solves == function)

    def _bump(self) -> None:
        self.generation += 1


# -- loading ---------------------------------------------------------------

_TOP_KEYS = {"functions", "components", "attribute_types", "function_designs"}
_DESIGN_KEYS = {"id", "solves", "required_components", "qa_expected", "qa_requirements", "ea_capabilities"}
_REQUIREMENT_KEYS = {"attribute", "comparator", "threshold"}


def _check_keys(obj, allowed: set[str], required: set[str], location: str) -> None:
    if not isinstance(obj, dict):
        raise KBError("expected an object", location=location)
    unknown = set(obj) - allowed
    if unknown:
        key = sorted(unknown)[0]
        raise KBError(f"unknown key {key!r}", ident=key, location=location)
    missing = required - set(obj)
    if missing:
        key = sorted(missing)[0]
        raise KBError(f"missing field {key!r}", ident=key, location=location)


def _number(value, location: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise KBError(f"expected a number, got {value!r}", location=location)
    return float(value)


def _declare(table: dict, ident, item, location: str) -> None:
    if not isinstance(ident, str) or not ident:
        raise KBError("id must be a non-empty string", location=location)
    if ident in table:
        raise KBError(f"duplicate id {ident!r}", ident=ident, location=location)
    table[ident] = item


def load_kb(text: str) -> KnowledgeBase:
    """Parse a KB JSON document into a fully linked :class:`KnowledgeBase`.

    Runtime sets start empty and ``generation`` is 0.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise KBError(f"invalid JSON: {exc.msg}", location=f"line {exc.lineno} column {exc.colno}") from exc
    _check_keys(doc, _TOP_KEYS, _TOP_KEYS, "$")

    functions: dict[str, FunctionSpec] = {}
    for i, f in enumerate(doc["functions"]):
        loc = f"functions[{i}]"
        _check_keys(f, {"id"}, {"id"}, loc)
        _declare(functions, f["id"], FunctionSpec(f["id"]), loc)

    components: dict[str, ComponentSpec] = {}
    for i, c in enumerate(doc["components"]):
        loc = f"components[{i}]"
        _check_keys(c, {"id", "status"}, {"id"}, loc)
        try:
            status = ComponentStatus(c.get("status", "Available"))
        except ValueError:
            raise KBError(f"bad component status {c.get('status')!r}", ident=c["id"], location=loc) from None
        _declare(components, c["id"], ComponentSpec(c["id"], status), loc)

    attributes: dict[str, AttributeType] = {}
    for i, a in enumerate(doc["attribute_types"]):
        loc = f"attribute_types[{i}]"
        _check_keys(a, {"id", "kind", "unit"}, {"id", "kind"}, loc)
        try:
            kind = AttributeKind(a["kind"])
        except ValueError:
            raise KBError(f"bad attribute kind {a['kind']!r}", ident=a["id"], location=loc) from None
        _declare(attributes, a["id"], AttributeType(a["id"], kind, a.get("unit", "")), loc)

    designs: dict[str, FunctionDesign] = {}
    for i, d in enumerate(doc["function_designs"]):
        loc = f"function_designs[{i}]"
        _check_keys(d, _DESIGN_KEYS, {"id", "solves"}, loc)
        ident = d["id"]
        if d["solves"] not in functions:
            raise KBError(f"design {ident!r} solves undeclared function {d['solves']!r}",
                          ident=d["solves"], location=f"{loc}.solves")
        required = d.get("required_components", [])
        for c in required:
            if c not in components:
                raise KBError(f"design {ident!r} requires undeclared component {c!r}",
                              ident=c, location=f"{loc}.required_components")
        qa_expected = {}
        for k, v in d.get("qa_expected", {}).items():
            if k not in attributes:
                raise KBError(f"undeclared attribute {k!r}", ident=k, location=f"{loc}.qa_expected")
            qa_expected[k] = _number(v, f"{loc}.qa_expected.{k}")
        reqs = []
        for j, r in enumerate(d.get("qa_requirements", [])):
            rloc = f"{loc}.qa_requirements[{j}]"
            _check_keys(r, _REQUIREMENT_KEYS, _REQUIREMENT_KEYS, rloc)
            if r["attribute"] not in attributes:
                raise KBError(f"undeclared attribute {r['attribute']!r}", ident=r["attribute"], location=rloc)
            if r["comparator"] not in COMPARATORS:
                raise KBError(f"bad comparator {r['comparator']!r}", ident=ident, location=rloc)
            reqs.append(Requirement(r["attribute"], r["comparator"], _number(r["threshold"], rloc)))
        ea = {}
        for k, v in d.get("ea_capabilities", {}).items():
            if k not in attributes:
                raise KBError(f"undeclared attribute {k!r}", ident=k, location=f"{loc}.ea_capabilities")
            if attributes[k].kind is not AttributeKind.ENVIRONMENT:
                raise KBError(f"{k!r} is not an environment attribute", ident=k, location=f"{loc}.ea_capabilities")
            ea[k] = _number(v, f"{loc}.ea_capabilities.{k}")
        design = FunctionDesign(ident, d["solves"], frozenset(required), qa_expected, tuple(reqs), ea)
        _declare(designs, ident, design, loc)

    return KnowledgeBase(functions, components, designs, attributes)


def dump_kb(kb: KnowledgeBase) -> str:
    """Serialize the design-time part of ``kb`` back to the JSON file format."""
    doc = {
        "functions": [{"id": f} for f in kb.functions],
        "components": [{"id": c.id, "status": c.status.value} for c in kb.components.values()],
        "attribute_types": [
            {"id": a.id, "kind": a.kind.value, "unit": a.unit} for a in kb.attribute_types.values()
        ],
        "function_designs": [
            {
                "id": d.id,
                "solves": d.solves,
                "required_components": sorted(d.required_components),
                "qa_expected": dict(d.qa_expected),
                "qa_requirements": [
                    {"attribute": r.attribute, "comparator": r.comparator, "threshold": r.threshold}
                    for r in d.qa_requirements
                ],
                "ea_capabilities": dict(d.ea_capabilities),
            }
            for d in kb.designs.values()
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


# -- runtime updates -------------------------------------------------------

def update_measurements(
    kb: KnowledgeBase,
    qa: Mapping[str, float] | None = None,
    ea: Mapping[str, float] | None = None,
    component_status: Mapping[str, ComponentStatus | str] | None = None,
) -> KnowledgeBase:
    """Write the latest measured values into ``kb``.

    All keys are checked before anything is written, so an unknown id leaves
    the knowledge base untouched. The generation advances once per call.
    """
    qa = dict(qa or {})
    ea = dict(ea or {})
    component_status = dict(component_status or {})
    for key in qa:
        attr = kb.attribute_types.get(key)
        if attr is None or attr.kind is not AttributeKind.QUALITY:
            raise KBError(f"unknown quality attribute {key!r}", ident=key, location="qa")
    for key in ea:
        attr = kb.attribute_types.get(key)
        if attr is None or attr.kind is not AttributeKind.ENVIRONMENT:
            raise KBError(f"unknown environment attribute {key!r}", ident=key, location="ea")
    statuses = {}
    for key, status in component_status.items():
        if key not in kb.components:
            raise KBError(f"unknown component {key!r}", ident=key, location="component_status")
        try:
            statuses[key] = ComponentStatus(status)
        except ValueError:
            raise KBError(f"bad component status {status!r}", ident=key, location="component_status") from None

    kb.measurements.update({k: float(v) for k, v in qa.items()})
    kb.measurements.update({k: float(v) for k, v in ea.items()})
    for key, status in statuses.items():
        kb.components[key].status = status
    kb._bump()
    return kb


def _design_ok(kb: KnowledgeBase, design: FunctionDesign) -> bool:
    for c in design.required_components:
        if kb.components[c].status is not ComponentStatus.AVAILABLE:
            return False
    for req in design.qa_requirements:
        value = kb.measurements.get(req.attribute)
        # unmeasured attributes do not block a design
        if value is not None and not req.holds(value):
            return False
    return True


def analyze(kb: KnowledgeBase) -> AnalysisResult:
    available = frozenset(d.id for d in kb.designs.values() if _design_ok(kb, d))
    in_error = set()
    for obj in kb.objectives.values():
        g = kb.active_grounding(obj.id)
        if g is not None and g.design not in available:
            in_error.add(obj.id)
    return AnalysisResult(available, frozenset(in_error), kb.generation)


def contextual_availability(kb: KnowledgeBase, context_requirements: Mapping[str, float]) -> frozenset[str]:
    """Designs available now whose EA capabilities meet every requested level.

    A design with no entry for a requested attribute counts as capability 0.
    """
    for key in context_requirements:
        attr = kb.attribute_types.get(key)
        if attr is None or attr.kind is not AttributeKind.ENVIRONMENT:
            raise KBError(f"unknown environment attribute {key!r}", ident=key, location="context")
    result = set()
    for ident in analyze(kb).available_designs:
        caps = kb.designs[ident].ea_capabilities
        if all(caps.get(k, 0.0) >= level for k, level in context_requirements.items()):
            result.add(ident)
    return frozenset(result)


# -- objectives and groundings ----------------------------------------------

def add_objective(kb: KnowledgeBase, objective: str, function: str) -> KnowledgeBase:
    if function not in kb.functions:
        raise KBError(f"unknown function {function!r}", ident=function, location="objective")
    existing = kb.objectives.get(objective)
    if existing is not None and existing.function != function:
        raise KBError(f"objective {objective!r} already bound to {existing.function!r}", ident=objective)
    if existing is None:
        kb.objectives[objective] = Objective(objective, function)
    kb._bump()
    return kb


def retire_objective(kb: KnowledgeBase, objective: str) -> KnowledgeBase:
    if objective not in kb.objectives:
        raise KBError(f"unknown objective {objective!r}", ident=objective)
    del kb.objectives[objective]
    kb.groundings = [g for g in kb.groundings if g.objective != objective]
    kb._bump()
    return kb


def set_grounding(kb: KnowledgeBase, objective: str, design: str) -> KnowledgeBase:
    obj = kb.objectives.get(objective)
    if obj is None:
        raise KBError(f"unknown objective {objective!r}", ident=objective)
    fd = kb.designs.get(design)
    if fd is None:
        raise KBError(f"unknown function design {design!r}", ident=design)
    if fd.solves != obj.function:
        raise KBError(
            f"design {design!r} solves {fd.solves!r}, objective {objective!r} needs {obj.function!r}",
            ident=design,
        )
    for g in kb.groundings:
        if g.objective == objective:
            g.active = False
    kb.groundings.append(FunctionGrounding(objective, design, True))
    obj.status = ObjectiveStatus.UNKNOWN
    kb._bump()
    return kb


def record_objective_status(kb: KnowledgeBase, result: AnalysisResult,
                            extra_errors: Iterable[str] = ()) -> KnowledgeBase:
    """Copy an analysis verdict onto the objectives' status fields."""
    errors = set(result.objectives_in_error) | set(extra_errors)
    for obj in kb.objectives.values():
        if obj.id in errors:
            obj.status = ObjectiveStatus.IN_ERROR
        elif kb.active_grounding(obj.id) is not None:
            obj.status = ObjectiveStatus.OK
    kb._bump()
    return kb
