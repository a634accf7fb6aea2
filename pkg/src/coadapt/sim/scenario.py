"""Scenario files: which KB, domain and problem to load and how to simulate them."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..engine import LoopConfig, MeasurementQueue, MissionOutcome, ScenarioTrace, run_mission
from ..kb import KnowledgeBase, load_kb
from ..pddl import Domain, Problem, parse_domain, parse_problem
from .faults import FaultSpec
from .ugv import UgvExecutor, UgvWorld, build_ugv_world
from .uuv import UuvExecutor, UuvWorld, build_uuv_world

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"
SCENARIO_KEYS = {"kb_path", "domain_path", "problem_path", "world", "seed"}
WORLD_KEYS = {"type", "parameters", "fault_schedule"}
WORLD_TYPES = ("ugv", "uuv")


class ScenarioError(ValueError):
    pass


@dataclass
class Scenario:
    path: Path
    kb_path: Path
    domain_path: Path
    problem_path: Path
    world_type: str
    parameters: dict = field(default_factory=dict)
    faults: list[FaultSpec] = field(default_factory=list)
    seed: int = 0

    def load(self) -> tuple[Domain, Problem, KnowledgeBase]:
        """Fresh copies of the three artifacts (the KB is mutated by a run)."""
        domain = parse_domain(self.domain_path.read_text(encoding="utf-8"), str(self.domain_path))
        problem = parse_problem(self.problem_path.read_text(encoding="utf-8"), domain, str(self.problem_path))
        kb = load_kb(self.kb_path.read_text(encoding="utf-8"))
        return domain, problem, kb

    def build_world(self, problem: Problem, kb: KnowledgeBase, faults=None):
        faults = self.faults if faults is None else faults
        if self.world_type == "ugv":
            return build_ugv_world(problem, kb, self.parameters, faults)
        return build_uuv_world(problem, kb, self.parameters, faults)


def scenario_path(name: str) -> Path:
    """Path of a scenario shipped with the package, e.g. ``"ugv"``."""
    path = SCENARIO_DIR / name / "scenario.json"
    if not path.is_file():
        raise ScenarioError(f"no packaged scenario named {name!r}")
    return path


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ScenarioError(f"{path}: scenario must be a JSON object")
    missing = SCENARIO_KEYS - {"seed"} - set(doc)
    unknown = set(doc) - SCENARIO_KEYS
    if missing or unknown:
        raise ScenarioError(f"{path}: missing keys {sorted(missing)}, unknown keys {sorted(unknown)}")
    world = doc["world"]
    if not isinstance(world, dict) or "type" not in world or set(world) - WORLD_KEYS:
        raise ScenarioError(f"{path}: world needs 'type' and only {sorted(WORLD_KEYS)}")
    if world["type"] not in WORLD_TYPES:
        raise ScenarioError(f"{path}: unknown world type {world['type']!r}")
    try:
        faults = [FaultSpec.from_dict(f) for f in world.get("fault_schedule", [])]
    except (ValueError, TypeError) as exc:
        raise ScenarioError(f"{path}: bad fault: {exc}") from exc
    base = path.parent
    files = {}
    for key in ("kb_path", "domain_path", "problem_path"):
        p = base / doc[key]
        if not p.is_file():
            raise ScenarioError(f"{path}: {key} {doc[key]!r} does not exist")
        files[key] = p
    return Scenario(path, files["kb_path"], files["domain_path"], files["problem_path"], world["type"],
                    dict(world.get("parameters", {})), faults, int(doc.get("seed", 0)))


def make_executor(world):
    queue = MeasurementQueue()
    if isinstance(world, UgvWorld):
        return UgvExecutor(world, queue), queue
    return UuvExecutor(world, queue), queue


def run_scenario(scenario: Scenario, config: LoopConfig | None = None, faults=None,
                 trace: ScenarioTrace | None = None) -> tuple[MissionOutcome, object]:
    """Run a fresh copy of ``scenario``; returns the outcome and the executor."""
    domain, problem, kb = scenario.load()
    world = scenario.build_world(problem, kb, faults)
    executor, queue = make_executor(world)
    return run_mission(domain, problem, kb, executor, queue, config, trace), executor


def build_ugv_fixture() -> tuple[Domain, Problem, KnowledgeBase, UgvWorld]:
    scenario = load_scenario(scenario_path("ugv"))
    domain, problem, kb = scenario.load()
    return domain, problem, kb, scenario.build_world(problem, kb)


def build_uuv_fixture() -> tuple[Domain, Problem, KnowledgeBase, UuvWorld]:
    scenario = load_scenario(scenario_path("uuv"))
    domain, problem, kb = scenario.load()
    return domain, problem, kb, scenario.build_world(problem, kb)
