"""Waypoint-graph ground robot with a battery and switchable localization."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..engine.executor import Feedback, FeedbackStatus, MeasurementBatch, MeasurementQueue, WorldSnapshot
from ..kb import ComponentStatus, KnowledgeBase
from ..pddl.ast import Atom, FluentTerm, Problem
from ..planner import PlanStep
from .faults import FaultSchedule
from .observer import observer_emit

MOVE_KINDS = {"move": "lit", "move_with_obstacle": "obstacle", "move_dark": "dark"}


@dataclass
class Edge:
    a: str
    b: str
    length: float = 1.0
    obstacle: bool = False
    dark: bool = False
    # environment requirements a design must meet to localize here
    requirements: dict[str, float] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return "obstacle" if self.obstacle else "dark" if self.dark else "lit"


@dataclass(frozen=True)
class DesignProfile:
    components: frozenset[str]
    battery_usage: float
    capabilities: dict


@dataclass
class UgvWorld:
    nodes: list[str]
    edges: dict[str, Edge]
    robot_at: str
    battery: float
    component_health: dict[str, ComponentStatus]
    designs: dict[str, DesignProfile]
    fault_schedule: FaultSchedule = field(default_factory=FaultSchedule)
    ea: dict[str, float] = field(default_factory=dict)
    sim_time: float = 0.0
    sequence: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.battery <= 100:
            raise ValueError("battery must lie in [0, 100]")
        if self.robot_at not in self.nodes:
            raise ValueError(f"unknown start node {self.robot_at!r}")
        seen = {self.nodes[0]}
        frontier = [self.nodes[0]]
        while frontier:
            n = frontier.pop()
            for e in self.edges.values():
                for x, y in ((e.a, e.b), (e.b, e.a)):
                    if x == n and y not in seen:
                        seen.add(y)
                        frontier.append(y)
        if seen != set(self.nodes):
            raise ValueError("waypoint graph is not connected")

    def edge_between(self, corridor: str, src: str, dst: str) -> Edge | None:
        e = self.edges.get(corridor)
        if e is None or {e.a, e.b} != {src, dst} or src == dst:
            return None
        return e

    def apply_faults(self) -> None:
        for f in self.fault_schedule.due(self.robot_at, self.sim_time, self.battery):
            if f.effect == "fail_component":
                self.component_health[f.target] = ComponentStatus.FAILED
            elif f.effect == "set_qa":
                if f.target != "battery_level":
                    raise ValueError(f"ugv world cannot set quality attribute {f.target!r}")
                self.battery = min(100.0, max(0.0, f.value))
            elif f.context is not None:
                self.edges[f.context].requirements[f.target] = f.value
            else:
                self.ea[f.target] = f.value

    def observe(self) -> MeasurementBatch:
        return MeasurementBatch(
            qa={"battery_level": self.battery},
            ea=dict(self.ea),
            component_status=dict(self.component_health),
            source="ugv_observer",
            sequence=self.sequence,
            contexts={c: dict(e.requirements) for c, e in self.edges.items()},
        )


def build_ugv_world(problem: Problem, kb: KnowledgeBase, parameters: dict | None = None,
                    faults=()) -> UgvWorld:
    """Read the map, start and battery out of ``problem`` and design data out of ``kb``."""
    params = {"obstacle_safety": 0.8, "dark_level": 1.0, **(parameters or {})}
    nodes = sorted(o.name for o in problem.objects if o.type == "waypoint")
    edges: dict[str, Edge] = {}
    for atom in sorted(problem.init):
        if atom.predicate == "connects":
            c, a, b = atom.args
            if c not in edges:
                edges[c] = Edge(a, b)
    for atom in problem.init:
        if atom.predicate == "obstacle":
            edges[atom.args[0]].obstacle = True
        elif atom.predicate == "dark":
            edges[atom.args[0]].dark = True
    for c, e in edges.items():
        e.length = problem.fluents.get(FluentTerm("corridor_length", (c,)), 1.0)
        e.requirements = {
            "safety": float(params["obstacle_safety"]) if e.obstacle else 0.0,
            "dark": float(params["dark_level"]) if e.dark else 0.0,
        }
    start = next(a.args[0] for a in problem.init if a.predicate == "robot_at")
    battery = problem.fluents[FluentTerm("battery-level", ())]
    designs = {
        d.id: DesignProfile(d.required_components, d.qa_expected.get("battery_usage", 0.0), dict(d.ea_capabilities))
        for d in kb.designs.values()
    }
    health = {c.id: c.status for c in kb.components.values()}
    return UgvWorld(nodes, edges, start, battery, health, designs, FaultSchedule(faults))


class UgvExecutor:
    """Executes move steps one waypoint at a time."""

    def __init__(self, world: UgvWorld, queue: MeasurementQueue | None = None):
        self.world = world
        self.queue = queue if queue is not None else MeasurementQueue()
        self.outstanding: PlanStep | None = None
        self.executed: list[tuple[str, float, float]] = []  # (design, usage, length)
        self.queue.push(observer_emit(world))

    @property
    def sim_time(self) -> float:
        return self.world.sim_time

    def request_action(self, step: PlanStep) -> bool:
        if self.outstanding is not None:
            raise RuntimeError("an action is already outstanding")
        self.outstanding = step
        return True

    def preempt(self) -> bool:
        # moves are atomic, so a preempted move never left its source
        self.outstanding = None
        return True

    def _check(self, step: PlanStep) -> tuple[str, Edge | None, DesignProfile | None]:
        w = self.world
        kind = MOVE_KINDS.get(step.action)
        if kind is None or len(step.args) != 6:
            return f"unknown action {step.action}", None, None
        _, _, design, corridor, src, dst = step.args
        if w.robot_at != src:
            return f"robot is at {w.robot_at}, not {src}", None, None
        edge = w.edge_between(corridor, src, dst)
        if edge is None:
            return f"{corridor} does not connect {src} and {dst}", None, None
        if edge.kind != kind:
            return f"{step.action} cannot traverse a {edge.kind} corridor", None, None
        profile = w.designs.get(design)
        if profile is None:
            return f"unknown design {design}", None, None
        broken = sorted(c for c in profile.components if w.component_health.get(c) is not ComponentStatus.AVAILABLE)
        if broken:
            return f"{design} needs failed component {broken[0]}", None, None
        for attr, level in edge.requirements.items():
            if profile.capabilities.get(attr, 0.0) < level:
                return f"{design} cannot localize in {corridor} ({attr} {level})", None, None
        if w.battery < profile.battery_usage * edge.length:
            return "battery too low", None, None
        return "", edge, profile

    def advance(self) -> Feedback:
        step = self.outstanding
        if step is None:
            raise RuntimeError("no outstanding action")
        self.outstanding = None
        w = self.world
        problem, edge, profile = self._check(step)
        if problem:
            self.queue.push(observer_emit(w))
            return Feedback(FeedbackStatus.FAILED, problem)
        w.robot_at = step.args[5]
        w.battery -= profile.battery_usage * edge.length
        w.sim_time += edge.length
        self.executed.append((step.args[2], profile.battery_usage, edge.length))
        w.apply_faults()
        self.queue.push(observer_emit(w))
        return Feedback(FeedbackStatus.SUCCEEDED)

    def snapshot(self) -> WorldSnapshot:
        return WorldSnapshot(frozenset({"robot_at"}), frozenset({Atom("robot_at", (self.world.robot_at,))}),
                             {"battery-level": self.world.battery})
