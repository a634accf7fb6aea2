"""Underwater vehicle that searches for a pipeline, follows it and can recharge.

Actions take several ticks of simulated time. Battery drains linearly over
an action and each tick is computed from the level at the start, so the
last tick lands exactly on start minus total. Searching or following below the critical battery level fails.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..engine.executor import Feedback, FeedbackStatus, MeasurementBatch, MeasurementQueue, WorldSnapshot
from ..kb import ComponentStatus, KnowledgeBase
from ..pddl.ast import Atom, FluentTerm, Problem
from ..planner import PlanStep
from .faults import FaultSchedule
from .observer import observer_emit

DEFAULT_PARAMETERS = {
    "critical_battery": 25.0,
    "water_visibility": 3.5,
    "recharge_level": 100.0,
    "search_battery_factor": 10.0,
    "follow_battery_factor": 15.0,
    "station_battery_factor": 5.0,
    "search_time_factor": 2.0,
    "follow_time_factor": 4.0,
    "station_time_factor": 2.0,
}


class PipelinePhase(str, Enum):
    NOT_FOUND = "NotFound"
    FOUND = "Found"
    INSPECTED = "Inspected"


@dataclass
class UuvWorld:
    battery: float
    water_visibility: float
    phase: PipelinePhase = PipelinePhase.NOT_FOUND
    at_charging_station: bool = False
    component_health: dict[str, ComponentStatus] = field(default_factory=dict)
    usage: dict[str, float] = field(default_factory=dict)  # design -> battery usage
    duration: dict[str, float] = field(default_factory=dict)  # design -> time
    components: dict[str, frozenset[str]] = field(default_factory=dict)
    parameters: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_PARAMETERS))
    fault_schedule: FaultSchedule = field(default_factory=FaultSchedule)
    sim_time: float = 0.0
    sequence: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.battery <= 100:
            raise ValueError("battery must lie in [0, 100]")

    def apply_faults(self) -> None:
        for f in self.fault_schedule.due(None, self.sim_time, self.battery):
            if f.effect == "fail_component":
                self.component_health[f.target] = ComponentStatus.FAILED
            elif f.effect == "set_qa":
                if f.target != "battery_level":
                    raise ValueError(f"uuv world cannot set quality attribute {f.target!r}")
                self.battery = min(100.0, max(0.0, f.value))
            elif f.target == "water_visibility":
                self.water_visibility = f.value
            else:
                raise ValueError(f"uuv world has no environment attribute {f.target!r}")

    def observe(self) -> MeasurementBatch:
        return MeasurementBatch(
            qa={"battery_level": self.battery},
            ea={"water_visibility": self.water_visibility},
            component_status=dict(self.component_health),
            source="uuv_observer",
            sequence=self.sequence,
        )


def build_uuv_world(problem: Problem, kb: KnowledgeBase, parameters: dict | None = None,
                    faults=()) -> UuvWorld:
    params = {**DEFAULT_PARAMETERS, **(parameters or {})}
    facts = {a.predicate for a in problem.init if not a.args}
    phase = PipelinePhase.NOT_FOUND
    if "pipeline_inspected" in facts:
        phase = PipelinePhase.INSPECTED
    elif "pipeline_found" in facts:
        phase = PipelinePhase.FOUND
    return UuvWorld(
        battery=problem.fluents[FluentTerm("battery-level", ())],
        water_visibility=params["water_visibility"],
        phase=phase,
        at_charging_station="at_station" in facts,
        component_health={c.id: c.status for c in kb.components.values()},
        usage={d.id: d.qa_expected.get("battery_usage", 0.0) for d in kb.designs.values()},
        duration={d.id: d.qa_expected.get("duration", 1.0) for d in kb.designs.values()},
        components={d.id: d.required_components for d in kb.designs.values()},
        parameters=params,
        fault_schedule=FaultSchedule(faults),
    )


@dataclass
class _Running:
    step: PlanStep
    ticks: int
    drain: float
    base: float = 0.0  # battery the linear drain is measured from
    elapsed: int = 0


class UuvExecutor:
    def __init__(self, world: UuvWorld, queue: MeasurementQueue | None = None):
        self.world = world
        self.queue = queue if queue is not None else MeasurementQueue()
        self.running: _Running | None = None
        self.queue.push(observer_emit(world))

    @property
    def sim_time(self) -> float:
        return self.world.sim_time

    def request_action(self, step: PlanStep) -> bool:
        if self.running is not None:
            raise RuntimeError("an action is already outstanding")
        w, p = self.world, self.world.parameters
        fd = step.selected_designs
        ticks, drain = 1, 0.0
        if step.action == "search_pipeline" and "f_motion" in fd and "f_search" in fd:
            ticks = p["search_time_factor"] * w.duration[fd["f_motion"]] + w.duration[fd["f_search"]]
            drain = p["search_battery_factor"] * w.usage[fd["f_motion"]]
        elif step.action == "follow_pipeline" and "f_motion" in fd:
            ticks = p["follow_time_factor"] * w.duration[fd["f_motion"]]
            drain = p["follow_battery_factor"] * w.usage[fd["f_motion"]]
        elif step.action == "go_to_station" and "f_motion" in fd:
            ticks = p["station_time_factor"] * w.duration[fd["f_motion"]]
            drain = p["station_battery_factor"] * w.usage[fd["f_motion"]]
        elif step.action == "recharge" and "f_power" in fd:
            ticks = w.duration[fd["f_power"]]
        self.running = _Running(step, max(1, int(round(ticks))), drain)
        return True

    def preempt(self) -> bool:
        # partial progress is lost, battery already spent stays spent
        self.running = None
        return True

    def _precondition_problem(self, step: PlanStep) -> str:
        w = self.world
        broken = sorted(c for d in step.selected_designs.values() for c in w.components.get(d, ())
                        if w.component_health.get(c) is not ComponentStatus.AVAILABLE)
        if broken:
            return f"component {broken[0]} failed"
        if step.action == "search_pipeline":
            return "" if w.phase is PipelinePhase.NOT_FOUND else "pipeline already found"
        if step.action == "follow_pipeline":
            return "" if w.phase is PipelinePhase.FOUND else "pipeline not found yet"
        if step.action == "go_to_station":
            return "" if not w.at_charging_station else "already at the station"
        if step.action == "recharge":
            return "" if w.at_charging_station else "not at the charging station"
        return f"unknown action {step.action}"

    def advance(self) -> Feedback:
        run = self.running
        if run is None:
            raise RuntimeError("no outstanding action")
        w = self.world
        step = run.step
        if run.elapsed == 0:
            problem = self._precondition_problem(step)
            if problem:
                self.running = None
                self.queue.push(observer_emit(w))
                return Feedback(FeedbackStatus.FAILED, problem)
            if step.action == "search_pipeline":
                w.at_charging_station = False
            run.base = w.battery
        run.elapsed += 1
        w.sim_time += 1
        level = run.base - run.drain * run.elapsed / run.ticks
        if level < 0:
            w.battery = 0.0
            w.apply_faults()
            self.running = None
            self.queue.push(observer_emit(w))
            return Feedback(FeedbackStatus.FAILED, "battery depleted")
        w.battery = level
        w.apply_faults()
        if w.battery != level:
            # a fault overwrote the level; keep draining from there
            run.base = w.battery + run.drain * run.elapsed / run.ticks
        if step.action in ("search_pipeline", "follow_pipeline") and w.battery < w.parameters["critical_battery"]:
            self.running = None
            self.queue.push(observer_emit(w))
            return Feedback(FeedbackStatus.FAILED, "battery below critical level")
        if run.elapsed < run.ticks:
            self.queue.push(observer_emit(w))
            return Feedback(FeedbackStatus.RUNNING)
        if step.action == "search_pipeline":
            w.phase = PipelinePhase.FOUND
        elif step.action == "follow_pipeline":
            w.phase = PipelinePhase.INSPECTED
        elif step.action == "go_to_station":
            w.at_charging_station = True
        elif step.action == "recharge":
            w.battery = w.parameters["recharge_level"]
        self.running = None
        self.queue.push(observer_emit(w))
        return Feedback(FeedbackStatus.SUCCEEDED)

    def snapshot(self) -> WorldSnapshot:
        w = self.world
        facts = set()
        if w.phase is not PipelinePhase.NOT_FOUND:
            facts.add(Atom("pipeline_found", ()))
        if w.phase is PipelinePhase.INSPECTED:
            facts.add(Atom("pipeline_inspected", ()))
        if w.at_charging_station:
            facts.add(Atom("at_station", ()))
        return WorldSnapshot(frozenset({"pipeline_found", "pipeline_inspected", "at_station"}),
                             frozenset(facts), {"battery-level": w.battery})
