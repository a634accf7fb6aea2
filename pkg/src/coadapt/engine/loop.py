"""The adaptation loop: monitor and analyze, then plan and execute.

Each cycle drains every pending measurement batch, runs one reasoner step
on the merged batch and, when that step reports an event, preempts the
running action and replans from the world's current state. Otherwise the
next plan step is dispatched (or the running one advanced).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from ..kb import KnowledgeBase, add_objective, analyze, contextual_availability, retire_objective, \
    set_grounding, update_measurements
from ..pddl.ast import Domain, FluentTerm, Literal, Problem
from ..pddl.grounding import ground
from ..pddl.linking import require_linking_pattern, update_problem
from ..planner import DEFAULT_NODE_LIMIT, DEFAULT_TIME_LIMIT, Plan, PlanStep, SearchLimitExceeded, \
    Unsolvable, plan as search, plan_to_dict
from .executor import Executor, FeedbackStatus, MeasurementBatch, WorldSnapshot, coalesce
from .trace import ScenarioTrace


class EventKind(str, Enum):
    FD_SET_CHANGED = "FdSetChanged"
    OBJECTIVE_ERROR = "ObjectiveError"


@dataclass(frozen=True)
class AdaptationEvent:
    kind: EventKind
    detail: tuple[str, ...]
    kb_generation: int

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "detail": list(self.detail), "kb_generation": self.kb_generation}


class Phase(str, Enum):
    IDLE = "Idle"
    PLANNING = "Planning"
    EXECUTING = "Executing"
    SUCCEEDED = "Succeeded"
    FAILED = "Failed"


@dataclass
class MissionStatus:
    phase: Phase = Phase.IDLE
    current_plan: Plan | None = None
    current_step: int | None = None
    replan_count: int = 0

    def enter(self, phase: Phase, step: int | None = None) -> None:
        self.phase = phase
        self.current_step = step if phase is Phase.EXECUTING else None


@dataclass
class MissionOutcome:
    status: Phase
    reason: str = ""
    plans: list[Plan] = field(default_factory=list)
    replan_count: int = 0
    trace: ScenarioTrace = field(default_factory=ScenarioTrace)

    @property
    def succeeded(self) -> bool:
        return self.status is Phase.SUCCEEDED


def objective_id(function: str) -> str:
    return f"o_{function}"


def reasoner_step(kb: KnowledgeBase, batch: MeasurementBatch | None, fd_old: frozenset[str] | None,
                  extra_errors: Iterable[str] = ()) -> tuple[frozenset[str], list[AdaptationEvent]]:
    """Update the knowledge base, analyze it and decide whether to ask for a plan.

    ``extra_errors`` are objectives the caller already knows to be failing
    (an action that the executor reported as failed). ``fd_old=None`` means
    no plan exists yet, which always counts as a change.
    """
    batch = batch or MeasurementBatch()
    update_measurements(kb, batch.qa, batch.ea, batch.component_status)
    result = analyze(kb)
    fd_new = result.available_designs
    events = []
    if fd_old is None or fd_new != fd_old:
        changed = fd_new if fd_old is None else fd_new ^ fd_old
        events.append(AdaptationEvent(EventKind.FD_SET_CHANGED, tuple(sorted(changed)), kb.generation))
    errors = set(result.objectives_in_error) | set(extra_errors)
    if errors:
        events.append(AdaptationEvent(EventKind.OBJECTIVE_ERROR, tuple(sorted(errors)), kb.generation))
    return fd_new, events


def sync_problem_with_world(problem: Problem, snapshot: WorldSnapshot) -> Problem:
    """Replace the world-owned facts and fluents in ``init`` with ``snapshot``."""
    objects = problem.object_types()
    for atom in snapshot.facts:
        if atom.predicate not in snapshot.predicates:
            raise ValueError(f"snapshot fact {atom} uses a predicate it does not own")
        for arg in atom.args:
            if arg not in objects:
                raise ValueError(f"snapshot references unknown object {arg!r}")
    fluents = dict(problem.fluents)
    for name, value in snapshot.fluents.items():
        term = FluentTerm(name, ())
        if term not in fluents:
            raise ValueError(f"snapshot references unknown fluent {name!r}")
        fluents[term] = float(value)
    kept = {a for a in problem.init if a.predicate not in snapshot.predicates}
    return problem.replace(init=frozenset(kept | set(snapshot.facts)), fluents=fluents)


def contextual_pairs(kb: KnowledgeBase, contexts: dict) -> list[tuple[str, str]]:
    pairs = []
    for ctx in sorted(contexts):
        for design in sorted(contextual_availability(kb, contexts[ctx])):
            pairs.append((design, ctx))
    return pairs


@dataclass
class LoopConfig:
    mode: str = "optimal"
    node_limit: int = DEFAULT_NODE_LIMIT
    time_limit: float = DEFAULT_TIME_LIMIT
    max_replans: int = 25
    max_cycles: int = 100_000


def run_mission(domain: Domain, problem: Problem, kb: KnowledgeBase, executor: Executor, measurements,
                config: LoopConfig | None = None, trace: ScenarioTrace | None = None) -> MissionOutcome:
    """Drive ``executor`` to the problem goal, replanning on adaptation events.

    ``measurements`` is anything with a ``drain()`` returning the batches
    that arrived since the last call.
    """
    config = config or LoopConfig()
    diagnostics = require_linking_pattern(domain, problem)
    if diagnostics:
        raise ValueError("linking pattern violated:\n" + "\n".join(map(str, diagnostics)))
    trace = trace if trace is not None else ScenarioTrace()
    outcome = MissionOutcome(Phase.IDLE, trace=trace)
    status = MissionStatus()

    def log(kind: str, payload: dict) -> None:
        trace.append(executor.sim_time, kind, payload)

    def finish(phase: Phase, reason: str, extra: dict | None = None) -> MissionOutcome:
        status.enter(phase)
        outcome.status = phase
        outcome.reason = reason
        outcome.replan_count = status.replan_count
        log("mission_end", {"status": phase.value, "reason": reason, "replan_count": status.replan_count,
                            **(extra or {})})
        return outcome

    fd_old: frozenset[str] | None = None
    contexts: dict[str, dict[str, float]] = {}
    current: Plan | None = None
    index = 0
    outstanding: PlanStep | None = None
    pending_errors: set[str] = set()

    def start_step(step: PlanStep) -> None:
        for function, design in sorted(step.selected_designs.items()):
            obj = objective_id(function)
            add_objective(kb, obj, function)
            set_grounding(kb, obj, design)
            log("grounding", {"op": "set", "objective": obj, "function": function, "design": design})

    def end_step(step: PlanStep) -> None:
        for function in sorted(step.selected_designs):
            obj = objective_id(function)
            if obj in kb.objectives:
                retire_objective(kb, obj)
                log("grounding", {"op": "retire", "objective": obj, "function": function})

    for _ in range(config.max_cycles):
        batches = measurements.drain()
        for b in batches:
            log("measurement", b.to_dict())
        batch = coalesce(batches)
        for ctx, reqs in batch.contexts.items():
            contexts[ctx] = dict(reqs)
        fd_new, events = reasoner_step(kb, batch, fd_old, pending_errors)
        errors = next((e.detail for e in events if e.kind is EventKind.OBJECTIVE_ERROR), ())
        log("analysis", {
            "available_designs": sorted(fd_new),
            "objectives_in_error": list(errors),
            "changed": fd_old is None or fd_new != fd_old,
            "generation": kb.generation,
        })
        pending_errors = set()
        for e in events:
            log("event", e.to_dict())
        fd_old = fd_new

        if events:
            if outstanding is not None:
                executor.preempt()
                log("action_end", {"index": index, "action": outstanding.action, "args": list(outstanding.args),
                                   "status": FeedbackStatus.PREEMPTED.value, "reason": "adaptation event",
                                   "via": "preempt"})
                end_step(outstanding)
                outstanding = None
            status.enter(Phase.PLANNING)
            snapshot = executor.snapshot()
            pairs = contextual_pairs(kb, contexts)
            log("plan_request", {
                "reasons": [e.kind.value for e in events],
                "available_designs": sorted(fd_new),
                "contextual": [list(p) for p in pairs],
                "snapshot": snapshot.to_dict(),
            })
            if current is not None and status.replan_count >= config.max_replans:
                return finish(Phase.FAILED, "replan-limit")
            problem = update_problem(problem, fd_new, pairs)
            problem = sync_problem_with_world(problem, snapshot)
            try:
                result = search(ground(domain, problem), config.mode, config.node_limit, config.time_limit)
            except SearchLimitExceeded as exc:
                log("plan", {"solvable": False, "limit": exc.which, "expanded": exc.expanded})
                return finish(Phase.FAILED, "resource-cap", {"limit": exc.which})
            if isinstance(result, Unsolvable):
                log("plan", {"solvable": False, "unreachable_goals": sorted(result.unreachable_goals),
                             "expanded": result.expanded})
                return finish(Phase.FAILED, "no-plan")
            if current is not None:
                status.replan_count += 1
            current = result
            status.current_plan = result
            outcome.plans.append(result)
            index = 0
            log("plan", {"solvable": True, "number": len(outcome.plans), **plan_to_dict(result)})

        if outstanding is None:
            if current is None or index >= len(current.steps):
                snapshot = executor.snapshot()
                final = sync_problem_with_world(problem, snapshot)
                reached = _goal_reached(domain, final)
                extra = {"snapshot": snapshot.to_dict()}
                if reached:
                    return finish(Phase.SUCCEEDED, "goal reached", extra)
                return finish(Phase.FAILED, "goal-not-reached", extra)
            step = current.steps[index]
            start_step(step)
            status.enter(Phase.EXECUTING, index)
            executor.request_action(step)
            log("action_start", {"index": index, "action": step.action, "args": list(step.args),
                                 "designs": dict(sorted(step.selected_designs.items()))})
            outstanding = step

        fb = executor.advance()
        if not fb.terminal:
            continue
        log("action_end", {"index": index, "action": outstanding.action, "args": list(outstanding.args),
                           "status": fb.status.value, "reason": fb.reason, "via": "feedback"})
        if fb.status is FeedbackStatus.SUCCEEDED:
            index += 1
        else:
            pending_errors = {objective_id(f) for f in outstanding.selected_designs}
        end_step(outstanding)
        outstanding = None
    return finish(Phase.FAILED, "cycle-limit")


def _goal_reached(domain: Domain, problem: Problem) -> bool:
    if all(isinstance(c, Literal) for c in problem.goal):
        return all((c.atom in problem.init) == c.positive for c in problem.goal)
    task = ground(domain, problem)
    return task.is_goal(task.init_state)
