"""Cost-optimal forward search over a :class:`GroundTask`.

Uniform-cost search with a closed set keyed on (facts, fluents rounded to
1e-9). Equal-cost frontier nodes are expanded in lexicographic order of
their action sequences, where each action compares as (name, args); ground
actions are pre-sorted by that key so comparing index tuples is enough.
"""

from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

from ..pddl.grounding import GroundTask, State

FLUENT_TOLERANCE = 1e-9
DEFAULT_NODE_LIMIT = 1_000_000
DEFAULT_TIME_LIMIT = 10.0


class SearchLimitExceeded(RuntimeError):
    """Node or wall-clock cap hit before search finished."""

    def __init__(self, which: str, expanded: int):
        self.which = which
        self.expanded = expanded
        super().__init__(f"{which} exceeded after {expanded} expansions")


@dataclass(frozen=True)
class PlanStep:
    action: str
    args: tuple[str, ...]
    selected_designs: dict[str, str]
    cost: float

    def __str__(self) -> str:
        return f"{self.action}({', '.join(self.args)})"


@dataclass(frozen=True)
class Plan:
    steps: tuple[PlanStep, ...] = ()
    total_cost: float = 0.0
    expanded: int = field(default=0, compare=False)

    def __len__(self) -> int:
        return len(self.steps)


@dataclass(frozen=True)
class Unsolvable:
    unreachable_goals: frozenset[str]
    expanded: int = 0

    def __bool__(self) -> bool:
        return False


def _quantize(value: float) -> int:
    return round(value / FLUENT_TOLERANCE)


def _state_key(state: State):
    return (state.facts, tuple(_quantize(v) for v in state.fluent_values))


def relaxed_unreachable(task: GroundTask) -> frozenset[str]:
    """Goal atoms not reachable when deletes and numeric conditions are ignored."""
    reached = task.init_state.facts
    changed = True
    while changed:
        changed = False
        for a in task.actions:
            if reached & a.pre_pos == a.pre_pos and reached | a.add != reached:
                reached |= a.add
                changed = True
    return frozenset(str(task.atoms[i]) for i in task.goal if not reached >> i & 1)


def _goal_count(task: GroundTask, state: State) -> int:
    missing = task.goal_pos & ~state.facts
    return bin(missing).count("1") + bin(task.goal_neg & state.facts).count("1")


def plan(task: GroundTask, mode: str = "optimal", node_limit: int = DEFAULT_NODE_LIMIT,
         time_limit: float = DEFAULT_TIME_LIMIT) -> Plan | Unsolvable:
    """Search for a goal-reaching action sequence.

    ``mode="optimal"`` is uniform-cost search; ``mode="greedy"`` orders the
    frontier by unsatisfied goal count first and gives no optimality
    guarantee. Raises :class:`SearchLimitExceeded` when a cap is hit.
    """
    if mode not in ("optimal", "greedy"):
        raise ValueError(f"unknown planner mode {mode!r}")
    if node_limit <= 0 or time_limit <= 0:
        raise ValueError("limits must be positive")
    deadline = time.monotonic() + time_limit
    actions = task.actions
    start = task.init_state

    def priority(g_q: int, state: State, path: tuple) -> tuple:
        if mode == "greedy":
            return (_goal_count(task, state), g_q, path)
        return (g_q, path)

    # entries: (priority, g, state, path)
    frontier = [(priority(0, start, ()), 0.0, start, ())]
    best: dict = {_state_key(start): 0}
    closed: set = set()
    expanded = 0
    while frontier:
        _, g, state, path = heapq.heappop(frontier)
        key = _state_key(state)
        if key in closed:
            continue
        if task.is_goal(state):
            return _extract(task, path, expanded)
        if expanded >= node_limit:
            raise SearchLimitExceeded("node-limit", expanded)
        if expanded % 512 == 0 and time.monotonic() > deadline:
            raise SearchLimitExceeded("time-limit", expanded)
        closed.add(key)
        expanded += 1
        for i, a in enumerate(actions):
            if not a.applicable(state):
                continue
            c = a.cost(state)
            if c < 0:
                raise ValueError(f"negative cost {c} for {a}")
            nxt = a.apply(state)
            nkey = _state_key(nxt)
            if nkey in closed:
                continue
            ng = g + c
            ng_q = _quantize(ng)
            if ng_q > best.get(nkey, ng_q):
                continue
            best[nkey] = ng_q
            npath = path + (i,)
            heapq.heappush(frontier, (priority(ng_q, nxt, npath), ng, nxt, npath))
    return Unsolvable(relaxed_unreachable(task), expanded)


def _extract(task: GroundTask, path: tuple, expanded: int) -> Plan:
    state = task.init_state
    steps = []
    total = 0.0
    for i in path:
        a = task.actions[i]
        c = a.cost(state)
        steps.append(PlanStep(a.name, a.args, dict(a.designs), c))
        total += c
        state = a.apply(state)
    return Plan(tuple(steps), total, expanded)


def extract_reconfigurations(plan: Plan) -> list[tuple[int, str, str]]:
    """(step index, function, design) wherever a step switches design for a function."""
    current: dict[str, str] = {}
    out = []
    for i, step in enumerate(plan.steps):
        for function in sorted(step.selected_designs):
            design = step.selected_designs[function]
            if current.get(function) != design:
                out.append((i, function, design))
                current[function] = design
    return out
