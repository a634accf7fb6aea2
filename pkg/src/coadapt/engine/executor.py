"""What the loop needs from a managed subsystem and its observers."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Protocol

from ..kb import ComponentStatus
from ..pddl.ast import Atom
from ..planner import PlanStep


@dataclass(frozen=True)
class MeasurementBatch:
    qa: Mapping[str, float] = field(default_factory=dict)
    ea: Mapping[str, float] = field(default_factory=dict)
    component_status: Mapping[str, ComponentStatus] = field(default_factory=dict)
    source: str = "observer"
    sequence: int = 0
    # context object (e.g. a corridor) -> environment requirements there
    contexts: Mapping[str, Mapping[str, float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "source": self.source,
            "sequence": self.sequence,
            "qa": dict(sorted(self.qa.items())),
            "ea": dict(sorted(self.ea.items())),
            "component_status": {k: ComponentStatus(v).value for k, v in sorted(self.component_status.items())},
            "contexts": {k: dict(sorted(v.items())) for k, v in sorted(self.contexts.items())},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MeasurementBatch":
        return cls(
            qa=dict(doc.get("qa", {})),
            ea=dict(doc.get("ea", {})),
            component_status={k: ComponentStatus(v) for k, v in doc.get("component_status", {}).items()},
            source=doc.get("source", "observer"),
            sequence=doc.get("sequence", 0),
            contexts={k: dict(v) for k, v in doc.get("contexts", {}).items()},
        )


def coalesce(batches: list[MeasurementBatch]) -> MeasurementBatch:
    """Merge batches in arrival order; later values win."""
    qa, ea, status, contexts = {}, {}, {}, {}
    for b in batches:
        qa.update(b.qa)
        ea.update(b.ea)
        status.update(b.component_status)
        for ctx, reqs in b.contexts.items():
            contexts[ctx] = dict(reqs)
    last = batches[-1] if batches else MeasurementBatch()
    return MeasurementBatch(qa, ea, status, last.source, last.sequence, contexts)


class MeasurementQueue:
    """Ordered hand-off from observers to the loop."""

    def __init__(self) -> None:
        self._pending: list[MeasurementBatch] = []
        self._last_seq: dict[str, int] = {}

    def push(self, batch: MeasurementBatch) -> None:
        last = self._last_seq.get(batch.source)
        if last is not None and batch.sequence <= last:
            raise ValueError(f"sequence for {batch.source!r} went from {last} to {batch.sequence}")
        self._last_seq[batch.source] = batch.sequence
        self._pending.append(batch)

    def drain(self) -> list[MeasurementBatch]:
        out, self._pending = self._pending, []
        return out


class FeedbackStatus(str, Enum):
    RUNNING = "Running"
    SUCCEEDED = "Succeeded"
    FAILED = "Failed"
    PREEMPTED = "Preempted"


@dataclass(frozen=True)
class Feedback:
    status: FeedbackStatus
    reason: str = ""

    @property
    def terminal(self) -> bool:
        return self.status is not FeedbackStatus.RUNNING


@dataclass(frozen=True)
class WorldSnapshot:
    """Current truth for the predicates and fluents the world owns."""

    predicates: frozenset[str]
    facts: frozenset[Atom]
    fluents: Mapping[str, float]  # 0-ary fluent name -> value

    def to_dict(self) -> dict:
        return {
            "predicates": sorted(self.predicates),
            "facts": [[a.predicate, *a.args] for a in sorted(self.facts)],
            "fluents": dict(sorted(self.fluents.items())),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "WorldSnapshot":
        return cls(frozenset(doc["predicates"]),
                   frozenset(Atom(f[0], tuple(f[1:])) for f in doc["facts"]),
                   dict(doc["fluents"]))


class Executor(Protocol):
    sim_time: float

    def request_action(self, step: PlanStep) -> bool: ...

    def advance(self) -> Feedback: ...

    def preempt(self) -> bool: ...

    def snapshot(self) -> WorldSnapshot: ...
