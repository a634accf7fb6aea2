"""Re-drive the loop from a recorded trace instead of a live world.

The loop runs one analysis per cycle and advances the executor at most once
per cycle, so a trace splits cleanly into cycles at its ``analysis``
records: the measurements logged before analysis ``k`` are what the queue
delivered on drain ``k``, and a feedback ``action_end`` logged after it is
what advance ``k`` returned.
"""

from __future__ import annotations

from ..planner import PlanStep
from .executor import Feedback, FeedbackStatus, MeasurementBatch, WorldSnapshot
from .trace import ScenarioTrace


class ReplayDivergence(RuntimeError):
    """The engine asked for something the recording never did."""


class ReplayExecutor:
    def __init__(self, trace: ScenarioTrace):
        self.batches: list[list[MeasurementBatch]] = [[]]
        self.feedback: dict[int, Feedback] = {}
        self.times: list[float] = []
        self.snapshots: list[WorldSnapshot] = []
        self.starts: list[tuple[str, tuple[str, ...]]] = []
        for rec in trace.records:
            cycle = len(self.times)
            if rec.kind == "measurement":
                self.batches[cycle].append(MeasurementBatch.from_dict(rec.payload))
            elif rec.kind == "analysis":
                self.times.append(rec.sim_time)
                self.batches.append([])
            elif rec.kind == "action_start":
                self.starts.append((rec.payload["action"], tuple(rec.payload["args"])))
            elif rec.kind == "action_end" and rec.payload.get("via") == "feedback":
                self.feedback[cycle - 1] = Feedback(FeedbackStatus(rec.payload["status"]), rec.payload["reason"])
            if rec.kind in ("plan_request", "mission_end") and "snapshot" in rec.payload:
                self.snapshots.append(WorldSnapshot.from_dict(rec.payload["snapshot"]))
        if not self.times:
            raise ValueError("trace has no analysis records")
        self.sim_time = self.times[0]
        self._drains = 0
        self._advances = 0
        self._requests = 0
        self._snapshot_reads = 0
        self.outstanding: PlanStep | None = None

    # measurement side
    def drain(self) -> list[MeasurementBatch]:
        if self._drains >= len(self.times):
            raise ReplayDivergence("more reasoning cycles than recorded")
        out = self.batches[self._drains]
        self._drains += 1
        return out

    # executor side
    def request_action(self, step: PlanStep) -> bool:
        if self.outstanding is not None:
            raise RuntimeError("an action is already outstanding")
        expected = self.starts[self._requests] if self._requests < len(self.starts) else None
        if expected != (step.action, step.args):
            raise ReplayDivergence(f"engine requested {step}, recording has {expected}")
        self._requests += 1
        self.outstanding = step
        return True

    def advance(self) -> Feedback:
        k = self._advances
        self._advances += 1
        if k + 1 >= len(self.times):
            raise ReplayDivergence("advance past the end of the recording")
        self.sim_time = self.times[k + 1]
        fb = self.feedback.get(k, Feedback(FeedbackStatus.RUNNING))
        if fb.terminal:
            self.outstanding = None
        return fb

    def preempt(self) -> bool:
        self.outstanding = None
        return True

    def snapshot(self) -> WorldSnapshot:
        if self._snapshot_reads >= len(self.snapshots):
            raise ReplayDivergence("more world snapshots requested than recorded")
        snap = self.snapshots[self._snapshot_reads]
        self._snapshot_reads += 1
        return snap


def replay(trace: ScenarioTrace, domain, problem, kb, config=None) -> ScenarioTrace:
    """Run the loop against ``trace``'s recording and return the new trace."""
    from .loop import run_mission

    rex = ReplayExecutor(trace)
    out = ScenarioTrace()
    run_mission(domain, problem, kb, rex, rex, config, out)
    return out
