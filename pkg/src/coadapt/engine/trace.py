"""Newline-delimited JSON mission trace."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

TRACE_KINDS = (
    "measurement",
    "analysis",
    "event",
    "plan_request",
    "plan",
    "action_start",
    "action_end",
    "grounding",
    "mission_end",
)


@dataclass(frozen=True)
class TraceRecord:
    seq: int
    sim_time: float
    kind: str
    payload: dict
    wall_time: float | None = None

    def to_dict(self, with_wall_time: bool = True) -> dict:
        doc = {"seq": self.seq, "sim_time": self.sim_time, "kind": self.kind, "payload": self.payload}
        if with_wall_time and self.wall_time is not None:
            doc["wall_time"] = self.wall_time
        return doc


@dataclass
class ScenarioTrace:
    records: list[TraceRecord] = field(default_factory=list)
    clock: Callable[[], float] = time.time

    def append(self, sim_time: float, kind: str, payload: dict) -> TraceRecord:
        if kind not in TRACE_KINDS:
            raise ValueError(f"unknown trace kind {kind!r}")
        # round-trip through JSON so records hold exactly what a file would
        payload = json.loads(json.dumps(payload))
        rec = TraceRecord(len(self.records), sim_time, kind, payload, self.clock())
        self.records.append(rec)
        return rec

    def of_kind(self, kind: str) -> list[TraceRecord]:
        return [r for r in self.records if r.kind == kind]

    def dumps(self, with_wall_time: bool = True) -> str:
        return "".join(
            json.dumps(r.to_dict(with_wall_time), sort_keys=True, separators=(",", ":")) + "\n"
            for r in self.records
        )

    def normalized(self) -> str:
        """The trace without wall-clock timestamps, for byte comparison."""
        return self.dumps(with_wall_time=False)

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())


def loads_trace(text: str) -> ScenarioTrace:
    trace = ScenarioTrace()
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        doc = json.loads(line)
        missing = {"seq", "sim_time", "kind", "payload"} - set(doc)
        if missing:
            raise ValueError(f"line {lineno}: missing {sorted(missing)}")
        if doc["kind"] not in TRACE_KINDS:
            raise ValueError(f"line {lineno}: unknown kind {doc['kind']!r}")
        trace.records.append(TraceRecord(doc["seq"], doc["sim_time"], doc["kind"], doc["payload"],
                                         doc.get("wall_time")))
    return trace


def normalize(text: str) -> str:
    return loads_trace(text).normalized()
