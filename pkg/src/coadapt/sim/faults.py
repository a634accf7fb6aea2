"""Scheduled faults: a trigger condition plus a one-shot effect."""

from __future__ import annotations

from dataclasses import dataclass

TRIGGERS = ("at_node", "at_sim_time", "battery_below")
EFFECTS = ("fail_component", "set_qa", "set_ea")


@dataclass(frozen=True)
class FaultSpec:
    trigger: str
    trigger_value: object
    effect: str
    target: str
    value: float | None = None
    context: str | None = None  # set_ea only: restrict the change to one context object

    def __post_init__(self) -> None:
        if self.trigger not in TRIGGERS:
            raise ValueError(f"unknown fault trigger {self.trigger!r}")
        if self.effect not in EFFECTS:
            raise ValueError(f"unknown fault effect {self.effect!r}")
        if self.effect != "fail_component" and self.value is None:
            raise ValueError(f"{self.effect} needs a value")
        if self.context is not None and self.effect != "set_ea":
            raise ValueError("only set_ea takes a context")

    def triggered(self, node: str | None, sim_time: float, battery: float) -> bool:
        if self.trigger == "at_node":
            return node == self.trigger_value
        if self.trigger == "at_sim_time":
            return sim_time >= float(self.trigger_value)
        return battery < float(self.trigger_value)

    def to_dict(self) -> dict:
        effect: dict = {}
        if self.effect == "fail_component":
            effect["fail_component"] = self.target
        else:
            effect[self.effect] = self.target
            effect["value"] = self.value
            if self.context is not None:
                effect["context"] = self.context
        return {"trigger": {self.trigger: self.trigger_value}, "effect": effect}

    @classmethod
    def from_dict(cls, doc: dict) -> "FaultSpec":
        if not isinstance(doc, dict) or set(doc) != {"trigger", "effect"}:
            raise ValueError("fault needs exactly 'trigger' and 'effect'")
        trig, eff = doc["trigger"], dict(doc["effect"])
        if not isinstance(trig, dict) or len(trig) != 1:
            raise ValueError("trigger must have exactly one key")
        (trigger, trigger_value), = trig.items()
        kinds = [k for k in EFFECTS if k in eff]
        if len(kinds) != 1:
            raise ValueError("effect must name exactly one of " + ", ".join(EFFECTS))
        effect = kinds[0]
        extra = set(eff) - {effect, "value", "context"}
        if extra:
            raise ValueError(f"unexpected effect keys {sorted(extra)}")
        value = eff.get("value")
        return cls(trigger, trigger_value, effect, eff[effect],
                   None if value is None else float(value), eff.get("context"))


class FaultSchedule:
    """Faults in declaration order; each fires at most once."""

    def __init__(self, faults=()):
        self.faults = list(faults)
        self.fired: list[bool] = [False] * len(self.faults)

    def due(self, node: str | None, sim_time: float, battery: float) -> list[FaultSpec]:
        out = []
        for i, f in enumerate(self.faults):
            if not self.fired[i] and f.triggered(node, sim_time, battery):
                self.fired[i] = True
                out.append(f)
        return out
