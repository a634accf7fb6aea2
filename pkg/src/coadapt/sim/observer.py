from __future__ import annotations

from ..engine.executor import MeasurementBatch


def observer_emit(world) -> MeasurementBatch:
    """Next measurement batch for a simulated world; advances its sequence number."""
    world.sequence += 1
    return world.observe()
