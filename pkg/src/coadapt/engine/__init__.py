from .executor import (
    Executor,
    Feedback,
    FeedbackStatus,
    MeasurementBatch,
    MeasurementQueue,
    WorldSnapshot,
    coalesce,
)
from .loop import (
    AdaptationEvent,
    EventKind,
    LoopConfig,
    MissionOutcome,
    MissionStatus,
    Phase,
    contextual_pairs,
    objective_id,
    reasoner_step,
    run_mission,
    sync_problem_with_world,
)
from .trace import TRACE_KINDS, ScenarioTrace, TraceRecord, loads_trace, normalize
from .replay import ReplayDivergence, ReplayExecutor, replay
