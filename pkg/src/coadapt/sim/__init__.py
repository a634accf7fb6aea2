from .faults import FaultSchedule, FaultSpec
from .observer import observer_emit
from .scenario import (
    SCENARIO_DIR,
    Scenario,
    ScenarioError,
    build_ugv_fixture,
    build_uuv_fixture,
    load_scenario,
    make_executor,
    run_scenario,
    scenario_path,
)
from .ugv import DesignProfile, Edge, UgvExecutor, UgvWorld, build_ugv_world
from .uuv import PipelinePhase, UuvExecutor, UuvWorld, build_uuv_world
