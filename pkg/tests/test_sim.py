import json

import pytest

from coadapt.engine import FeedbackStatus, MeasurementQueue
from coadapt.kb import ComponentStatus
from coadapt.pddl import Atom, Literal
from coadapt.planner import PlanStep
from coadapt.sim import (
    FaultSchedule,
    FaultSpec,
    PipelinePhase,
    ScenarioError,
    UgvExecutor,
    UuvExecutor,
    build_ugv_fixture,
    build_uuv_fixture,
    load_scenario,
    observer_emit,
    run_scenario,
    scenario_path,
)

FIXTURE_EDGES = {
    ("wp1", "wp2"), ("wp2", "wp3"), ("wp1", "wp4"), ("wp2", "wp5"), ("wp3", "wp6"), ("wp4", "wp5"),
    ("wp5", "wp6"), ("wp4", "wp7"), ("wp5", "wp8"), ("wp6", "wp9"), ("wp7", "wp8"), ("wp8", "wp9"),
}


def move(design, corridor, src, dst, action="move", tag="a_move"):
    return PlanStep(action, (tag, "f_localization", design, corridor, src, dst), {"f_localization": design}, 0)


def run_to_end(executor):
    while True:
        fb = executor.advance()
        if fb.terminal:
            return fb


def test_ugv_fixture_shape():
    domain, problem, kb, world = build_ugv_fixture()
    assert {a.name for a in domain.actions} == {"move", "move_with_obstacle", "move_dark"}
    assert {tuple(sorted((e.a, e.b), key=lambda n: int(n[2:]))) for e in world.edges.values()} == FIXTURE_EDGES
    assert [c for c, e in world.edges.items() if e.obstacle] == ["c2_5"]
    assert [c for c, e in world.edges.items() if e.dark] == ["c6_9"]
    assert world.robot_at == "wp1" and world.battery == 100
    assert problem.goal == (Literal(Atom("robot_at", ("wp9",))),)
    assert len(kb.designs) == 6
    faults = load_scenario(scenario_path("ugv")).faults
    assert faults == [FaultSpec("at_node", "wp2", "fail_component", "c_kinect")]


def test_move_drains_design_usage():
    *_, world = build_ugv_fixture()
    ex = UgvExecutor(world)
    ex.request_action(move("fd_AMCL_kinect", "c1_2", "wp1", "wp2"))
    assert ex.advance().status is FeedbackStatus.SUCCEEDED
    assert world.robot_at == "wp2" and world.battery == 98
    # the scheduled kinect fault fires on arrival
    assert world.component_health["c_kinect"] is ComponentStatus.FAILED


def test_preempt_keeps_robot_at_source():
    *_, world = build_ugv_fixture()
    ex = UgvExecutor(world)
    ex.request_action(move("fd_AMCL_kinect", "c1_2", "wp1", "wp2"))
    assert ex.preempt()
    snap = ex.snapshot()
    assert [a.args for a in snap.facts] == [("wp1",)] and snap.fluents == {"battery-level": 100}
    with pytest.raises(RuntimeError):
        ex.advance()


@pytest.mark.parametrize(
    "step, reason",
    [
        (move("fd_AMCL_kinect", "c2_3", "wp2", "wp3"), "robot is at wp1"),
        (move("fd_AMCL_kinect", "c1_2", "wp1", "wp3"), "does not connect"),
        (move("fd_AMCL_kinect", "c1_2", "wp1", "wp2", action="move_dark", tag="a_move_dark"), "lit corridor"),
        (move("fd_aruco_with_light", "c1_2", "wp1", "wp2", action="teleport"), "unknown action"),
    ],
)
def test_inapplicable_move_fails_loudly(step, reason):
    *_, world = build_ugv_fixture()
    ex = UgvExecutor(world)
    ex.request_action(step)
    fb = ex.advance()
    assert fb.status is FeedbackStatus.FAILED and reason in fb.reason
    assert world.robot_at == "wp1" and world.battery == 100


def test_capability_and_health_checks():
    *_, world = build_ugv_fixture()
    world.robot_at = "wp2"
    ex = UgvExecutor(world)
    ex.request_action(move("fd_AMCL_lidar", "c2_5", "wp2", "wp5", "move_with_obstacle", "a_move_obstacle"))
    fb = ex.advance()
    assert fb.status is FeedbackStatus.FAILED and "safety" in fb.reason
    world.component_health["c_lidar"] = ComponentStatus.FAILED
    ex.request_action(move("fd_AMCL_lidar", "c2_3", "wp2", "wp3"))
    assert "c_lidar" in ex.advance().reason
    ex.request_action(move("fd_aruco", "c2_3", "wp2", "wp3"))
    with pytest.raises(RuntimeError):
        ex.request_action(move("fd_aruco", "c2_3", "wp2", "wp3"))


def test_observer_contexts():
    *_, world = build_ugv_fixture()
    batch = observer_emit(world)
    assert batch.contexts["c2_5"] == {"safety": 0.8, "dark": 0.0}
    assert batch.contexts["c1_2"] == {"safety": 0.0, "dark": 0.0}
    assert batch.contexts["c6_9"] == {"safety": 0.0, "dark": 1.0}
    assert batch.qa == {"battery_level": 100}
    again = observer_emit(world)
    assert again.sequence == batch.sequence + 1


def test_uuv_fixture_and_recharge():
    domain, problem, kb, world = build_uuv_fixture()
    assert {a.name for a in domain.actions} >= {"search_pipeline", "follow_pipeline", "recharge"}
    assert [kb.designs[d].qa_expected["battery_usage"] for d in ("fd_speed_low", "fd_speed_med", "fd_speed_high")] \
        == [1, 2, 3]
    thresholds = [[(r.attribute, r.comparator, r.threshold) for r in kb.designs[d].qa_requirements]
                  for d in ("fd_search_low", "fd_search_med", "fd_search_high")]
    assert thresholds == [[("water_visibility", ">=", t)] for t in (1.25, 2.25, 3.25)]
    world.at_charging_station = True
    world.battery = 15
    ex = UuvExecutor(world)
    ex.request_action(PlanStep("recharge", ("a_recharge", "f_power", "fd_recharge"), {"f_power": "fd_recharge"}, 10))
    assert run_to_end(ex).status is FeedbackStatus.SUCCEEDED
    assert world.battery == 100


def test_uuv_phase_order_and_drain():
    *_, world = build_uuv_fixture()
    world.fault_schedule = FaultSchedule()
    ex = UuvExecutor(world)
    follow = PlanStep("follow_pipeline", ("a_follow", "f_motion", "fd_speed_low"), {"f_motion": "fd_speed_low"}, 0)
    ex.request_action(follow)
    fb = ex.advance()
    assert fb.status is FeedbackStatus.FAILED and "not found" in fb.reason
    search = PlanStep("search_pipeline", ("a_search",), {"f_motion": "fd_speed_high", "f_search": "fd_search_high"}, 0)
    ex.request_action(search)
    assert run_to_end(ex).status is FeedbackStatus.SUCCEEDED
    assert world.phase is PipelinePhase.FOUND
    assert world.battery == pytest.approx(100 - 10 * 3)
    assert world.sim_time == 2 * 1 + 1


def test_uuv_battery_drop_aborts_search():
    *_, world = build_uuv_fixture()
    ex = UuvExecutor(world)
    search = PlanStep("search_pipeline", ("a_search",), {"f_motion": "fd_speed_high", "f_search": "fd_search_high"}, 0)
    ex.request_action(search)
    fb = run_to_end(ex)
    assert fb.status is FeedbackStatus.FAILED and fb.reason == "battery below critical level"
    assert world.phase is PipelinePhase.NOT_FOUND


def test_fault_parsing_and_once_only():
    doc = {"trigger": {"at_sim_time": 3}, "effect": {"set_ea": "safety", "value": 0.5, "context": "c1_2"}}
    spec = FaultSpec.from_dict(doc)
    assert FaultSpec.from_dict(json.loads(json.dumps(spec.to_dict()))) == spec
    schedule = FaultSchedule([spec])
    assert schedule.due(None, 2, 100) == []
    assert schedule.due(None, 3, 100) == [spec]
    assert schedule.due(None, 4, 100) == []
    for bad in (
        {"trigger": {"at_lunch": 1}, "effect": {"fail_component": "c"}},
        {"trigger": {"at_node": "wp1"}, "effect": {"set_qa": "battery_level"}},
        {"trigger": {"at_node": "wp1"}, "effect": {"fail_component": "c", "context": "c1_2"}},
        {"trigger": {"at_node": "wp1", "at_sim_time": 1}, "effect": {"fail_component": "c"}},
        {"trigger": {"at_node": "wp1"}, "effect": {"fail_component": "c"}, "note": "x"},
    ):
        with pytest.raises(ValueError):
            FaultSpec.from_dict(bad)


def test_world_validation():
    *_, world = build_ugv_fixture()
    from dataclasses import replace

    with pytest.raises(ValueError):
        replace(world, battery=120)
    with pytest.raises(ValueError):
        replace(world, robot_at="wp0")
    cut = {c: e for c, e in world.edges.items() if "wp9" not in (e.a, e.b)}
    with pytest.raises(ValueError, match="connected"):
        replace(world, edges=cut)


def test_queue_rejects_reordered_batches():
    *_, world = build_ugv_fixture()
    q = MeasurementQueue()
    first, second = observer_emit(world), observer_emit(world)
    q.push(second)
    with pytest.raises(ValueError):
        q.push(first)


@pytest.mark.parametrize("name", ["ugv", "uuv"])
def test_runs_are_deterministic(name):
    scenario = load_scenario(scenario_path(name))
    a, _ = run_scenario(scenario)
    b, _ = run_scenario(scenario)
    assert a.trace.normalized() == b.trace.normalized()


def test_scenario_loader_errors(tmp_path):
    good = json.loads(scenario_path("ugv").read_text())
    cases = {
        "extra.json": {**good, "colour": "red"},
        "world.json": {**good, "world": {"type": "boat"}},
        "fault.json": {**good, "world": {"type": "ugv", "fault_schedule": [{"trigger": {}, "effect": {}}]}},
        "missing.json": {**good, "kb_path": "nowhere.json"},
    }
    for name, doc in cases.items():
        (tmp_path / name).write_text(json.dumps(doc))
        with pytest.raises(ScenarioError):
            load_scenario(tmp_path / name)
    (tmp_path / "broken.json").write_text("{")
    with pytest.raises(ScenarioError, match="1:2"):
        load_scenario(tmp_path / "broken.json")
    with pytest.raises(ScenarioError):
        scenario_path("atlantis")
