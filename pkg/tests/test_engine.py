import json

import pytest

from coadapt.engine import (
    EventKind,
    LoopConfig,
    MeasurementBatch,
    MeasurementQueue,
    Phase,
    ReplayDivergence,
    ScenarioTrace,
    WorldSnapshot,
    coalesce,
    loads_trace,
    normalize,
    reasoner_step,
    replay,
    run_mission,
    sync_problem_with_world,
)
from coadapt.kb import add_objective, load_kb, set_grounding
from coadapt.pddl import Atom, FluentTerm, ground, parse_problem, print_problem
from coadapt.planner import plan
from coadapt.sim import load_scenario, run_scenario, scenario_path
from oracles import SCENARIOS, trace_violations

ALL_UGV = frozenset({"fd_AMCL_lidar", "fd_AMCL_kinect", "fd_MRPT_lidar", "fd_MRPT_kinect", "fd_aruco",
                     "fd_aruco_with_light"})


def ugv_scenario():
    return load_scenario(scenario_path("ugv"))


def test_reasoner_step_kinect_failure():
    kb = load_kb((SCENARIOS / "ugv" / "kb.json").read_text())
    fd, events = reasoner_step(kb, MeasurementBatch(qa={"battery_level": 100}), None)
    assert fd == ALL_UGV and [e.kind for e in events] == [EventKind.FD_SET_CHANGED]
    fd2, events = reasoner_step(kb, MeasurementBatch(component_status={"c_kinect": "Failed"}), fd)
    assert fd2 == {"fd_AMCL_lidar", "fd_MRPT_lidar", "fd_aruco", "fd_aruco_with_light"}
    assert len(events) == 1 and events[0].kind is EventKind.FD_SET_CHANGED
    assert set(events[0].detail) == {"fd_AMCL_kinect", "fd_MRPT_kinect"}
    _, events = reasoner_step(kb, MeasurementBatch(component_status={"c_kinect": "Failed"}), fd2)
    assert events == []


def test_reasoner_step_requirement_violation():
    doc = {
        "functions": [{"id": "f_motion"}],
        "components": [],
        "attribute_types": [{"id": "battery_level", "kind": "Quality"}],
        "function_designs": [
            {"id": "fd_fast", "solves": "f_motion",
             "qa_requirements": [{"attribute": "battery_level", "comparator": ">=", "threshold": 50}]},
            {"id": "fd_slow", "solves": "f_motion"},
        ],
    }
    kb = load_kb(json.dumps(doc))
    add_objective(kb, "o_f_motion", "f_motion")
    set_grounding(kb, "o_f_motion", "fd_fast")
    fd, _ = reasoner_step(kb, MeasurementBatch(qa={"battery_level": 80}), None)
    fd, events = reasoner_step(kb, MeasurementBatch(qa={"battery_level": 40}), fd)
    kinds = [e.kind for e in events]
    assert EventKind.OBJECTIVE_ERROR in kinds and EventKind.FD_SET_CHANGED in kinds
    assert next(e for e in events if e.kind is EventKind.OBJECTIVE_ERROR).detail == ("o_f_motion",)
    # a failing executor alone is enough
    _, events = reasoner_step(kb, MeasurementBatch(qa={"battery_level": 40}), fd, {"o_other"})
    assert [e.kind for e in events] == [EventKind.OBJECTIVE_ERROR]


def test_coalesce_and_queue_order():
    a = MeasurementBatch(qa={"battery_level": 90}, sequence=1, contexts={"c1": {"safety": 0.8}})
    b = MeasurementBatch(qa={"battery_level": 80}, sequence=2, component_status={"c_kinect": "Failed"})
    merged = coalesce([a, b])
    assert merged.qa == {"battery_level": 80} and merged.contexts == {"c1": {"safety": 0.8}}
    assert merged.sequence == 2
    q = MeasurementQueue()
    q.push(a)
    q.push(b)
    with pytest.raises(ValueError):
        q.push(a)
    assert q.drain() == [a, b] and q.drain() == []
    assert MeasurementBatch.from_dict(b.to_dict()) == b


def test_sync_problem_with_world():
    domain, problem, _ = ugv_scenario().load()
    snap = WorldSnapshot(frozenset({"robot_at"}), frozenset({Atom("robot_at", ("wp2",))}), {"battery-level": 96})
    synced = sync_problem_with_world(problem, snap)
    assert Atom("robot_at", ("wp2",)) in synced.init and Atom("robot_at", ("wp1",)) not in synced.init
    assert synced.fluents[FluentTerm("battery-level")] == 96
    assert synced.init - {Atom("robot_at", ("wp2",))} == problem.init - {Atom("robot_at", ("wp1",))}

    same = WorldSnapshot(frozenset({"robot_at"}), frozenset({Atom("robot_at", ("wp1",))}), {"battery-level": 100})
    assert print_problem(sync_problem_with_world(problem, same)) == print_problem(problem)

    at_goal = WorldSnapshot(frozenset({"robot_at"}), frozenset({Atom("robot_at", ("wp9",))}), {})
    assert plan(ground(domain, sync_problem_with_world(problem, at_goal))).steps == ()

    with pytest.raises(ValueError, match="wp42"):
        sync_problem_with_world(problem, WorldSnapshot(frozenset({"robot_at"}),
                                                       frozenset({Atom("robot_at", ("wp42",))}), {}))
    with pytest.raises(ValueError, match="fuel"):
        sync_problem_with_world(problem, WorldSnapshot(frozenset(), frozenset(), {"fuel": 1}))


def test_fault_free_run_plans_once():
    outcome, executor = run_scenario(ugv_scenario(), faults=[])
    assert outcome.status is Phase.SUCCEEDED and outcome.succeeded
    assert len(outcome.plans) == 1 and outcome.replan_count == 0
    assert len(outcome.trace.of_kind("plan_request")) == 1
    assert trace_violations(outcome.trace.records) == []


@pytest.mark.parametrize("name", ["ugv", "uuv", "uuv_visibility", "ugv_mod1", "ugv_mod2", "ugv_mod3"])
def test_trace_invariants_on_shipped_scenarios(name):
    outcome, _ = run_scenario(load_scenario(scenario_path(name)))
    assert outcome.status is Phase.SUCCEEDED
    assert trace_violations(outcome.trace.records) == []
    kinds = [r.kind for r in outcome.trace.records]
    assert kinds[-1] == "mission_end"
    assert [r.seq for r in outcome.trace.records] == list(range(len(kinds)))


def test_preempt_is_logged_before_replanning():
    outcome, _ = run_scenario(ugv_scenario())
    ends = [r.payload for r in outcome.trace.of_kind("action_end")]
    requests = outcome.trace.of_kind("plan_request")
    assert len(requests) == 2
    assert requests[1].payload["reasons"] == ["FdSetChanged"]
    assert requests[1].payload["snapshot"]["facts"] == [["robot_at", "wp2"]]
    assert all(e["status"] in ("Succeeded", "Failed", "Preempted") for e in ends)


def test_trace_text_round_trip():
    outcome, _ = run_scenario(ugv_scenario())
    text = outcome.trace.dumps()
    again = loads_trace(text)
    assert again.dumps() == text
    assert normalize(text) == outcome.trace.normalized()
    for line in outcome.trace.normalized().splitlines():
        assert set(json.loads(line)) == {"seq", "sim_time", "kind", "payload"}
    with pytest.raises(ValueError):
        loads_trace('{"seq": 0, "sim_time": 0, "kind": "gossip", "payload": {}}')
    with pytest.raises(ValueError):
        ScenarioTrace().append(0, "gossip", {})


@pytest.mark.parametrize("name", ["ugv", "uuv", "uuv_visibility"])
def test_replay_reproduces_trace(name):
    scenario = load_scenario(scenario_path(name))
    outcome, _ = run_scenario(scenario)
    domain, problem, kb = scenario.load()
    replayed = replay(outcome.trace, domain, problem, kb)
    assert replayed.normalized() == outcome.trace.normalized()


def test_replay_detects_divergence():
    scenario = ugv_scenario()
    outcome, _ = run_scenario(scenario)
    domain, problem, kb = scenario.load()
    # the recorded snapshot overrides the start position, so change a cost instead
    text = print_problem(problem)
    pricier = text.replace("(= (fd_battery_usage fd_AMCL_kinect) 2)", "(= (fd_battery_usage fd_AMCL_kinect) 9)")
    assert pricier != text
    with pytest.raises(ReplayDivergence):
        replay(outcome.trace, domain, parse_problem(pricier, domain), kb)


def test_run_rejects_unlinked_problem():
    scenario = ugv_scenario()
    domain, problem, kb = scenario.load()
    broken = problem.replace(init=frozenset(a for a in problem.init if a.predicate != "a_req_f"))
    world = scenario.build_world(problem, kb)
    from coadapt.sim import make_executor

    executor, queue = make_executor(world)
    with pytest.raises(ValueError, match="a_req_f"):
        run_mission(domain, broken, kb, executor, queue)


def test_limits_fail_the_mission():
    outcome, _ = run_scenario(ugv_scenario(), LoopConfig(node_limit=1))
    assert outcome.status is Phase.FAILED and outcome.reason == "resource-cap"
    outcome, _ = run_scenario(ugv_scenario(), LoopConfig(max_replans=0))
    assert outcome.status is Phase.FAILED and outcome.reason == "replan-limit"
    assert len(outcome.plans) == 1
