import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coadapt.kb import (
    ComponentStatus,
    KBError,
    ObjectiveStatus,
    add_objective,
    analyze,
    contextual_availability,
    dump_kb,
    load_kb,
    record_objective_status,
    retire_objective,
    set_grounding,
    update_measurements,
)
from oracles import SCENARIOS, analyze_raw

UGV_KB = (SCENARIOS / "ugv" / "kb.json").read_text()
ALL_UGV = {"fd_AMCL_lidar", "fd_AMCL_kinect", "fd_MRPT_lidar", "fd_MRPT_kinect", "fd_aruco", "fd_aruco_with_light"}


def ugv_kb():
    return load_kb(UGV_KB)


def minimal_doc(**designs):
    return {
        "functions": [{"id": "f1"}, {"id": "f2"}],
        "components": [{"id": "c1"}],
        "attribute_types": [{"id": "battery_level", "kind": "Quality"}, {"id": "light", "kind": "Environment"}],
        "function_designs": list(designs.values()),
    }


def test_load_table_one():
    kb = ugv_kb()
    assert set(kb.designs) == ALL_UGV
    assert kb.designs["fd_AMCL_kinect"].qa_expected["battery_usage"] == 2
    assert kb.designs["fd_AMCL_kinect"].required_components == {"c_kinect"}
    assert kb.generation == 0
    assert not kb.objectives and not kb.groundings and not kb.measurements


def test_load_empty_designs():
    kb = load_kb(json.dumps(minimal_doc()))
    assert kb.designs == {}


@pytest.mark.parametrize(
    "design, needle",
    [
        ({"id": "d", "solves": "f1", "required_components": ["c_ghost"]}, "c_ghost"),
        ({"id": "d", "solves": "f_ghost"}, "f_ghost"),
        ({"id": "d", "solves": "f1", "qa_expected": {"nope": 1}}, "nope"),
        ({"id": "d", "solves": "f1", "surprise": 1}, "surprise"),
        ({"id": "d", "solves": "f1", "ea_capabilities": {"battery_level": 1}}, "battery_level"),
    ],
)
def test_load_rejects_bad_design(design, needle):
    with pytest.raises(KBError) as info:
        load_kb(json.dumps(minimal_doc(d=design)))
    assert needle in str(info.value)
    assert "function_designs[0]" in str(info.value)


def test_load_rejects_duplicate_and_missing_section():
    doc = minimal_doc(a={"id": "d", "solves": "f1"}, b={"id": "d", "solves": "f2"})
    with pytest.raises(KBError, match="'d'"):
        load_kb(json.dumps(doc))
    doc = minimal_doc()
    del doc["components"]
    with pytest.raises(KBError, match="components"):
        load_kb(json.dumps(doc))
    with pytest.raises(KBError, match="line 1"):
        load_kb("{oops")


def test_dump_round_trip():
    kb = ugv_kb()
    again = load_kb(dump_kb(kb))
    assert again.designs == kb.designs
    assert dump_kb(again) == dump_kb(kb)


def test_update_measurements():
    kb = ugv_kb()
    update_measurements(kb, qa={"battery_level": 100})
    assert kb.measurements["battery_level"] == 100
    assert kb.generation == 1
    update_measurements(kb)
    assert kb.generation == 2
    update_measurements(kb, qa={"battery_level": 90}, ea={"safety": 0.5}, component_status={"c_kinect": "Failed"})
    assert kb.generation == 3
    assert kb.components["c_kinect"].status is ComponentStatus.FAILED


@pytest.mark.parametrize(
    "kwargs",
    [
        {"qa": {"battery_level": 5, "bogus": 1}},
        {"ea": {"battery_level": 5}},  # a QA id in the EA slot
        {"qa": {"battery_level": 5}, "component_status": {"c_ghost": "Failed"}},
        {"qa": {"battery_level": 5}, "component_status": {"c_kinect": "Broken"}},
    ],
)
def test_update_is_atomic(kwargs):
    kb = ugv_kb()
    before = (dict(kb.measurements), {c: s.status for c, s in kb.components.items()}, kb.generation)
    with pytest.raises(KBError):
        update_measurements(kb, **kwargs)
    assert before == (dict(kb.measurements), {c: s.status for c, s in kb.components.items()}, kb.generation)


def test_analyze_examples():
    kb = ugv_kb()
    assert analyze(kb).available_designs == ALL_UGV
    update_measurements(kb, component_status={"c_kinect": "Failed"})
    assert analyze(kb).available_designs == {"fd_AMCL_lidar", "fd_MRPT_lidar", "fd_aruco", "fd_aruco_with_light"}


def test_analyze_flags_objective_on_requirement():
    doc = minimal_doc(d={"id": "d", "solves": "f1", "qa_requirements": [
        {"attribute": "battery_level", "comparator": ">=", "threshold": 50}]})
    kb = load_kb(json.dumps(doc))
    add_objective(kb, "o_f1", "f1")
    set_grounding(kb, "o_f1", "d")
    # nothing measured yet: the requirement does not block
    assert analyze(kb).available_designs == {"d"}
    update_measurements(kb, qa={"battery_level": 40})
    result = analyze(kb)
    assert result.available_designs == frozenset()
    assert result.objectives_in_error == {"o_f1"}
    record_objective_status(kb, result)
    assert kb.objectives["o_f1"].status is ObjectiveStatus.IN_ERROR


def test_groundings():
    kb = ugv_kb()
    add_objective(kb, "o_localize", "f_localization")
    set_grounding(kb, "o_localize", "fd_AMCL_kinect")
    active = [g for g in kb.groundings if g.active]
    assert [(g.objective, g.design) for g in active] == [("o_localize", "fd_AMCL_kinect")]
    set_grounding(kb, "o_localize", "fd_AMCL_lidar")
    assert [g.design for g in kb.groundings if g.active] == ["fd_AMCL_lidar"]
    assert [g.design for g in kb.groundings if not g.active] == ["fd_AMCL_kinect"]
    assert kb.objectives["o_localize"].status is ObjectiveStatus.UNKNOWN
    with pytest.raises(KBError):
        set_grounding(kb, "o_localize", "fd_ghost")
    with pytest.raises(KBError):
        set_grounding(kb, "o_ghost", "fd_AMCL_lidar")
    retire_objective(kb, "o_localize")
    assert kb.groundings == []


def test_grounding_function_mismatch():
    doc = minimal_doc(a={"id": "d1", "solves": "f1"}, b={"id": "d2", "solves": "f2"})
    kb = load_kb(json.dumps(doc))
    add_objective(kb, "o", "f1")
    with pytest.raises(KBError, match="d2"):
        set_grounding(kb, "o", "d2")


def test_contextual_availability_examples():
    kb = ugv_kb()
    assert contextual_availability(kb, {"safety": 0.8}) == {"fd_AMCL_kinect", "fd_MRPT_kinect"}
    assert contextual_availability(kb, {}) == analyze(kb).available_designs
    assert contextual_availability(kb, {"dark": 1}) == {"fd_aruco_with_light"}
    update_measurements(kb, component_status={"c_kinect": "Failed"})
    assert contextual_availability(kb, {"safety": 0.8}) == frozenset()
    with pytest.raises(KBError):
        contextual_availability(kb, {"battery_level": 1})


@given(st.dictionaries(st.sampled_from(["safety", "dark"]), st.floats(-1, 2, allow_nan=False)),
       st.sampled_from(["safety", "dark"]), st.floats(0, 1))
def test_contextual_restriction_is_monotone(req, key, bump):
    kb = ugv_kb()
    base = contextual_availability(kb, req)
    assert base <= analyze(kb).available_designs
    raised = dict(req)
    raised[key] = raised.get(key, 0.0) + bump
    assert contextual_availability(kb, raised) <= base
    assert contextual_availability(kb, req) == base


@given(st.lists(st.tuples(st.sampled_from(["o1", "o2"]), st.sampled_from(["d0", "d1", "d2"])), max_size=12))
def test_at_most_one_active_grounding(calls):
    doc = minimal_doc(**{f"d{i}": {"id": f"d{i}", "solves": "f1"} for i in range(3)})
    kb = load_kb(json.dumps(doc))
    add_objective(kb, "o1", "f1")
    add_objective(kb, "o2", "f1")
    for obj, design in calls:
        set_grounding(kb, obj, design)
        for o in ("o1", "o2"):
            assert sum(1 for g in kb.groundings if g.active and g.objective == o) <= 1


# -- brute-force oracle over random KBs --------------------------------------

_ATTRS = ["q0", "q1", "q2", "q3"]


@st.composite
def random_kb(draw):
    n_comp = draw(st.integers(1, 4))
    comps = [f"c{i}" for i in range(n_comp)]
    designs = []
    for i in range(draw(st.integers(0, 8))):
        reqs = draw(st.lists(st.fixed_dictionaries({
            "attribute": st.sampled_from(_ATTRS),
            "comparator": st.sampled_from([">=", ">", "<=", "<"]),
            "threshold": st.integers(0, 10),
        }), max_size=3))
        designs.append({"id": f"d{i}", "solves": "f", "required_components":
                        draw(st.lists(st.sampled_from(comps), unique=True, max_size=2)), "qa_requirements": reqs})
    doc = {"functions": [{"id": "f"}], "components": [{"id": c} for c in comps],
           "attribute_types": [{"id": a, "kind": "Quality"} for a in _ATTRS], "function_designs": designs}
    measured = draw(st.dictionaries(st.sampled_from(_ATTRS), st.integers(0, 10)))
    status = draw(st.dictionaries(st.sampled_from(comps), st.sampled_from(["Available", "Failed"])))
    grounded = draw(st.lists(st.sampled_from([d["id"] for d in designs]), max_size=3)) if designs else []
    return doc, measured, status, {f"o{i}": d for i, d in enumerate(grounded)}


@settings(max_examples=200)
@given(random_kb())
def test_analyze_matches_brute_force(case):
    doc, measured, status, groundings = case
    kb = load_kb(json.dumps(doc))
    update_measurements(kb, qa=measured, component_status=status)
    for obj, design in groundings.items():
        add_objective(kb, obj, "f")
        set_grounding(kb, obj, design)
    result = analyze(kb)
    available, errors = analyze_raw(doc, measured, status, groundings)
    assert result.available_designs == available
    assert result.objectives_in_error == errors
    assert analyze(kb) == result
