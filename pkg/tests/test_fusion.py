from __future__ import annotations

import random

import pytest

from inpipe.fusion import ActionKind, FusionError, GroundedAction, fuse
from inpipe.mission import goal_state
from inpipe.planner import (
    BeliefModel,
    InPipe,
    PlanningState,
    parse_solution,
    render_solution,
    solve,
)
from inpipe.sewer import turn_angle
from randgen import random_graph, random_mission


def test_drive_parameters_come_from_the_map(world):
    belief = BeliefModel(graph=world)
    plan = parse_solution("DRIVE_PIPE_TO_MANHOLE P12 M2\n")
    [action] = fuse(plan, belief)
    assert action.kind is ActionKind.DRIVE_TO_MANHOLE
    assert action.distance_cm == 500
    assert action.pipe_diameter_cm == 60
    assert action.speed_cm_s == 30
    assert action.direction == "M2"


def test_empty_plan_fuses_empty():
    pass  # arity covered below with a real graph


def test_empty_plan(world):
    assert fuse(parse_solution(""), BeliefModel(graph=world)) == []


def test_cross_parameters_recomputed(world):
    belief = BeliefModel(graph=world)
    plan = parse_solution("DRIVE_MANHOLE_TYPE_4_FROM_3_TO_4 M6 P10 P4 P5 P6\n")
    [action] = fuse(plan, belief)
    assert action.kind is ActionKind.CROSS_MANHOLE
    assert action.from_port == 3 and action.to_port == 4
    assert action.turn_deg == pytest.approx(turn_angle(world.manholes["M6"], 3, 4))
    assert action.step_cm == pytest.approx(15.0)
    assert action.manhole_type == "TYPE_4"


def test_fuse_preserves_count_and_order(world, fig4_mission, fig4_plan_text):
    belief = BeliefModel(graph=world)
    plan = parse_solution(fig4_plan_text)
    tasks = {t.task_id: t for t in fig4_mission.tasks}
    grounded = fuse(plan, belief, tasks_by_id=tasks)
    assert len(grounded) == len(plan)
    kinds = [g.kind.value for g in grounded]
    assert kinds[0] == "DRIVE_TO_MANHOLE"
    assert kinds[6] == "TAKE_WATER_SAMPLE"
    assert grounded[6].task_id == "t1"
    assert kinds[10] == "INSPECT_PIPE"
    assert grounded[10].task_id == "t2"


def test_fuse_of_rendered_plan_equals_fuse_of_original(world, fig4_mission):
    belief = BeliefModel(graph=world)
    state = PlanningState(at=InPipe(fig4_mission.entry_pipe, fig4_mission.entry_towards))
    tasks = {t.task_id: t for t in fig4_mission.tasks}
    plan = solve(belief, state, goal_state(fig4_mission), tasks)
    again = parse_solution(render_solution(plan))
    assert fuse(plan, belief, tasks_by_id=tasks) == fuse(again, belief, tasks_by_id=tasks)


def test_unknown_ids_rejected(world):
    belief = BeliefModel(graph=world)
    with pytest.raises(FusionError, match="unknown pipe"):
        fuse(parse_solution("DRIVE_PIPE_TO_MANHOLE P77 M2\n"), belief)
    with pytest.raises(FusionError, match="does not end"):
        fuse(parse_solution("DRIVE_PIPE_TO_MANHOLE P12 M9\n"), belief)


def test_inconsistent_cross_rejected(world):
    belief = BeliefModel(graph=world)
    # M6 is TYPE_4; claiming TYPE_3 must fail even with matching arity
    with pytest.raises(FusionError, match="inconsistent"):
        fuse(parse_solution("DRIVE_MANHOLE_TYPE_3_FROM_1_TO_2 M6 P10 P4 P5\n"), belief)
    with pytest.raises(FusionError, match="ports"):
        fuse(parse_solution("DRIVE_MANHOLE_TYPE_4_FROM_3_TO_4 M6 P4 P10 P5 P6\n"), belief)


def test_speed_never_exceeds_limit_random():
    rng = random.Random(15)
    done = 0
    while done < 20:
        g = random_graph(rng, easy_geometry=True)
        try:
            mission = random_mission(rng, g)
        except ValueError:
            continue
        belief = BeliefModel(graph=g)
        state = PlanningState(at=InPipe(mission.entry_pipe, mission.entry_towards))
        tasks = {t.task_id: t for t in mission.tasks}
        plan = solve(belief, state, goal_state(mission), tasks)
        if plan is None:
            continue
        done += 1
        for a in fuse(plan, belief, tasks_by_id=tasks):
            if a.kind is ActionKind.DRIVE_TO_MANHOLE:
                assert a.speed_cm_s <= belief.limits.max_speed_cm_s
                assert a.distance_cm == belief.graph.pipes[a.pipe].length_cm


def test_grounded_action_json_roundtrip(world):
    belief = BeliefModel(graph=world)
    plan = parse_solution(
        "DRIVE_PIPE_TO_MANHOLE P12 M2\n"
        "DRIVE_MANHOLE_TYPE_2_FROM_1_TO_2 M2 P12 P1\n"
        "TAKE_WATER_SAMPLE P1\n"
    )
    for a in fuse(plan, belief):
        assert GroundedAction.from_json(a.to_json()) == a
