from __future__ import annotations

import random

from inpipe.mission import GoalSet, goal_state
from inpipe.planner import (
    BeliefModel,
    InPipe,
    PlanningState,
    SymbolicPlan,
    parse_solution,
    solve,
    validate_plan,
)
from randgen import random_graph, random_mission


def _setup(world, fig4_mission):
    return (
        BeliefModel(graph=world),
        PlanningState(at=InPipe(fig4_mission.entry_pipe, fig4_mission.entry_towards)),
        goal_state(fig4_mission),
        {t.task_id: t for t in fig4_mission.tasks},
    )


def test_fig4_plan_validates(world, fig4_mission, fig4_plan_text):
    belief, state, goals, tasks = _setup(world, fig4_mission)
    plan = parse_solution(fig4_plan_text)
    assert validate_plan(belief, state, plan, goals, tasks)


def test_swapped_actions_violate_at_the_swap(world, fig4_mission, fig4_plan_text):
    belief, state, goals, tasks = _setup(world, fig4_mission)
    actions = list(parse_solution(fig4_plan_text).actions)
    actions[4], actions[5] = actions[5], actions[4]
    verdict = validate_plan(belief, state, SymbolicPlan(tuple(actions)), goals, tasks)
    assert not verdict
    assert verdict.step == 5
    assert "not at" in verdict.reason


def test_truncated_plan_fails_goal_check(world, fig4_mission, fig4_plan_text):
    belief, state, goals, tasks = _setup(world, fig4_mission)
    actions = parse_solution(fig4_plan_text).actions[:-1]
    verdict = validate_plan(belief, state, SymbolicPlan(actions), goals, tasks)
    assert not verdict
    assert verdict.step == 0
    assert "exit" in verdict.reason


def test_missing_task_detected(world, fig4_mission, fig4_plan_text):
    belief, state, goals, tasks = _setup(world, fig4_mission)
    actions = tuple(
        a for a in parse_solution(fig4_plan_text).actions
        if a.name != "TAKE_WATER_SAMPLE"
    )
    verdict = validate_plan(belief, state, SymbolicPlan(actions), goals, tasks)
    assert not verdict
    assert "water sample" in verdict.reason


def test_wrong_cross_name_detected(world, fig4_mission, fig4_plan_text):
    belief, state, goals, tasks = _setup(world, fig4_mission)
    text = fig4_plan_text.replace(
        "DRIVE_MANHOLE_TYPE_2_FROM_1_TO_2 M2", "DRIVE_MANHOLE_TYPE_3_FROM_1_TO_2 M2"
    ).replace("M2 P12 P1", "M2 P12 P1 P1")  # arity fix to pass parsing
    plan = parse_solution(text)
    verdict = validate_plan(belief, state, plan, goals, tasks)
    assert not verdict and verdict.step == 2


def test_untraversable_cross_detected(world):
    # M3 3->2 is a 135 degree turn
    belief = BeliefModel(graph=world)
    state = PlanningState(at=InPipe("P1", "M3"))
    plan = parse_solution(
        "DRIVE_PIPE_TO_MANHOLE P1 M3\nDRIVE_MANHOLE_TYPE_3_TYPE_B_FROM_3_TO_2 M3 P5 P2 P1\n"
    )
    verdict = validate_plan(belief, state, plan, GoalSet(pending=set(), current_exit=""), {})
    assert not verdict
    assert "not traversable" in verdict.reason


def test_drive_into_blocked_pipe_rejected(world):
    belief = BeliefModel(graph=world, blocked_pipes=frozenset({"P1"}))
    state = PlanningState(at=InPipe("P12", "M2"))
    plan = parse_solution(
        "DRIVE_PIPE_TO_MANHOLE P12 M2\n"
        "DRIVE_MANHOLE_TYPE_2_FROM_1_TO_2 M2 P12 P1\n"
    )
    verdict = validate_plan(belief, state, plan, GoalSet(pending=set(), current_exit=""), {})
    assert not verdict and "blocked" in verdict.reason


def test_escape_drive_through_blocked_pipe_allowed(world):
    belief = BeliefModel(graph=world, blocked_pipes=frozenset({"P5"}))
    state = PlanningState(at=InPipe("P5", facing="M6"))
    plan = parse_solution("DRIVE_PIPE_TO_MANHOLE P5 M3\n")
    assert validate_plan(belief, state, plan, GoalSet(pending=set(), current_exit=""), {})
    # but not towards the obstacle
    wrong = parse_solution("DRIVE_PIPE_TO_MANHOLE P5 M6\n")
    verdict = validate_plan(belief, state, wrong, GoalSet(pending=set(), current_exit=""), {})
    assert not verdict


def test_all_solver_plans_validate_randomized():
    rng = random.Random(99)
    produced = 0
    trials = 0
    while produced < 200 and trials < 2000:
        trials += 1
        g = random_graph(rng, easy_geometry=rng.random() < 0.5)
        try:
            mission = random_mission(rng, g)
        except ValueError:
            continue
        belief = BeliefModel(
            graph=g,
            blocked_pipes=frozenset(
                p for p in sorted(g.pipes)
                if p != mission.entry_pipe and rng.random() < 0.1
            ),
        )
        state = PlanningState(at=InPipe(mission.entry_pipe, mission.entry_towards))
        goals = goal_state(mission)
        tasks = {t.task_id: t for t in mission.tasks}
        plan = solve(belief, state, goals, tasks)
        if plan is None:
            continue
        produced += 1
        assert validate_plan(belief, state, plan, goals, tasks)
    assert produced >= 200
