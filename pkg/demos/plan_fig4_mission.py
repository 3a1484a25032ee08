"""Plan the packaged reference mission and check the result.

The robot enters through P12 heading for M2, takes a water sample in the
dead-end stub P6, inspects P4, and surfaces at M9. The route planner turns
that into 14 symbolic actions; the validator replays them against the map.
"""
from inpipe import fixture_path
from inpipe.mission import goal_state, parse_mission
from inpipe.planner import (
    BeliefModel,
    InPipe,
    PlanningState,
    render_solution,
    solve,
    validate_plan,
)
from inpipe.sewer import parse_kis

world = parse_kis(fixture_path("ais_test_env.kis").read_text())
mission = parse_mission(fixture_path("fig4_mission.json").read_text(), world)
tasks = {t.task_id: t for t in mission.tasks}

belief = BeliefModel(graph=world)
start = PlanningState(at=InPipe(mission.entry_pipe, mission.entry_towards))
goals = goal_state(mission)

plan = solve(belief, start, goals, tasks)
print(f"plan with {len(plan)} actions:\n")
print(render_solution(plan))

verdict = validate_plan(belief, start, plan, goals, tasks)
print("validator verdict:", "OK" if verdict else verdict)
