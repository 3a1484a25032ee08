"""Watch the robot hit an immovable obstacle mid-pipe and replan around it.

An obstacle materializes in P5 the moment the robot enters it. The three
recovery phases fail in order (back up and retry, lift the head, push),
the pipe is disconnected in the belief model, and a fresh plan reaches both
inspection goals through the M4/M5 detour.
"""
from inpipe import fixture_path
from inpipe.events import EventLog
from inpipe.mission import parse_mission
from inpipe.replanner import run_mission
from inpipe.sewer import parse_kis
from inpipe.simulator import GroundTruth, Scenario

world = parse_kis(fixture_path("ais_test_env.kis").read_text())
mission = parse_mission(fixture_path("fig4_mission.json").read_text(), world)
scenario = Scenario.from_json(
    fixture_path("scenarios/immovable_p5.json").read_text()
)

log = EventLog()
run = run_mission(mission, GroundTruth(graph=world), scenario=scenario, events=log)

for e in log.events:
    if e.kind in ("ERROR", "RECOVERY_TRANSITION", "REPLAN", "TERMINAL"):
        print(f"t={e.t_sim_s:7.1f}s  {e.kind:20s} {e.payload}")

print()
print("status:", run.status.value)
print("plans used:", len(run.history))
print("second plan:")
from inpipe.planner import render_solution

print(render_solution(run.history[1][0]))
