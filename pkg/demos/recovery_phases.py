"""The four obstacle kinds and how far up the recovery ladder each one goes.

Light waste disappears when the robot lifts its head (phase 2). A pushable
obstacle yields to the phase-3 shove. A stuck-risk obstacle turns the push
into a danger call and the robot backs out to the nearest recoverable
manhole. An immovable one exhausts all three phases and forces a replan.
"""
from inpipe import fixture_path
from inpipe.events import EventLog
from inpipe.mission import parse_mission
from inpipe.replanner import run_mission
from inpipe.sewer import parse_kis
from inpipe.simulator import GroundTruth, Scenario

world = parse_kis(fixture_path("ais_test_env.kis").read_text())
mission = parse_mission(fixture_path("fig4_mission.json").read_text(), world)

for name in ("light_waste_p5", "pushable_p5", "stuck_risk_p5", "immovable_p5"):
    scenario = Scenario.from_json(
        fixture_path(f"scenarios/{name}.json").read_text()
    )
    log = EventLog()
    run = run_mission(mission, GroundTruth(graph=world), scenario=scenario, events=log)
    phases = [
        e.payload["state"] for e in log.events if e.kind == "RECOVERY_TRANSITION"
    ]
    replans = sum(1 for e in log.events if e.kind == "REPLAN")
    print(f"{name:16s} -> {run.status.value:15s} replans={replans}")
    print(f"{'':16s}    recovery: {' -> '.join(phases) if phases else '(none)'}")
    print(f"{'':16s}    achieved={sorted(run.goals.achieved)} "
          f"dropped={dict(sorted(run.goals.dropped.items()))}")
    print()
