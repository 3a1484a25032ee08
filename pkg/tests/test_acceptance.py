"""Acceptance suite: one test per criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines alongside the pytest verdicts.
"""
from __future__ import annotations

import json
import random
import time
from itertools import combinations

from conftest import scenario_path
from inpipe.events import EventLog, read_ndjson
from inpipe.executive import ActionExecutor, Breadcrumb, Checkpoint
from inpipe.fusion import fuse
from inpipe.mission import GoalSet, goal_state, parse_mission, serialize_mission
from inpipe.planner import (
    BeliefModel,
    InPipe,
    PlanningState,
    maximize_goals,
    parse_solution,
    render_solution,
    solve,
    validate_plan,
)
from inpipe.replanner import RunStatus, run_mission
from inpipe.sewer import (
    KinematicLimits,
    Manhole,
    Port,
    parse_kis,
    serialize_kis,
    traversable,
)
from inpipe.simulator import GroundTruth, Scenario, SimConfig, Simulator, entry_robot_state
from oracles import bfs_park_distance, crossable_manholes, traversal_count
from randgen import random_graph, random_mission


def _ok(criterion: str, detail: str) -> None:
    print(f"[acceptance] {criterion}: PASS ({detail})")


def _entry_state(mission) -> PlanningState:
    return PlanningState(at=InPipe(mission.entry_pipe, mission.entry_towards))


def _tasks(mission):
    return {t.task_id: t for t in mission.tasks}


def test_criterion_1_fig4_golden_plan(world, fig4_mission, fig4_plan_text):
    t0 = time.perf_counter()
    plan = solve(
        BeliefModel(graph=world), _entry_state(fig4_mission),
        goal_state(fig4_mission), _tasks(fig4_mission),
    )
    elapsed = time.perf_counter() - t0
    rendered = render_solution(plan)
    assert rendered == fig4_plan_text, "plan is not byte-identical to the listing"
    assert len(plan) == 14
    assert elapsed < 1.0
    _ok("1 golden plan", f"14 lines byte-identical in {elapsed*1000:.0f} ms")


def test_criterion_2_plan_soundness_1000_instances():
    rng = random.Random(20260810)
    t0 = time.perf_counter()
    instances = 0
    plans = 0
    while instances < 1000:
        g = random_graph(rng, easy_geometry=instances % 2 == 0)
        try:
            mission = random_mission(rng, g)
        except ValueError:
            continue
        instances += 1
        belief = BeliefModel(
            graph=g,
            blocked_pipes=frozenset(
                p for p in sorted(g.pipes)
                if p != mission.entry_pipe and rng.random() < 0.1
            ),
        )
        state = _entry_state(mission)
        goals = goal_state(mission)
        tasks = _tasks(mission)
        plan = solve(belief, state, goals, tasks)
        if plan is None:
            continue
        plans += 1
        verdict = validate_plan(belief, state, plan, goals, tasks)
        assert verdict, f"instance {instances}: {verdict}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 60.0
    assert plans >= 200  # enough solvable instances to mean something
    _ok("2 plan soundness", f"{plans} plans from {instances} instances, "
        f"all valid, {elapsed:.1f} s")


def test_criterion_3_navigation_optimality_oracle():
    rng = random.Random(314159)
    graphs = 0
    solvable = 0
    unsolvable = 0
    while graphs < 50:
        g = random_graph(
            rng, n_manholes=rng.randint(3, 30), easy_geometry=graphs % 2 == 0
        )
        graphs += 1
        pipes = sorted(g.pipes)
        pid = rng.choice(pipes)
        facing = g.pipes[pid].endpoints[0][0] if g.pipes[pid].endpoints else None
        state = PlanningState(at=InPipe(pid, facing))
        blocked = frozenset(p for p in pipes if p != pid and rng.random() < 0.15)
        belief = BeliefModel(graph=g, blocked_pipes=blocked)
        recoverable = [m for m in sorted(g.manholes) if g.manholes[m].recoverable]
        if not recoverable:
            graphs -= 1
            continue
        exit_m = rng.choice(recoverable)
        goals = GoalSet(pending=set(), current_exit=exit_m)
        plan = solve(belief, state, goals, {})
        oracle = bfs_park_distance(belief, state.at, exit_m)
        if plan is None:
            assert oracle is None, "solver said unsolvable, oracle found a route"
            unsolvable += 1
        else:
            assert oracle is not None, "solver found a route, oracle says unreachable"
            assert traversal_count(plan) == oracle, (
                f"plan uses {traversal_count(plan)} moves, oracle shortest {oracle}"
            )
            solvable += 1
    _ok("3 navigation optimality",
        f"{graphs} graphs: {solvable} optimal routes, {unsolvable} agreed unsolvable")


def test_criterion_4_goal_maximization_oracle():
    rng = random.Random(271828)
    checked = 0
    while checked < 100:
        g = random_graph(rng, n_manholes=rng.randint(3, 10))
        try:
            mission = random_mission(rng, g, max_tasks=6)
        except ValueError:
            continue
        belief = BeliefModel(
            graph=g,
            blocked_pipes=frozenset(
                p for p in sorted(g.pipes)
                if p != mission.entry_pipe and rng.random() < 0.25
            ),
        )
        state = _entry_state(mission)
        goals = goal_state(mission)
        tasks = _tasks(mission)
        decision = maximize_goals(belief, state, goals, tasks)

        pending = sorted(goals.pending)
        oracle_best = None
        for size in range(len(pending), -1, -1):
            for subset in combinations(pending, size):
                sub = GoalSet(pending=set(subset), current_exit=goals.current_exit)
                if (
                    solve(belief, state, sub, tasks, exit_mode="exit") is not None
                    or solve(belief, state, sub, tasks, exit_mode="any-recoverable")
                    is not None
                ):
                    oracle_best = size
                    break
            if oracle_best is not None:
                break
        if decision is None:
            assert oracle_best is None
        else:
            assert len(decision.kept) == oracle_best, (
                f"kept {len(decision.kept)}, oracle {oracle_best}"
            )
        checked += 1
    _ok("4 goal maximization", f"{checked} instances match brute-force subsets")


def test_criterion_5_replanning_scenario(world, fig4_mission):
    # (a)-(d) on the immovable scenario
    log = EventLog()
    run = run_mission(
        fig4_mission, GroundTruth(graph=world),
        scenario=Scenario.from_json(
            json.loads(scenario_path("immovable_p5").read_text())
        ),
        events=log,
    )
    phases = [
        e.payload["state"]
        for e in log.events
        if e.kind == "RECOVERY_TRANSITION"
        and e.payload["state"].startswith("PHASE")
    ]
    assert phases == ["PHASE1_BACKUP_RETRY", "PHASE2_LIFT_HEAD", "PHASE3_PUSH"], (
        "phases out of order"
    )
    errors = [e for e in log.events if e.kind == "ERROR"]
    assert errors[0].payload["error_class"] == "BLOCKAGE"
    replans = [e for e in log.events if e.kind == "REPLAN"]
    assert len(replans) == 1

    # (c) the new plan avoids P5 whenever the oracle confirms an alternative
    belief_after = BeliefModel(graph=world, blocked_pipes=frozenset({"P5"}))
    failure_state = PlanningState(at=InPipe("P5", facing="M6"))
    reachable = crossable_manholes(belief_after, failure_state.at)
    assert "M6" in reachable, "fixture should offer an alternative into M6"
    plan2 = run.history[1][0]
    p5_uses = [
        i for i, a in enumerate(plan2)
        if a.name == "DRIVE_PIPE_TO_MANHOLE" and a.args[0] == "P5"
    ]
    assert p5_uses == [0], "replanned route must only use P5 to escape it"

    # (d) retention is maximal: the oracle keeps both tasks here
    goals_at_failure = GoalSet(pending={"t1", "t2"}, current_exit="M9")
    decision = maximize_goals(
        belief_after, failure_state, goals_at_failure, _tasks(fig4_mission)
    )
    assert decision is not None and decision.kept == {"t1", "t2"}
    assert run.goals.achieved == {"t1", "t2"} and not run.goals.dropped

    # each obstacle kind leaves its distinct terminal signature
    signatures = {}
    for kind in ("light_waste_p5", "pushable_p5", "stuck_risk_p5", "immovable_p5"):
        slog = EventLog()
        srun = run_mission(
            fig4_mission, GroundTruth(graph=world),
            scenario=Scenario.from_json(json.loads(scenario_path(kind).read_text())),
            events=slog,
        )
        states = [e.payload["state"] for e in slog.events
                  if e.kind == "RECOVERY_TRANSITION"]
        n_replans = sum(1 for e in slog.events if e.kind == "REPLAN")
        signatures[kind] = (srun.status, n_replans, tuple(states))
    assert signatures["light_waste_p5"][0] is RunStatus.DONE_COMPLETED
    assert signatures["light_waste_p5"][1] == 0
    assert signatures["light_waste_p5"][2] == (
        "PHASE1_BACKUP_RETRY", "PHASE2_LIFT_HEAD", "RESUMED",
    )
    assert signatures["pushable_p5"][0] is RunStatus.DONE_COMPLETED
    assert signatures["pushable_p5"][1] == 0
    assert signatures["pushable_p5"][2] == (
        "PHASE1_BACKUP_RETRY", "PHASE2_LIFT_HEAD", "PHASE3_PUSH", "RESUMED",
    )
    assert signatures["stuck_risk_p5"][0] is RunStatus.DONE_SAFETY
    assert "RETREAT" in signatures["stuck_risk_p5"][2]
    assert signatures["stuck_risk_p5"][2][-1] == "RECOVERED_AT_SAFETY"
    assert signatures["immovable_p5"][1] == 1
    assert len(set(signatures.values())) == 4
    _ok("5 replanning scenario",
        "phase ladder exact, one replan, route avoids P5, retention maximal, "
        "four distinct signatures")


def test_criterion_6_malfunction_differential(world, fig4_mission):
    baseline = run_mission(fig4_mission, GroundTruth(graph=world), events=EventLog())
    assert baseline.status is RunStatus.DONE_COMPLETED
    base_goals = baseline.goals.snapshot()
    for k in range(1, 15):
        scen = Scenario.from_json({"malfunctions": [{"at_action": k}]})
        run = run_mission(
            fig4_mission, GroundTruth(graph=world), scenario=scen, events=EventLog()
        )
        assert run.status is RunStatus.DONE_COMPLETED, f"action {k}"
        assert run.goals.snapshot() == base_goals, f"action {k}"
    _ok("6 malfunction differential", "identical goal sets across all 14 actions")


def test_criterion_7_replay_determinism(world, fig4_mission):
    doc = json.loads(scenario_path("immovable_p5").read_text())
    doc["malfunctions"] = [{"at_action": 2}]
    texts = []
    for _ in range(2):
        log = EventLog()
        run_mission(
            fig4_mission, GroundTruth(graph=world),
            scenario=Scenario.from_json(doc), events=log,
        )
        texts.append(log.to_ndjson())
    assert texts[0] == texts[1]
    assert read_ndjson(texts[0])  # parses back
    _ok("7 replay determinism", f"{len(texts[0].splitlines())} events byte-identical")


def test_criterion_8_format_roundtrips(world, fig4_mission, fig4_plan_text):
    rng = random.Random(8888)

    # KIS-lite
    for _ in range(500):
        g = random_graph(rng)
        assert parse_kis(serialize_kis(g)) == g

    # mission JSON
    done = 0
    while done < 500:
        g = random_graph(rng)
        try:
            m = random_mission(rng, g)
        except ValueError:
            continue
        done += 1
        assert parse_mission(serialize_mission(m), g) == m

    # solution files: solver output plus synthetic shuffles of golden lines
    done = 0
    while done < 500:
        g = random_graph(rng, easy_geometry=True)
        try:
            m = random_mission(rng, g)
        except ValueError:
            continue
        plan = solve(
            BeliefModel(graph=g), _entry_state(m), goal_state(m), _tasks(m)
        )
        if plan is None:
            continue
        done += 1
        text = render_solution(plan)
        assert render_solution(parse_solution(text)) == text

    # checkpoints harvested from executors mid-run
    belief = BeliefModel(graph=world)
    tasks = _tasks(fig4_mission)
    collected = 0
    while collected < 500:
        goals = goal_state(fig4_mission)
        grounded = fuse(parse_solution(fig4_plan_text), belief, tasks_by_id=tasks)
        sim = Simulator(
            GroundTruth(graph=world),
            entry_robot_state(world, "P12", "M2", 7200),
            SimConfig(),
        )
        ex = ActionExecutor(
            sim, belief, goals, tasks, grounded, EventLog(),
            trail=[Breadcrumb("P12", "M1", None)],
        )
        while ex.tick() is None:
            pass
        for cp in ex.checkpoints:
            text = cp.to_json()
            again = Checkpoint.from_json(text)
            assert again.doc == cp.doc
            assert again.to_json() == text
            collected += 1
    _ok("8 format round-trips",
        "500+ random instances each for KIS, mission, solution, checkpoint")


def test_criterion_9_kinematic_gates():
    limits = KinematicLimits()
    step_probe = Manhole(
        "M1", 100, (Port(1, "P1", 0.0, 0.0), Port(2, "P2", 180.0, 30.0))
    )
    assert traversable(step_probe, 1, 2, limits), "30 cm step must pass"
    step_over = Manhole(
        "M1", 100, (Port(1, "P1", 0.0, 0.0), Port(2, "P2", 180.0, 30.0001))
    )
    verdict = traversable(step_over, 1, 2, limits)
    assert not verdict and "step" in verdict.reason

    turn_probe = Manhole("M1", 100, (Port(1, "P1", 0.0), Port(2, "P2", 90.0)))
    assert traversable(turn_probe, 1, 2, limits), "90 degree turn must pass"
    turn_over = Manhole("M1", 100, (Port(1, "P1", 0.0), Port(2, "P2", 89.9999)))
    verdict = traversable(turn_over, 1, 2, limits)
    assert not verdict and "turn" in verdict.reason
    _ok("9 kinematic gates", "90 deg and 30 cm accepted exactly, beyond rejected")
