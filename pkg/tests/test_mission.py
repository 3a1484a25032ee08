from __future__ import annotations

import json
import random

import pytest

from inpipe.mission import (
    GoalSet,
    MissionError,
    TaskKind,
    goal_state,
    parse_mission,
    serialize_mission,
)
from randgen import random_graph, random_mission


def test_fig4_mission_parses(fig4_mission):
    assert fig4_mission.entry_pipe == "P12"
    assert fig4_mission.entry_towards == "M2"
    assert fig4_mission.exit == "M9"
    kinds = [t.kind for t in fig4_mission.tasks]
    assert kinds == [TaskKind.WATER_SAMPLE, TaskKind.INSPECT]
    assert fig4_mission.time_budget_s == 7200


def test_zero_task_transit_mission_is_valid(world):
    doc = {"entry": {"pipe": "P12", "towards": "M2"}, "exit": "M2", "tasks": []}
    m = parse_mission(doc, world)
    assert m.tasks == ()


def test_unknown_target_rejected(world):
    doc = {
        "entry": {"pipe": "P12", "towards": "M2"},
        "exit": "M9",
        "tasks": [{"id": "t1", "kind": "INSPECT", "target": "P77"}],
    }
    with pytest.raises(MissionError, match="P77"):
        parse_mission(doc, world)


def test_non_recoverable_exit_rejected(world):
    doc = {"entry": {"pipe": "P12", "towards": "M2"}, "exit": "M7", "tasks": []}
    with pytest.raises(MissionError, match="not recoverable"):
        parse_mission(doc, world)


def test_entry_pipe_heading_must_match(world):
    doc = {"entry": {"pipe": "P12", "towards": "M9"}, "exit": "M9", "tasks": []}
    with pytest.raises(MissionError, match="does not end at"):
        parse_mission(doc, world)


def test_inspect_needs_pipe_target(world):
    doc = {
        "entry": {"pipe": "P12", "towards": "M2"},
        "exit": "M9",
        "tasks": [{"id": "t1", "kind": "INSPECT", "target": "M3"}],
    }
    with pytest.raises(MissionError, match="pipe target"):
        parse_mission(doc, world)


def test_goto_accepts_manholes_and_pipes(world):
    doc = {
        "entry": {"pipe": "P12", "towards": "M2"},
        "exit": "M9",
        "tasks": [
            {"id": "t1", "kind": "GOTO", "target": "M3"},
            {"id": "t2", "kind": "GOTO", "target": "P4"},
        ],
    }
    m = parse_mission(doc, world)
    assert len(m.tasks) == 2


def test_mission_roundtrip(world, fig4_mission):
    again = parse_mission(serialize_mission(fig4_mission), world)
    assert again == fig4_mission


def test_mission_roundtrip_random():
    rng = random.Random(31)
    done = 0
    while done < 40:
        g = random_graph(rng)
        try:
            m = random_mission(rng, g)
        except ValueError:
            continue
        done += 1
        assert parse_mission(serialize_mission(m), g) == m


def test_goal_state_initial(fig4_mission):
    gs = goal_state(fig4_mission)
    assert gs.pending == {"t1", "t2"}
    assert not gs.achieved and not gs.dropped
    assert gs.current_exit == "M9"


def test_goal_state_empty_tasks(world):
    m = parse_mission(
        {"entry": {"pipe": "P12", "towards": "M2"}, "exit": "M9", "tasks": []}, world
    )
    gs = goal_state(m)
    assert not gs.pending and not gs.achieved and not gs.dropped


def test_goalset_partition_invariant_random_mutations():
    rng = random.Random(9)
    for _ in range(200):
        ids = [f"t{i}" for i in range(rng.randint(0, 8))]
        gs = GoalSet(pending=set(ids), current_exit="M1")
        universe = set(ids)
        for _ in range(rng.randint(0, 12)):
            if not gs.pending:
                break
            tid = rng.choice(sorted(gs.pending))
            if rng.random() < 0.5:
                gs.mark_achieved(tid)
            else:
                gs.drop(tid, "blocked:P1")
            assert gs.pending | gs.achieved | set(gs.dropped) == universe
            assert not gs.pending & gs.achieved
            assert not gs.pending & set(gs.dropped)
            assert not gs.achieved & set(gs.dropped)


def test_goalset_snapshot_roundtrip():
    gs = GoalSet(pending={"t1"}, achieved={"t2"}, dropped={"t3": "blocked:P5"},
                 current_exit="M9")
    again = GoalSet.from_snapshot(json.loads(json.dumps(gs.snapshot())))
    assert again == gs


def test_marking_non_pending_task_raises():
    gs = GoalSet(pending={"t1"}, current_exit="M1")
    gs.mark_achieved("t1")
    gs.mark_achieved("t1")  # idempotent once achieved
    with pytest.raises(ValueError):
        gs.drop("t1", "blocked:P1")
