"""Operator missions: entry, exit, and the three task kinds.

A mission is what the operator authors on the map console: where the robot
is lowered in, which pipes to inspect or sample (or points to visit), and
where it should surface again.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .sewer import SewerGraph

DEFAULT_TIME_BUDGET_S = 7200.0


class MissionError(ValueError):
    """Mission document rejected: schema violation or unknown target."""


class TaskKind(Enum):
    GOTO = "GOTO"
    INSPECT = "INSPECT"
    WATER_SAMPLE = "WATER_SAMPLE"


@dataclass(frozen=True)
class Task:
    task_id: str
    kind: TaskKind
    target: str  # pipe id; GOTO also accepts a manhole id


@dataclass(frozen=True)
class Mission:
    entry_pipe: str
    entry_towards: str  # manhole the robot initially faces
    exit: str
    tasks: tuple[Task, ...] = ()
    time_budget_s: float = DEFAULT_TIME_BUDGET_S


@dataclass
class GoalSet:
    """Live bookkeeping over a mission's tasks.

    pending/achieved/dropped always partition the mission's task ids;
    current_exit starts as the mission exit and may be substituted during
    replanning, but stays recoverable.
    """

    pending: set[str]
    achieved: set[str] = field(default_factory=set)
    dropped: dict[str, str] = field(default_factory=dict)  # task_id -> reason
    current_exit: str = ""

    def all_ids(self) -> set[str]:
        return self.pending | self.achieved | set(self.dropped)

    def mark_achieved(self, task_id: str) -> None:
        if task_id in self.achieved:
            return
        if task_id not in self.pending:
            raise ValueError(f"task {task_id} is not pending")
        self.pending.discard(task_id)
        self.achieved.add(task_id)

    def drop(self, task_id: str, reason: str) -> None:
        if task_id not in self.pending:
            raise ValueError(f"task {task_id} is not pending")
        self.pending.discard(task_id)
        self.dropped[task_id] = reason

    def snapshot(self) -> dict:
        return {
            "pending": sorted(self.pending),
            "achieved": sorted(self.achieved),
            "dropped": {k: self.dropped[k] for k in sorted(self.dropped)},
            "current_exit": self.current_exit,
        }

    @classmethod
    def from_snapshot(cls, doc: dict) -> "GoalSet":
        return cls(
            pending=set(doc["pending"]),
            achieved=set(doc["achieved"]),
            dropped=dict(doc["dropped"]),
            current_exit=doc["current_exit"],
        )


def validate_mission(m: Mission, g: SewerGraph) -> None:
    if m.entry_pipe not in g.pipes:
        raise MissionError(f"unknown entry pipe {m.entry_pipe}")
    entry_ends = [e[0] for e in g.pipes[m.entry_pipe].endpoints]
    if m.entry_towards not in entry_ends:
        raise MissionError(
            f"entry pipe {m.entry_pipe} does not end at {m.entry_towards}"
        )
    if m.exit not in g.manholes:
        raise MissionError(f"unknown exit manhole {m.exit}")
    if not g.manholes[m.exit].recoverable:
        raise MissionError(f"exit manhole {m.exit} is not recoverable")
    if m.time_budget_s <= 0:
        raise MissionError("time budget must be positive")
    seen: set[str] = set()
    for t in m.tasks:
        if t.task_id in seen:
            raise MissionError(f"duplicate task id {t.task_id}")
        seen.add(t.task_id)
        if t.kind is TaskKind.GOTO:
            if t.target not in g.pipes and t.target not in g.manholes:
                raise MissionError(f"unknown target {t.target} for task {t.task_id}")
        else:
            if t.target not in g.pipes:
                raise MissionError(
                    f"task {t.task_id} ({t.kind.value}) needs a pipe target, "
                    f"got {t.target}"
                )


def parse_mission(doc: str | dict, g: SewerGraph) -> Mission:
    """Parse and validate the mission JSON wire format."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise MissionError(f"mission is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise MissionError("mission document must be a JSON object")
    try:
        entry = doc["entry"]
        tasks_doc = doc.get("tasks", [])
        exit_id = doc["exit"]
    except (KeyError, TypeError) as e:
        raise MissionError(f"missing mission field: {e}") from None
    if not isinstance(entry, dict) or "pipe" not in entry or "towards" not in entry:
        raise MissionError('entry must be {"pipe": ..., "towards": ...}')
    budget = doc.get("time_budget_s", DEFAULT_TIME_BUDGET_S)
    if not isinstance(budget, (int, float)):
        raise MissionError("time_budget_s must be a number")
    tasks = []
    if not isinstance(tasks_doc, list):
        raise MissionError("tasks must be a list")
    for i, td in enumerate(tasks_doc):
        if not isinstance(td, dict) or not {"id", "kind", "target"} <= set(td):
            raise MissionError(f"task #{i} must carry id, kind and target")
        try:
            kind = TaskKind(td["kind"])
        except ValueError:
            raise MissionError(f"task {td['id']}: unknown kind {td['kind']!r}") from None
        tasks.append(Task(str(td["id"]), kind, str(td["target"])))
    mission = Mission(
        entry_pipe=str(entry["pipe"]),
        entry_towards=str(entry["towards"]),
        exit=str(exit_id),
        tasks=tuple(tasks),
        time_budget_s=float(budget),
    )
    validate_mission(mission, g)
    return mission


def serialize_mission(m: Mission) -> str:
    budget = int(m.time_budget_s) if m.time_budget_s.is_integer() else m.time_budget_s
    doc = {
        "entry": {"pipe": m.entry_pipe, "towards": m.entry_towards},
        "exit": m.exit,
        "time_budget_s": budget,
        "tasks": [
            {"id": t.task_id, "kind": t.kind.value, "target": t.target}
            for t in m.tasks
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def goal_state(m: Mission) -> GoalSet:
    """Fresh GoalSet: everything pending, exit as authored."""
    return GoalSet(pending={t.task_id for t in m.tasks}, current_exit=m.exit)
