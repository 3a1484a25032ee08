"""Fusing the quantity-free symbolic plan with map data.

Symbolic actions carry only IDs; the executable form needs distances,
diameters, turn angles and step heights. Every number here is read off the
SewerGraph — fusion never invents values.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .mission import Task, TaskKind
from .planner.ground import cross_args, cross_name
from .planner.model import BeliefModel
from .planner.solution import SymbolicPlan, decode_cross_name
from .sewer import KinematicLimits, turn_angle


class FusionError(ValueError):
    """Symbolic action cannot be matched against the map."""


class ActionKind(Enum):
    DRIVE_TO_MANHOLE = "DRIVE_TO_MANHOLE"
    CROSS_MANHOLE = "CROSS_MANHOLE"
    TAKE_WATER_SAMPLE = "TAKE_WATER_SAMPLE"
    INSPECT_PIPE = "INSPECT_PIPE"


@dataclass(frozen=True)
class GroundedAction:
    kind: ActionKind
    # drive
    pipe: str = ""
    direction: str = ""            # target manhole id (no global frame exists)
    distance_cm: float = 0.0
    pipe_diameter_cm: float = 0.0
    speed_cm_s: float = 0.0
    # cross
    manhole: str = ""
    from_port: int = 0
    to_port: int = 0
    turn_deg: float = 0.0
    step_cm: float = 0.0
    manhole_type: str = ""
    # tasks
    task_id: str = ""

    def to_json(self) -> dict:
        if self.kind is ActionKind.DRIVE_TO_MANHOLE:
            return {
                "kind": self.kind.value,
                "pipe": self.pipe,
                "direction": self.direction,
                "distance_cm": self.distance_cm,
                "pipe_diameter_cm": self.pipe_diameter_cm,
                "speed_cm_s": self.speed_cm_s,
            }
        if self.kind is ActionKind.CROSS_MANHOLE:
            return {
                "kind": self.kind.value,
                "manhole": self.manhole,
                "from_port": self.from_port,
                "to_port": self.to_port,
                "turn_deg": self.turn_deg,
                "step_cm": self.step_cm,
                "manhole_type": self.manhole_type,
            }
        return {"kind": self.kind.value, "pipe": self.pipe, "task_id": self.task_id}

    @classmethod
    def from_json(cls, doc: dict) -> "GroundedAction":
        kind = ActionKind(doc["kind"])
        fields = {k: v for k, v in doc.items() if k != "kind"}
        return cls(kind=kind, **fields)


def fuse(
    plan: SymbolicPlan,
    belief: BeliefModel,
    limits: KinematicLimits | None = None,
    tasks_by_id: dict[str, Task] | None = None,
) -> list[GroundedAction]:
    """One grounded action per symbolic action, order preserved.

    Task actions are labelled with the matching task id when a task table is
    given; multiple tasks on the same pipe are consumed in id order.
    """
    g = belief.graph
    lim = limits or belief.limits
    speed = min(lim.cruise_speed_cm_s, lim.max_speed_cm_s)
    unclaimed: dict[tuple[str, str], list[str]] = {}
    if tasks_by_id:
        kind_map = {TaskKind.WATER_SAMPLE: "TAKE_WATER_SAMPLE", TaskKind.INSPECT: "INSPECT_PIPE"}
        for tid in sorted(tasks_by_id):
            t = tasks_by_id[tid]
            if t.kind in kind_map:
                unclaimed.setdefault((kind_map[t.kind], t.target), []).append(tid)

    out: list[GroundedAction] = []
    for i, act in enumerate(plan, start=1):
        if act.name == "DRIVE_PIPE_TO_MANHOLE":
            pid, mid = act.args
            pipe = g.pipes.get(pid)
            if pipe is None:
                raise FusionError(f"action {i}: unknown pipe {pid}")
            if mid not in (e[0] for e in pipe.endpoints):
                raise FusionError(f"action {i}: pipe {pid} does not end at {mid}")
            out.append(
                GroundedAction(
                    ActionKind.DRIVE_TO_MANHOLE,
                    pipe=pid,
                    direction=mid,
                    distance_cm=pipe.length_cm,
                    pipe_diameter_cm=pipe.diameter_cm,
                    speed_cm_s=speed,
                )
            )
            continue
        spec = decode_cross_name(act.name)
        if spec is not None:
            mid = act.args[0]
            m = g.manholes.get(mid)
            if m is None:
                raise FusionError(f"action {i}: unknown manhole {mid}")
            if act.name != cross_name(g, mid, spec.from_port, spec.to_port):
                raise FusionError(
                    f"action {i}: name {act.name} inconsistent with {mid}'s geometry"
                )
            if act.args != cross_args(g, mid):
                raise FusionError(
                    f"action {i}: arguments do not match {mid}'s ports"
                )
            turn = turn_angle(m, spec.from_port, spec.to_port)
            step = abs(
                m.port(spec.from_port).invert_offset_cm
                - m.port(spec.to_port).invert_offset_cm
            )
            out.append(
                GroundedAction(
                    ActionKind.CROSS_MANHOLE,
                    manhole=mid,
                    from_port=spec.from_port,
                    to_port=spec.to_port,
                    turn_deg=turn,
                    step_cm=step,
                    manhole_type=f"TYPE_{spec.type_k}"
                    + (f"_TYPE_{spec.letter}" if spec.letter else ""),
                )
            )
            continue
        pid = act.args[0]
        if pid not in g.pipes:
            raise FusionError(f"action {i}: unknown pipe {pid}")
        queue = unclaimed.get((act.name, pid), [])
        task_id = queue.pop(0) if queue else ""
        kind = (
            ActionKind.TAKE_WATER_SAMPLE
            if act.name == "TAKE_WATER_SAMPLE"
            else ActionKind.INSPECT_PIPE
        )
        out.append(GroundedAction(kind, pipe=pid, task_id=task_id))
    return out
