"""Step-by-step plan validation against the map and kinematic rules.

Deliberately independent of the grounder: this simulates each action's
preconditions and effects straight off the SewerGraph, so a bug in the
grounding cannot hide behind an identical bug here.

The robot's body is symmetric, so a rendered plan never contains explicit
turn-around actions; driving a pipe is legal from inside it regardless of
which way it last moved.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..mission import GoalSet, Task, TaskKind
from ..sewer import manhole_type_designator, traversable
from .ground import cross_name
from .model import BeliefModel, InPipe, PlanningState
from .solution import SymbolicAction, SymbolicPlan, decode_cross_name


@dataclass(frozen=True)
class Violation:
    step: int  # 1-based action index; 0 = end-of-plan goal check
    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class Ok:
    final_state: "SimState"

    def __bool__(self) -> bool:
        return True


@dataclass
class SimState:
    place_pipe: str | None = None     # inside this pipe ...
    place_port: tuple[str, int] | None = None  # ... or at this manhole port
    sampled: set[str] = field(default_factory=set)
    inspected: set[str] = field(default_factory=set)
    seen_pipes: set[str] = field(default_factory=set)
    seen_manholes: set[str] = field(default_factory=set)
    parked: str | None = None


def _init_sim(state: PlanningState) -> SimState:
    s = SimState(sampled=set(state.sampled), inspected=set(state.inspected))
    if isinstance(state.at, InPipe):
        s.place_pipe = state.at.pipe
        s.seen_pipes.add(state.at.pipe)
    else:
        s.place_port = (state.at.manhole, state.at.port)
        s.seen_manholes.add(state.at.manhole)
    s.parked = state.parked
    if state.parked:
        s.seen_manholes.add(state.parked)
    return s


def _adjacent_pipes(sim: SimState, belief: BeliefModel) -> set[str]:
    """Pipes the robot is inside of or whose mouth it stands in."""
    if sim.place_pipe is not None:
        return {sim.place_pipe}
    m, i = sim.place_port  # type: ignore[misc]
    return {belief.graph.manholes[m].port(i).pipe}


def _step(
    sim: SimState,
    act: SymbolicAction,
    belief: BeliefModel,
    escape_to: str | None,
) -> str | None:
    """Apply one action; return a reason string on a precondition violation.

    escape_to is the only manhole a drive through the robot's own blocked
    pipe may target (the end behind the robot); None once it has moved.
    """
    g = belief.graph
    if act.name == "DRIVE_PIPE_TO_MANHOLE":
        pid, mid = act.args
        pipe = g.pipes.get(pid)
        if pipe is None:
            return f"unknown pipe {pid}"
        ends = dict(pipe.endpoints)
        if mid not in ends:
            return f"pipe {pid} does not end at {mid}"
        if sim.place_pipe == pid:
            if pid in belief.blocked_pipes and escape_to is not None and mid != escape_to:
                return f"pipe {pid} is blocked ahead; can only back out to {escape_to}"
        elif sim.place_port is not None:
            far = pipe.other_end(mid)
            if far is None or sim.place_port != far:
                return f"robot not at required place to drive {pid} towards {mid}"
            if pid in belief.blocked_pipes:
                return f"pipe {pid} is blocked"
        else:
            return f"robot not in pipe {pid}"
        sim.place_pipe = None
        sim.place_port = (mid, ends[mid])
        sim.parked = None
        sim.seen_pipes.add(pid)
        sim.seen_manholes.add(mid)
        return None

    spec = decode_cross_name(act.name)
    if spec is not None:
        mid = act.args[0]
        m = g.manholes.get(mid)
        if m is None:
            return f"unknown manhole {mid}"
        expected = cross_name(g, mid, spec.from_port, spec.to_port)
        if act.name != expected:
            return f"action name {act.name} does not match {mid} ({manhole_type_designator(m)})"
        if tuple(act.args[1:]) != tuple(p.pipe for p in m.ports):
            return f"arguments do not list {mid}'s pipes in port order"
        try:
            to_pipe = m.port(spec.to_port).pipe
            m.port(spec.from_port)
        except KeyError:
            return f"{mid} has no such port"
        if sim.place_port != (mid, spec.from_port):
            return f"robot not at {mid} port {spec.from_port}"
        t = traversable(m, spec.from_port, spec.to_port, belief.limits)
        if not t:
            return f"{mid} {spec.from_port}->{spec.to_port} not traversable: {t.reason}"
        if to_pipe in belief.blocked_pipes:
            return f"pipe {to_pipe} is blocked"
        sim.place_port = None
        sim.place_pipe = to_pipe
        sim.parked = mid
        sim.seen_manholes.add(mid)
        sim.seen_pipes.add(to_pipe)
        return None

    # task actions
    pid = act.args[0]
    if pid not in g.pipes:
        return f"unknown pipe {pid}"
    if act.name == "TAKE_WATER_SAMPLE":
        if sim.place_pipe != pid:
            return f"robot not inside {pid}"
        sim.sampled.add(pid)
    else:
        if pid not in _adjacent_pipes(sim, belief):
            return f"robot not inside or adjacent to {pid}"
        sim.inspected.add(pid)
    return None


def validate_plan(
    belief: BeliefModel,
    state: PlanningState,
    plan: SymbolicPlan,
    goals: GoalSet,
    tasks_by_id: dict[str, Task],
) -> Ok | Violation:
    """Simulate the plan; Ok iff every precondition holds at its step and all
    pending goals plus the exit condition hold at the end."""
    state.check(belief.graph)
    sim = _init_sim(state)
    escape_to: str | None = None
    if (
        isinstance(state.at, InPipe)
        and state.at.pipe in belief.blocked_pipes
        and state.at.facing is not None
    ):
        behind = [
            e[0]
            for e in belief.graph.pipes[state.at.pipe].endpoints
            if e[0] != state.at.facing
        ]
        escape_to = behind[0] if behind else ""  # "" = sealed, no drive legal
    for i, act in enumerate(plan, start=1):
        reason = _step(sim, act, belief, escape_to)
        if reason is not None:
            return Violation(i, reason)
        escape_to = None

    for tid in sorted(goals.pending):
        t = tasks_by_id[tid]
        if t.kind is TaskKind.WATER_SAMPLE and t.target not in sim.sampled:
            return Violation(0, f"goal not achieved: water sample from {t.target}")
        if t.kind is TaskKind.INSPECT and t.target not in sim.inspected:
            return Violation(0, f"goal not achieved: inspection of {t.target}")
        if t.kind is TaskKind.GOTO:
            if t.target.startswith("P") and t.target not in sim.seen_pipes:
                return Violation(0, f"goal not achieved: visit {t.target}")
            if t.target.startswith("M") and t.target not in sim.seen_manholes:
                return Violation(0, f"goal not achieved: visit {t.target}")
    if goals.current_exit and sim.parked != goals.current_exit:
        return Violation(0, f"robot not parked at exit {goals.current_exit}")
    return Ok(sim)
