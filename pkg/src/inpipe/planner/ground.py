"""Compilation of (belief model, planning state, goals) into ground STRIPS.

The sewer instances are small, so grounding is explicit enumeration. Places
become atoms; every movement action carries exactly one place precondition,
which keeps successor generation a single index lookup.

The robot's symmetric body can swap head and tail at will, so travel
direction inside a pipe is not a planning-relevant distinction: places are
directionless here. Facing matters in exactly one spot — a robot inside a
blocked pipe can only escape through the end behind it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from ..mission import GoalSet, Task, TaskKind
from ..sewer import SewerGraph, id_number, manhole_type_designator, traversable
from .model import BeliefModel, InPipe, PlanningState

DRIVE = "DRIVE_PIPE_TO_MANHOLE"
SAMPLE = "TAKE_WATER_SAMPLE"
INSPECT = "INSPECT_PIPE"

# Atom constructors (atoms are plain strings, interned to ints per problem).
def at_pipe(p: str) -> str:
    return f"at-pipe:{p}"


def at_port(m: str, i: int) -> str:
    return f"at-port:{m}:{i}"


def sampled(p: str) -> str:
    return f"sampled:{p}"


def inspected(p: str) -> str:
    return f"inspected:{p}"


def seen_pipe(p: str) -> str:
    return f"seen-pipe:{p}"


def seen_manhole(m: str) -> str:
    return f"seen-manhole:{m}"


def parked(m: str) -> str:
    return f"parked:{m}"


PARKED_RECOVERABLE = "parked-recoverable"


def cross_name(g: SewerGraph, m: str, i: int, j: int) -> str:
    return f"DRIVE_MANHOLE_{manhole_type_designator(g.manholes[m])}_FROM_{i}_TO_{j}"


def cross_args(g: SewerGraph, m: str) -> tuple[str, ...]:
    return (m,) + tuple(p.pipe for p in g.manholes[m].ports)


@dataclass(frozen=True)
class GroundAction:
    name: str
    args: tuple[str, ...]
    pre: frozenset[int]
    add: frozenset[int]
    dele: frozenset[int]
    place_pre: int  # the single place atom required; index key

    def sort_key(self) -> tuple:
        return (self.name, tuple(id_number(a) for a in self.args), self.place_pre)

    def line(self) -> str:
        return " ".join((self.name,) + self.args)


@dataclass
class GroundProblem:
    atom_ids: dict[str, int]
    atom_names: list[str]
    actions: list[GroundAction]            # canonical order
    by_place: dict[int, list[GroundAction]]
    init: frozenset[int]
    goal: frozenset[int]
    belief: BeliefModel = field(repr=False, default=None)  # type: ignore[assignment]

    def aid(self, name: str) -> int:
        return self.atom_ids[name]

    def applicable(self, state: frozenset[int]) -> list[GroundAction]:
        out = []
        for place_atom in state:
            for a in self.by_place.get(place_atom, ()):
                if a.pre <= state:
                    out.append(a)
        out.sort(key=GroundAction.sort_key)
        return out


def goal_atoms_for(
    goals: GoalSet, tasks_by_id: dict[str, Task], exit_mode: str = "exit"
) -> list[str]:
    """Goal atom names for the pending tasks plus the exit condition.

    exit_mode: "exit" parks at goals.current_exit, "any-recoverable" parks at
    whatever recoverable manhole is reachable, "none" omits the exit goal.
    """
    out: list[str] = []
    for tid in sorted(goals.pending):
        t = tasks_by_id[tid]
        if t.kind is TaskKind.WATER_SAMPLE:
            out.append(sampled(t.target))
        elif t.kind is TaskKind.INSPECT:
            out.append(inspected(t.target))
        else:
            if t.target.startswith("P"):
                out.append(seen_pipe(t.target))
            else:
                out.append(seen_manhole(t.target))
    if exit_mode == "exit":
        if goals.current_exit:
            out.append(parked(goals.current_exit))
    elif exit_mode == "any-recoverable":
        out.append(PARKED_RECOVERABLE)
    elif exit_mode != "none":
        raise ValueError(f"unknown exit_mode {exit_mode!r}")
    return out


def ground_problem(
    belief: BeliefModel,
    state: PlanningState,
    goal_names: list[str],
) -> GroundProblem:
    """Enumerate atoms and ground actions for the belief graph."""
    g = belief.graph
    state.check(g)
    blocked = belief.blocked_pipes

    atom_ids: dict[str, int] = {}
    atom_names: list[str] = []

    def aid(name: str) -> int:
        i = atom_ids.get(name)
        if i is None:
            i = len(atom_names)
            atom_ids[name] = i
            atom_names.append(name)
        return i

    # Fix atom numbering deterministically: places, facts, then bookkeeping.
    pipe_order = sorted(g.pipes, key=id_number)
    manhole_order = sorted(g.manholes, key=id_number)
    for p in pipe_order:
        aid(at_pipe(p))
    for m in manhole_order:
        for port in g.manholes[m].ports:
            aid(at_port(m, port.index))
    for p in pipe_order:
        aid(sampled(p))
        aid(inspected(p))
        aid(seen_pipe(p))
    for m in manhole_order:
        aid(seen_manhole(m))
        aid(parked(m))
    aid(PARKED_RECOVERABLE)

    all_parked = frozenset(
        {atom_ids[parked(m)] for m in manhole_order} | {atom_ids[PARKED_RECOVERABLE]}
    )

    actions: list[GroundAction] = []

    def add_action(name, args, pre_place, extra_pre, add, dele):
        pre = frozenset({pre_place} | set(extra_pre))
        actions.append(
            GroundAction(name, tuple(args), pre, frozenset(add), frozenset(dele), pre_place)
        )

    # Drives. A normal pipe yields instances from inside the pipe and from
    # the far-end port; blocked pipes yield only the escape drive away from
    # the robot's facing.
    escape: tuple[str, str] | None = None  # (pipe, manhole to escape to)
    if isinstance(state.at, InPipe) and state.at.pipe in blocked:
        pipe = g.pipes[state.at.pipe]
        ends = [e[0] for e in pipe.endpoints]
        behind = [m for m in ends if m != state.at.facing]
        if behind:
            escape = (pipe.id, behind[0])

    for pid in pipe_order:
        pipe = g.pipes[pid]
        for mid, port_idx in pipe.endpoints:
            if pid in blocked and (pid, mid) != escape:
                continue
            arrive = atom_ids[at_port(mid, port_idx)]
            add = {arrive, atom_ids[seen_pipe(pid)], atom_ids[seen_manhole(mid)]}
            # from inside the pipe
            src = atom_ids[at_pipe(pid)]
            add_action(DRIVE, (pid, mid), src, (), add, {src} | all_parked)
            # from the mouth at the far end
            far = pipe.other_end(mid)
            if far is not None and pid not in blocked:
                src = atom_ids[at_port(far[0], far[1])]
                add_action(DRIVE, (pid, mid), src, (), add, {src} | all_parked)

    # Chamber crossings, one per traversable ordered port pair whose
    # destination pipe is not blocked.
    for mid in manhole_order:
        m = g.manholes[mid]
        args = cross_args(g, mid)
        for pi in m.ports:
            for pj in m.ports:
                if pi.index == pj.index or pj.pipe in blocked:
                    continue
                if not traversable(m, pi.index, pj.index, belief.limits):
                    continue
                src = atom_ids[at_port(mid, pi.index)]
                add = {
                    atom_ids[at_pipe(pj.pipe)],
                    atom_ids[parked(mid)],
                    atom_ids[seen_manhole(mid)],
                    atom_ids[seen_pipe(pj.pipe)],
                }
                if m.recoverable:
                    add.add(atom_ids[PARKED_RECOVERABLE])
                dele = {src} | (all_parked - add)
                add_action(
                    cross_name(g, mid, pi.index, pj.index), args, src, (), add, dele
                )

    # Task actions. Sampling means dipping the probe at the point inside the
    # pipe; inspection scans the bore and also works from a mouth the robot
    # stands in.
    for pid in pipe_order:
        pipe = g.pipes[pid]
        inside = atom_ids[at_pipe(pid)]
        add_action(SAMPLE, (pid,), inside, (), {atom_ids[sampled(pid)]}, ())
        for src in [inside] + [atom_ids[at_port(m, i)] for m, i in pipe.endpoints]:
            add_action(INSPECT, (pid,), src, (), {atom_ids[inspected(pid)]}, ())

    actions.sort(key=GroundAction.sort_key)
    by_place: dict[int, list[GroundAction]] = {}
    for a in actions:
        by_place.setdefault(a.place_pre, []).append(a)

    # Initial atoms.
    init: set[int] = set()
    if isinstance(state.at, InPipe):
        init.add(atom_ids[at_pipe(state.at.pipe)])
        init.add(atom_ids[seen_pipe(state.at.pipe)])
    else:
        init.add(atom_ids[at_port(state.at.manhole, state.at.port)])
        init.add(atom_ids[seen_manhole(state.at.manhole)])
        init.add(atom_ids[seen_pipe(g.manholes[state.at.manhole].port(state.at.port).pipe)])
    for p in state.sampled:
        init.add(atom_ids[sampled(p)])
    for p in state.inspected:
        init.add(atom_ids[inspected(p)])
    if state.parked is not None:
        init.add(atom_ids[parked(state.parked)])
        init.add(atom_ids[seen_manhole(state.parked)])
        if g.manholes[state.parked].recoverable:
            init.add(atom_ids[PARKED_RECOVERABLE])

    goal = frozenset(aid(name) for name in goal_names)

    return GroundProblem(
        atom_ids=atom_ids,
        atom_names=atom_names,
        actions=actions,
        by_place=by_place,
        init=frozenset(init),
        goal=goal,
        belief=belief,
    )
