"""STRIPS-subset PDDL rendering of the grounded problem.

Actions are emitted fully ground (zero parameters, constants inline) since
grounding is explicit enumeration anyway. The reverse-in-place action is
included for completeness even though the symmetric body makes it a no-op
at this level of abstraction.
"""
from __future__ import annotations

from ..mission import GoalSet, Task
from ..sewer import id_number
from .ground import GroundProblem, goal_atoms_for, ground_problem
from .model import BeliefModel, PlanningState

_PREDICATES = (
    "(at ?pl - place)",
    "(sampled ?p - pipe)",
    "(inspected ?p - pipe)",
    "(seen-pipe ?p - pipe)",
    "(seen-manhole ?m - manhole)",
    "(parked ?m - manhole)",
    "(parked-recoverable)",
)


def _pddl_atom(name: str) -> str:
    """Map an internal atom name to a PDDL ground literal."""
    kind, _, rest = name.partition(":")
    if kind == "at-pipe":
        return f"(at pl-{rest.lower()})"
    if kind == "at-port":
        m, i = rest.split(":")
        return f"(at pl-{m.lower()}-{i})"
    if kind == "parked-recoverable":
        return "(parked-recoverable)"
    arg = rest.lower()
    return f"({kind} {arg})"


def _conj(atoms: list[str]) -> str:
    if not atoms:
        return "(and)"
    if len(atoms) == 1:
        return atoms[0]
    return "(and " + " ".join(atoms) + ")"


def emit_pddl(
    belief: BeliefModel,
    state: PlanningState,
    goals: GoalSet,
    tasks_by_id: dict[str, Task],
    problem_name: str = "sewer-mission",
) -> tuple[str, str]:
    """Render (domain document, problem document) for the grounded task."""
    gp: GroundProblem = ground_problem(
        belief, state, goal_atoms_for(goals, tasks_by_id)
    )
    g = belief.graph
    pipe_objs = sorted(g.pipes, key=id_number)
    manhole_objs = sorted(g.manholes, key=id_number)
    place_objs = [f"pl-{p.lower()}" for p in pipe_objs] + [
        f"pl-{m.lower()}-{port.index}"
        for m in manhole_objs
        for port in g.manholes[m].ports
    ]

    lines = [
        "(define (domain sewer-robot)",
        "  (:requirements :strips :typing)",
        "  (:types manhole pipe place)",
        "  (:predicates",
    ]
    lines += [f"    {p}" for p in _PREDICATES]
    lines.append("  )")
    lines.append("")
    lines.append("  ; the body is symmetric: reversing in place is free and")
    lines.append("  ; changes nothing at this level of abstraction")
    for p in pipe_objs:
        lines.append(f"  (:action reverse_in_place__{p.lower()}")
        lines.append("    :parameters ()")
        lines.append(f"    :precondition (at pl-{p.lower()})")
        lines.append(f"    :effect (at pl-{p.lower()})")
        lines.append("  )")
    seen_names: dict[str, int] = {}
    for a in gp.actions:
        base = (a.name + "__" + "_".join(a.args)).lower()
        n = seen_names.get(base, 0)
        seen_names[base] = n + 1
        uniq = base if n == 0 else f"{base}__{n}"
        pre = _conj(sorted(_pddl_atom(gp.atom_names[i]) for i in sorted(a.pre)))
        adds = [_pddl_atom(gp.atom_names[i]) for i in sorted(a.add)]
        dels = [f"(not {_pddl_atom(gp.atom_names[i])})" for i in sorted(a.dele)]
        lines.append(f"  (:action {uniq}")
        lines.append("    :parameters ()")
        lines.append(f"    :precondition {pre}")
        lines.append(f"    :effect {_conj(adds + dels)}")
        lines.append("  )")
    lines.append(")")
    domain = "\n".join(lines) + "\n"

    plines = [
        f"(define (problem {problem_name})",
        "  (:domain sewer-robot)",
        "  (:objects",
        "    " + " ".join(m.lower() for m in manhole_objs) + " - manhole",
        "    " + " ".join(p.lower() for p in pipe_objs) + " - pipe",
        "    " + " ".join(place_objs) + " - place",
        "  )",
        "  (:init",
    ]
    plines += [
        f"    {_pddl_atom(gp.atom_names[i])}" for i in sorted(gp.init)
    ]
    plines.append("  )")
    goal_atoms = [_pddl_atom(gp.atom_names[i]) for i in sorted(gp.goal)]
    plines.append(f"  (:goal {_conj(goal_atoms)})")
    plines.append(")")
    problem = "\n".join(plines) + "\n"
    return domain, problem
