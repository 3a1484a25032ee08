"""Route planning: STRIPS compilation, FF-style search, goal maximization.

solve() turns a belief model, a robot state and a goal set into a symbolic
plan (or None when the goals are unreachable). maximize_goals() is the
degraded-mode entry point: keep as many tasks as a plan can still serve,
substituting the exit manhole when the authored one is cut off.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from ..mission import GoalSet, Task
from .ground import goal_atoms_for, ground_problem
from .heuristic import heuristic
from .model import AtManholePort, BeliefModel, InPipe, Place, PlanningState
from .pddl import emit_pddl
from .search import search
from .solution import (
    SolutionSyntaxError,
    SymbolicAction,
    SymbolicPlan,
    parse_solution,
    render_solution,
)
from .validate import Ok, Violation, validate_plan

__all__ = [
    "AtManholePort",
    "BeliefModel",
    "GoalDecision",
    "InPipe",
    "Ok",
    "Place",
    "PlanningState",
    "SolutionSyntaxError",
    "SymbolicAction",
    "SymbolicPlan",
    "Violation",
    "emit_pddl",
    "maximize_goals",
    "parse_solution",
    "plan_heuristic",
    "render_solution",
    "solve",
    "validate_plan",
]

EXACT_SUBSET_LIMIT = 12


def _to_symbolic(ground_plan) -> SymbolicPlan:
    return SymbolicPlan(tuple(SymbolicAction(a.name, a.args) for a in ground_plan))


def solve(
    belief: BeliefModel,
    state: PlanningState,
    goals: GoalSet,
    tasks_by_id: dict[str, Task],
    exit_mode: str = "exit",
) -> SymbolicPlan | None:
    """Plan for all pending goals plus the exit condition. None = unsolvable."""
    names = goal_atoms_for(goals, tasks_by_id, exit_mode)
    problem = ground_problem(belief, state, names)
    found = search(problem)
    if found is None:
        return None
    return _to_symbolic(found)


def plan_heuristic(
    belief: BeliefModel,
    state: PlanningState,
    goals: GoalSet,
    tasks_by_id: dict[str, Task],
) -> float:
    """Relaxed-plan length from the given state; 0 iff goals hold, inf iff
    unreachable even ignoring delete effects."""
    names = goal_atoms_for(goals, tasks_by_id)
    problem = ground_problem(belief, state, names)
    return heuristic(problem, problem.init)


@dataclass(frozen=True)
class GoalDecision:
    """Outcome of goal maximization: which pending tasks to keep, the plan
    serving them, and the exit it ends at."""

    kept: frozenset[str]
    plan: SymbolicPlan
    new_exit: str


def _last_parked_manhole(plan: SymbolicPlan, fallback: str | None) -> str | None:
    for act in reversed(plan.actions):
        if act.name.startswith("DRIVE_MANHOLE_"):
            return act.args[0]
    return fallback


def maximize_goals(
    belief: BeliefModel,
    state: PlanningState,
    goals: GoalSet,
    tasks_by_id: dict[str, Task],
) -> GoalDecision | None:
    """Largest subset of pending tasks a single plan can still serve while
    ending at a recoverable manhole.

    Ties break in favour of the authored exit, then shorter plans, then the
    lexicographically smallest task-id subset. Returns None when not even a
    bare escape to a recoverable manhole exists (the robot is stranded and
    would switch on its locator transmitter).
    """
    pending = sorted(goals.pending)
    exact = len(pending) <= EXACT_SUBSET_LIMIT

    def attempt(subset: tuple[str, ...]) -> tuple[SymbolicPlan, str] | None:
        sub_goals = GoalSet(
            pending=set(subset),
            achieved=set(goals.achieved),
            current_exit=goals.current_exit,
        )
        plan = solve(belief, state, sub_goals, tasks_by_id, exit_mode="exit")
        if plan is not None:
            return plan, goals.current_exit
        plan = solve(belief, state, sub_goals, tasks_by_id, exit_mode="any-recoverable")
        if plan is not None:
            exit_m = _last_parked_manhole(plan, state.parked)
            if exit_m is None or not belief.graph.manholes[exit_m].recoverable:
                return None
            return plan, exit_m
        return None

    if exact:
        for size in range(len(pending), -1, -1):
            best: tuple[tuple, SymbolicPlan, str, tuple[str, ...]] | None = None
            for subset in combinations(pending, size):
                got = attempt(subset)
                if got is None:
                    continue
                plan, exit_m = got
                rank = (exit_m != goals.current_exit, len(plan), subset)
                if best is None or rank < best[0]:
                    best = (rank, plan, exit_m, subset)
            if best is not None:
                _, plan, exit_m, subset = best
                return GoalDecision(frozenset(subset), plan, exit_m)
        return None

    # Beyond the exact limit: drop tasks greedily one at a time, each time
    # discarding the task whose removal leaves a solvable remainder.
    kept = list(pending)
    while True:
        got = attempt(tuple(kept))
        if got is not None:
            plan, exit_m = got
            return GoalDecision(frozenset(kept), plan, exit_m)
        if not kept:
            return None
        removed = False
        for victim in list(kept):
            trial = tuple(t for t in kept if t != victim)
            if attempt(trial) is not None or not trial:
                kept.remove(victim)
                removed = True
                break
        if not removed:
            kept.pop()
