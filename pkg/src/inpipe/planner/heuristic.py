"""Relaxed-plan heuristic: plan length in the delete-free problem.

Builds the layered reachability graph (delete effects ignored), then
extracts a relaxed plan backwards, choosing achievers canonically so the
value is deterministic. Also reports helpful actions: the applicable
actions that contribute a first-layer subgoal of the extracted plan.
"""
from __future__ import annotations

import math

from .ground import GroundAction, GroundProblem

INF = math.inf


def relaxed_plan(
    problem: GroundProblem, state: frozenset[int], goal: frozenset[int]
) -> tuple[float, set[GroundAction]]:
    """Return (h, helpful actions). h is the relaxed plan length, 0 when the
    goal already holds, inf when unreachable even ignoring deletes."""
    if goal <= state:
        return 0.0, set()

    level: dict[int, int] = {a: 0 for a in state}
    action_level: dict[int, int] = {}
    achievers: dict[int, list[int]] = {}

    facts = set(state)
    frontier = True
    depth = 0
    actions = problem.actions
    pending = list(range(len(actions)))
    while frontier and not goal <= facts:
        frontier = False
        depth += 1
        still: list[int] = []
        newly: set[int] = set()
        for idx in pending:
            a = actions[idx]
            if a.pre <= facts:
                action_level[idx] = depth - 1
                for f in a.add:
                    if f not in facts and f not in newly:
                        newly.add(f)
                        level[f] = depth
                    if f not in state and (f not in level or level[f] == depth):
                        achievers.setdefault(f, []).append(idx)
            else:
                still.append(idx)
        if newly:
            frontier = True
            facts |= newly
        pending = still

    if not goal <= facts:
        return INF, set()

    # Backward extraction: satisfy each goal at its first layer with the
    # canonically smallest achiever, then push that achiever's preconditions.
    max_layer = max((level[f] for f in goal), default=0)
    subgoals: dict[int, set[int]] = {t: set() for t in range(max_layer + 1)}
    for f in goal:
        subgoals[level[f]].add(f)

    chosen: list[int] = []
    chosen_keys: set[tuple] = set()
    chosen_set: set[int] = set()
    for t in range(max_layer, 0, -1):
        for f in sorted(subgoals[t]):
            if level.get(f, INF) == 0:
                continue
            cands = [i for i in achievers.get(f, ()) if action_level[i] <= t - 1]
            best = min(cands, key=lambda i: actions[i].sort_key())
            if best not in chosen_set:
                chosen_set.add(best)
                chosen.append(best)
                chosen_keys.add((actions[best].name, actions[best].args))
            for p in actions[best].pre:
                lp = level[p]
                if lp > 0:
                    subgoals[min(lp, t - 1)].add(p)

    # Distinct rendered actions; two instances of the same action reached
    # from different places are one physical step.
    h = float(len(chosen_keys))

    helpful: set[GroundAction] = set()
    first_layer_goals = subgoals.get(1, set())
    if first_layer_goals:
        for idx in chosen:
            a = actions[idx]
            if action_level[idx] == 0 and a.pre <= state and a.add & first_layer_goals:
                helpful.add(a)
        # Any applicable action adding a needed first-layer fact counts.
        for a in problem.applicable(state):
            if a.add & first_layer_goals:
                helpful.add(a)
    return h, helpful


def heuristic(problem: GroundProblem, state: frozenset[int]) -> float:
    h, _ = relaxed_plan(problem, state, problem.goal)
    return h
