"""Forward state-space search: enforced hill-climbing with a greedy
best-first fallback, both deterministic.

EHC commits to the first strictly heuristic-improving state found by
breadth-first search from the current one, expanding only helpful actions.
When EHC stalls (plateau exhausted), the solver restarts with greedy
best-first search over all actions, which is complete on these finite
problems.
"""
from __future__ import annotations

import heapq
from collections import deque

from .ground import GroundAction, GroundProblem
from .heuristic import INF, relaxed_plan


def apply_action(state: frozenset[int], a: GroundAction) -> frozenset[int]:
    return (state - a.dele) | a.add


def _reconstruct(
    parents: dict[frozenset[int], tuple[frozenset[int], GroundAction]],
    end: frozenset[int],
    start: frozenset[int],
) -> list[GroundAction]:
    path: list[GroundAction] = []
    cur = end
    while cur != start:
        prev, act = parents[cur]
        path.append(act)
        cur = prev
    path.reverse()
    return path


def enforced_hill_climbing(
    problem: GroundProblem, max_expansions: int = 200_000
) -> list[GroundAction] | None:
    state = problem.init
    h, helpful = relaxed_plan(problem, state, problem.goal)
    if h == INF:
        return None
    plan: list[GroundAction] = []
    expansions = 0
    while h > 0:
        # BFS for a strictly better state, helpful actions only.
        start = state
        parents: dict[frozenset[int], tuple[frozenset[int], GroundAction]] = {}
        seen = {start}
        queue: deque[tuple[frozenset[int], set[GroundAction]]] = deque(
            [(start, helpful)]
        )
        found = None
        found_h = h
        found_helpful: set[GroundAction] = set()
        while queue and found is None:
            cur, cur_helpful = queue.popleft()
            for a in problem.applicable(cur):
                if a not in cur_helpful:
                    continue
                nxt = apply_action(cur, a)
                if nxt in seen:
                    continue
                seen.add(nxt)
                parents[nxt] = (cur, a)
                expansions += 1
                if expansions > max_expansions:
                    return None
                nh, nhelpful = relaxed_plan(problem, nxt, problem.goal)
                if nh < h:
                    found, found_h, found_helpful = nxt, nh, nhelpful
                    break
                if nh < INF:
                    queue.append((nxt, nhelpful))
        if found is None:
            return None  # plateau exhausted under pruning
        plan.extend(_reconstruct(parents, found, start))
        state, h, helpful = found, found_h, found_helpful
    return plan


def greedy_best_first(
    problem: GroundProblem, max_expansions: int = 500_000
) -> list[GroundAction] | None:
    start = problem.init
    h0, _ = relaxed_plan(problem, start, problem.goal)
    if h0 == INF:
        return None
    if h0 == 0:
        return []
    counter = 0
    open_heap: list[tuple[float, int, frozenset[int]]] = [(h0, counter, start)]
    parents: dict[frozenset[int], tuple[frozenset[int], GroundAction]] = {}
    closed: set[frozenset[int]] = set()
    expansions = 0
    while open_heap:
        _, _, cur = heapq.heappop(open_heap)
        if cur in closed:
            continue
        closed.add(cur)
        for a in problem.applicable(cur):
            nxt = apply_action(cur, a)
            if nxt in closed or nxt in parents or nxt == start:
                continue
            parents[nxt] = (cur, a)
            expansions += 1
            if expansions > max_expansions:
                return None
            nh, _ = relaxed_plan(problem, nxt, problem.goal)
            if nh == 0 and problem.goal <= nxt:
                return _reconstruct(parents, nxt, start)
            if nh < INF:
                counter += 1
                heapq.heappush(open_heap, (nh, counter, nxt))
    return None


def search(problem: GroundProblem) -> list[GroundAction] | None:
    """FF-style two-stage search. None means no plan exists (or the search
    space was exhausted, which on these finite problems is the same thing)."""
    if problem.goal <= problem.init:
        return []
    plan = enforced_hill_climbing(problem)
    if plan is not None:
        return plan
    return greedy_best_first(problem)
