"""Mission orchestration: plan, execute, and on failure edit the belief
model, relax the goals, and plan again until the run is terminal.

A blockage is permanent within a run: once a pipe is disconnected in the
belief model it stays disconnected, which bounds the number of replans by
the number of pipes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .events import EventLog
from .executive import ActionExecutor, Breadcrumb, RunOutcomeKind
from .fusion import ActionKind, GroundedAction, fuse
from .mission import GoalSet, Mission, Task, goal_state
from .planner import (
    BeliefModel,
    GoalDecision,
    InPipe,
    PlanningState,
    SymbolicPlan,
    maximize_goals,
    render_solution,
)
from .sewer import SewerGraph
from .simulator import (
    GroundTruth,
    Scenario,
    SimConfig,
    Simulator,
    entry_robot_state,
)


class RunStatus(Enum):
    PLANNING = "PLANNING"
    EXECUTING = "EXECUTING"
    REPLANNING = "REPLANNING"
    DONE_COMPLETED = "DONE_COMPLETED"
    DONE_PARTIAL = "DONE_PARTIAL"
    DONE_SAFETY = "DONE_SAFETY"
    DONE_STRANDED = "DONE_STRANDED"


TERMINAL_STATUSES = {
    RunStatus.DONE_COMPLETED,
    RunStatus.DONE_PARTIAL,
    RunStatus.DONE_SAFETY,
    RunStatus.DONE_STRANDED,
}

EXIT_CODES = {
    RunStatus.DONE_COMPLETED: 0,
    RunStatus.DONE_PARTIAL: 2,
    RunStatus.DONE_SAFETY: 3,
    RunStatus.DONE_STRANDED: 4,
}


def estimate_plan_duration_s(actions: list[GroundedAction], config: SimConfig) -> float:
    """Nominal duration from map distances and fixed task timings."""
    total = 0.0
    for a in actions:
        if a.kind is ActionKind.DRIVE_TO_MANHOLE:
            if a.speed_cm_s > 0:
                total += a.distance_cm / a.speed_cm_s
        elif a.kind is ActionKind.CROSS_MANHOLE:
            total += config.cross_s
        elif a.kind is ActionKind.TAKE_WATER_SAMPLE:
            total += config.sample_s
        else:
            total += config.scan_s
    return total


@dataclass
class MissionRun:
    """Whole-mission state: belief, goals, plan history and status."""

    mission: Mission
    belief: BeliefModel
    goals: GoalSet
    history: list[tuple[SymbolicPlan, str]] = field(default_factory=list)
    status: RunStatus = RunStatus.PLANNING


class MissionController:
    """Drives one MissionRun tick by tick against a simulator."""

    def __init__(
        self,
        mission: Mission,
        ground_truth: GroundTruth,
        belief_graph: SewerGraph | None = None,
        scenario: Scenario | None = None,
        events: EventLog | None = None,
        config: SimConfig | None = None,
    ):
        self.mission = mission
        self.tasks_by_id: dict[str, Task] = {t.task_id: t for t in mission.tasks}
        self.config = config or SimConfig()
        belief = BeliefModel(graph=belief_graph or ground_truth.graph)
        self.run = MissionRun(mission, belief, goal_state(mission))
        self.events = events or EventLog()
        self.scenario = scenario or Scenario()
        self.sim = Simulator(
            ground_truth,
            entry_robot_state(
                ground_truth.graph,
                mission.entry_pipe,
                mission.entry_towards,
                mission.time_budget_s,
            ),
            self.config,
            self.scenario,
        )
        entry_pipe = belief.graph.pipes[mission.entry_pipe]
        far = entry_pipe.other_end(mission.entry_towards)
        self.trail: list[Breadcrumb] = [
            Breadcrumb(mission.entry_pipe, far[0] if far else "", None)
        ]
        self.executor: ActionExecutor | None = None
        self._actions_completed = 0
        self._planning_state = PlanningState(
            at=InPipe(mission.entry_pipe, mission.entry_towards)
        )

    # -- planning ------------------------------------------------------

    def _plan(self) -> None:
        run = self.run
        decision = maximize_goals(
            run.belief, self._planning_state, run.goals, self.tasks_by_id
        )
        if decision is None:
            for tid in sorted(run.goals.pending):
                run.goals.drop(tid, "stranded")
            self._terminal(RunStatus.DONE_STRANDED)
            return
        self._apply_decision(decision)
        grounded = fuse(
            decision.plan, run.belief, run.belief.limits, self.tasks_by_id
        )
        estimate = estimate_plan_duration_s(grounded, self.config)
        clock = self.sim.robot.clock_s
        self.events.emit(
            clock,
            "PLAN_EMITTED",
            {
                "plan": render_solution(decision.plan),
                "action_count": len(decision.plan),
                "estimated_duration_s": estimate,
                "overrun_warning": clock + estimate > self.mission.time_budget_s,
                "kept": sorted(decision.kept),
                "exit": decision.new_exit,
            },
        )
        run.history.append((decision.plan, "pending"))
        self.executor = ActionExecutor(
            self.sim,
            run.belief,
            run.goals,
            self.tasks_by_id,
            grounded,
            self.events,
            config=self.config,
            action_ordinal_base=self._actions_completed,
            malfunction_actions=frozenset(self.scenario.malfunction_actions),
            trail=self.trail,
            parked_at=self._planning_state.parked,
        )
        run.status = RunStatus.EXECUTING

    def _apply_decision(self, decision: GoalDecision, blocked: str | None = None) -> None:
        run = self.run
        reason = f"blocked:{blocked}" if blocked else "unreachable:initial"
        for tid in sorted(run.goals.pending - decision.kept):
            run.goals.drop(tid, reason)
            self.events.emit(
                self.sim.robot.clock_s,
                "GOAL_UPDATE",
                {"dropped": tid, "reason": reason, "goals": run.goals.snapshot()},
            )
        if decision.new_exit != run.goals.current_exit:
            old = run.goals.current_exit
            run.goals.current_exit = decision.new_exit
            self.events.emit(
                self.sim.robot.clock_s,
                "GOAL_UPDATE",
                {"exit_changed": {"from": old, "to": decision.new_exit},
                 "goals": run.goals.snapshot()},
            )

    def handle_failure(self, blocked_pipe: str) -> None:
        """The replanning reaction: disconnect the pipe in the belief model,
        keep the most goals a fresh plan can serve, continue or give up."""
        run = self.run
        assert run.status is RunStatus.REPLANNING
        already = blocked_pipe in run.belief.blocked_pipes
        run.belief = BeliefModel(
            graph=run.belief.graph,
            blocked_pipes=run.belief.blocked_pipes | {blocked_pipe},
            limits=run.belief.limits,
        )
        assert self.executor is not None
        self._planning_state = self.executor.planning_state()
        self.events.emit(
            self.sim.robot.clock_s,
            "REPLAN",
            {
                "blocked_pipe": blocked_pipe,
                "blocked_pipes": sorted(run.belief.blocked_pipes),
            },
        )
        if already:
            # second failure inside the same pipe: both escape directions
            # are obstructed, nothing can move
            for tid in sorted(run.goals.pending):
                run.goals.drop(tid, f"blocked:{blocked_pipe}")
            self._terminal(RunStatus.DONE_STRANDED)
            return
        decision = maximize_goals(
            run.belief, self._planning_state, run.goals, self.tasks_by_id
        )
        if decision is None:
            for tid in sorted(run.goals.pending):
                run.goals.drop(tid, f"blocked:{blocked_pipe}")
            self._terminal(RunStatus.DONE_STRANDED)
            return
        self._apply_decision(decision, blocked=blocked_pipe)
        run.status = RunStatus.PLANNING

    # -- terminal handling -------------------------------------------------

    def _terminal(self, status: RunStatus) -> None:
        run = self.run
        run.status = status
        if run.history:
            plan, _ = run.history[-1]
            run.history[-1] = (plan, status.value)
        clock, energy, overrun = self.sim.elapsed_report(self.mission.time_budget_s)
        self.events.emit(
            clock,
            "TERMINAL",
            {
                "status": status.value,
                "goals": run.goals.snapshot(),
                "clock_s": clock,
                "energy_remaining_s": energy,
                "overrun": overrun,
                "replans": max(0, len(run.history) - 1),
            },
        )

    def _classify_completion(self) -> RunStatus:
        run = self.run
        parked = self.executor.parked_at if self.executor else None
        all_done = not run.goals.pending and not run.goals.dropped
        if all_done and run.goals.current_exit == self.mission.exit and parked == self.mission.exit:
            return RunStatus.DONE_COMPLETED
        if run.goals.achieved:
            return RunStatus.DONE_PARTIAL
        return RunStatus.DONE_SAFETY

    # -- stepping ------------------------------------------------------------

    def tick(self) -> RunStatus:
        """Advance one micro-step. Returns the (possibly terminal) status."""
        run = self.run
        if run.status in TERMINAL_STATUSES:
            return run.status
        if run.status in (RunStatus.PLANNING, RunStatus.REPLANNING):
            if run.status is RunStatus.PLANNING:
                self._plan()
            return run.status
        assert self.executor is not None
        outcome = self.executor.tick()
        if outcome is None:
            return run.status
        self._actions_completed = (
            self.executor.action_ordinal_base + self.executor.cursor
        )
        if outcome.kind is RunOutcomeKind.COMPLETED:
            run.history[-1] = (run.history[-1][0], "completed")
            self._terminal(self._classify_completion())
        elif outcome.kind is RunOutcomeKind.REPLAN_NEEDED:
            run.history[-1] = (run.history[-1][0], f"blocked:{outcome.blocked_pipe}")
            run.status = RunStatus.REPLANNING
            assert outcome.blocked_pipe is not None
            self.handle_failure(outcome.blocked_pipe)
        elif outcome.kind is RunOutcomeKind.RECOVERED_AT_SAFETY:
            run.history[-1] = (run.history[-1][0], "recovered-at-safety")
            for tid in sorted(run.goals.pending):
                run.goals.drop(tid, "danger-retreat")
            if outcome.safety_manhole:
                run.goals.current_exit = outcome.safety_manhole
            self._terminal(
                RunStatus.DONE_PARTIAL if run.goals.achieved else RunStatus.DONE_SAFETY
            )
        else:  # STRANDED
            run.history[-1] = (run.history[-1][0], "stranded")
            for tid in sorted(run.goals.pending):
                run.goals.drop(tid, "stranded")
            self._terminal(RunStatus.DONE_STRANDED)
        return run.status

    def run_to_completion(self, max_ticks: int = 1_000_000) -> MissionRun:
        for _ in range(max_ticks):
            if self.tick() in TERMINAL_STATUSES:
                self.events.close()
                return self.run
        raise RuntimeError("mission did not terminate within the tick budget")


def run_mission(
    mission: Mission,
    ground_truth: GroundTruth,
    scenario: Scenario | None = None,
    belief_graph: SewerGraph | None = None,
    events: EventLog | None = None,
    config: SimConfig | None = None,
) -> MissionRun:
    """Plan/execute/replan a mission to its terminal status."""
    controller = MissionController(
        mission,
        ground_truth,
        belief_graph=belief_graph,
        scenario=scenario,
        events=events,
        config=config,
    )
    return controller.run_to_completion()
