"""The action executive: runs grounded actions as job sequences against the
simulator, classifies failures, and drives the three-phase blockage
recovery, the danger retreat, and the reboot-on-malfunction scheme.

One plan at a time. The replanning loop above decides what happens when
this layer gives up on a pipe.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum

from .events import EventLog
from .fusion import ActionKind, GroundedAction
from .jobs import ErrorClass, ErrorCode, Job, JobFailed, JobKind, JobResult
from .mission import GoalSet, Task, TaskKind
from .planner.model import AtManholePort, BeliefModel, InPipe, PlanningState
from .simulator import SimConfig, Simulator


class RecoveryState(Enum):
    EXECUTING = "EXECUTING"
    PHASE1_BACKUP_RETRY = "PHASE1_BACKUP_RETRY"
    PHASE2_LIFT_HEAD = "PHASE2_LIFT_HEAD"
    PHASE3_PUSH = "PHASE3_PUSH"
    RETREAT = "RETREAT"
    REBOOTING = "REBOOTING"
    RESUMED = "RESUMED"
    RECOVERED_AT_SAFETY = "RECOVERED_AT_SAFETY"
    STRANDED = "STRANDED"


_PHASES = (
    RecoveryState.PHASE1_BACKUP_RETRY,
    RecoveryState.PHASE2_LIFT_HEAD,
    RecoveryState.PHASE3_PUSH,
)

_LEGAL = {
    (RecoveryState.EXECUTING, "BLOCKAGE"): RecoveryState.PHASE1_BACKUP_RETRY,
    (RecoveryState.PHASE1_BACKUP_RETRY, "OK"): RecoveryState.RESUMED,
    (RecoveryState.PHASE1_BACKUP_RETRY, "BLOCKAGE"): RecoveryState.PHASE2_LIFT_HEAD,
    (RecoveryState.PHASE2_LIFT_HEAD, "OK"): RecoveryState.RESUMED,
    (RecoveryState.PHASE2_LIFT_HEAD, "BLOCKAGE"): RecoveryState.PHASE3_PUSH,
    (RecoveryState.PHASE3_PUSH, "OK"): RecoveryState.RESUMED,
    (RecoveryState.PHASE3_PUSH, "BLOCKAGE"): RecoveryState.RETREAT,
    (RecoveryState.EXECUTING, "MALFUNCTION"): RecoveryState.REBOOTING,
    (RecoveryState.REBOOTING, "OK"): RecoveryState.RESUMED,
    (RecoveryState.REBOOTING, "MALFUNCTION"): RecoveryState.RETREAT,
    (RecoveryState.RESUMED, "OK"): RecoveryState.EXECUTING,
    (RecoveryState.RETREAT, "OK"): RecoveryState.RECOVERED_AT_SAFETY,
    (RecoveryState.RETREAT, "BLOCKAGE"): RecoveryState.STRANDED,
}


def recovery_step(state: RecoveryState, result: str) -> RecoveryState:
    """Pure transition table. result is "OK", "BLOCKAGE", "DANGER" or
    "MALFUNCTION". DANGER forces a retreat from any live state."""
    if state in (RecoveryState.RECOVERED_AT_SAFETY, RecoveryState.STRANDED):
        raise AssertionError(f"no transitions out of terminal state {state}")
    if result == "DANGER":
        return RecoveryState.RETREAT
    nxt = _LEGAL.get((state, result))
    if nxt is None:
        raise AssertionError(f"illegal recovery transition ({state}, {result})")
    return nxt


def expand(action: GroundedAction) -> list[Job]:
    """Deterministic action -> job expansion."""
    if action.kind is ActionKind.DRIVE_TO_MANHOLE:
        return [
            Job(
                JobKind.DRIVE_FORWARD,
                speed_cm_s=action.speed_cm_s,
                distance_cm=action.distance_cm,
                pipe=action.pipe,
                toward=action.direction,
            ),
            Job(JobKind.SENSE_MANHOLE, manhole=action.direction),
        ]
    if action.kind is ActionKind.CROSS_MANHOLE:
        return [
            Job(
                JobKind.DRIVE_FORWARD,
                manhole=action.manhole,
                to_port=action.to_port,
            )
        ]
    if action.kind is ActionKind.TAKE_WATER_SAMPLE:
        return [Job(JobKind.SAMPLE, pipe=action.pipe)]
    return [Job(JobKind.SCAN, pipe=action.pipe)]


class RunOutcomeKind(Enum):
    COMPLETED = "COMPLETED"
    REPLAN_NEEDED = "REPLAN_NEEDED"
    RECOVERED_AT_SAFETY = "RECOVERED_AT_SAFETY"
    STRANDED = "STRANDED"


@dataclass(frozen=True)
class RunOutcome:
    kind: RunOutcomeKind
    blocked_pipe: str | None = None
    safety_manhole: str | None = None


class CheckpointError(RuntimeError):
    """Checkpoint does not belong to this mission or is corrupt."""


CHECKPOINT_SCHEMA = "inpipe-checkpoint@1"


def _graph_fingerprint(belief: BeliefModel) -> str:
    from .sewer import serialize_kis

    return hashlib.sha256(serialize_kis(belief.graph).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Checkpoint:
    """Snapshot written after every completed action: enough to rebuild the
    executive exactly (the map itself is supplied at restore time)."""

    doc: dict

    def to_json(self) -> str:
        return json.dumps(self.doc, sort_keys=True, ensure_ascii=True, indent=1) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Checkpoint":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise CheckpointError(f"checkpoint is not valid JSON: {e}") from None
        if doc.get("schema") != CHECKPOINT_SCHEMA:
            raise CheckpointError(f"unsupported checkpoint schema {doc.get('schema')!r}")
        return cls(doc)


@dataclass
class Breadcrumb:
    """How the robot entered a pipe, for backing out along its route."""

    pipe: str
    entered_from: str  # manhole at the entry end; '' if lowered at a dead end
    via_cross: tuple[str, int, int] | None  # (manhole, from_port, to_port)


class ActionExecutor:
    """Executes one grounded plan. tick() advances one micro-step and
    returns a RunOutcome once the plan is over (one way or another)."""

    def __init__(
        self,
        sim: Simulator,
        belief: BeliefModel,
        goals: GoalSet,
        tasks_by_id: dict[str, Task],
        actions: list[GroundedAction],
        events: EventLog,
        config: SimConfig | None = None,
        action_ordinal_base: int = 0,
        malfunction_actions: frozenset[int] = frozenset(),
        trail: list[Breadcrumb] | None = None,
        parked_at: str | None = None,
    ):
        self.sim = sim
        self.belief = belief
        self.goals = goals
        self.tasks_by_id = tasks_by_id
        self.actions = actions
        self.events = events
        self.config = config or SimConfig()
        self.cursor = 0
        self.job_queue: list[Job] = []
        self.recovery = RecoveryState.EXECUTING
        self.retry_job: Job | None = None
        self.failed_pipe: str | None = None
        self.outcome: RunOutcome | None = None
        self.action_ordinal_base = action_ordinal_base
        self.malfunction_actions = set(malfunction_actions)
        self._malfunctions_fired: set[int] = set()
        self._reboots: dict[int, int] = {}
        self.trail: list[Breadcrumb] = trail if trail is not None else []
        self.parked_at = parked_at
        self.checkpoints: list[Checkpoint] = []
        self._check_goto_tasks()  # the starting place may already satisfy one
        self._write_checkpoint()

    # -- events --------------------------------------------------------

    def _emit(self, kind: str, **payload) -> None:
        self.events.emit(self.sim.robot.clock_s, kind, payload)

    def _transition(self, to_state: RecoveryState, **payload) -> None:
        self.recovery = to_state
        self._emit("RECOVERY_TRANSITION", state=to_state.value, **payload)

    def _run_job(self, job: Job, label: str = "") -> JobResult:
        result = self.sim.run_job(job)
        self._emit(
            "JOB_RESULT",
            job=(label + " " if label else "") + job.describe(),
            ok=bool(result),
            duration_s=result.duration_s,
            **({} if result else {"error": result.error.detail}),
        )
        return result

    # -- goal bookkeeping ------------------------------------------------

    def planning_state(self) -> PlanningState:
        sampled = frozenset(
            self.tasks_by_id[t].target
            for t in self.goals.achieved
            if self.tasks_by_id[t].kind is TaskKind.WATER_SAMPLE
        )
        inspected = frozenset(
            self.tasks_by_id[t].target
            for t in self.goals.achieved
            if self.tasks_by_id[t].kind is TaskKind.INSPECT
        )
        return PlanningState(
            at=self.sim.robot.place,
            sampled=sampled,
            inspected=inspected,
            parked=self.parked_at,
        )

    def _mark(self, task_id: str) -> None:
        if task_id and task_id in self.goals.pending:
            self.goals.mark_achieved(task_id)
            self._emit("GOAL_UPDATE", achieved=task_id, goals=self.goals.snapshot())

    def _check_goto_tasks(self) -> None:
        place = self.sim.robot.place
        for tid in sorted(self.goals.pending):
            t = self.tasks_by_id[tid]
            if t.kind is not TaskKind.GOTO:
                continue
            hit = False
            if t.target.startswith("P"):
                if isinstance(place, InPipe) and place.pipe == t.target:
                    hit = True
                elif isinstance(place, AtManholePort):
                    port = self.belief.graph.manholes[place.manhole].port(place.port)
                    hit = port.pipe == t.target
            else:
                if isinstance(place, AtManholePort) and place.manhole == t.target:
                    hit = True
                if self.parked_at == t.target:
                    hit = True
            if hit:
                self._mark(tid)

    # -- checkpointing -----------------------------------------------------

    def _write_checkpoint(self) -> None:
        doc = {
            "schema": CHECKPOINT_SCHEMA,
            "graph_fingerprint": _graph_fingerprint(self.belief),
            "clock_s": self.sim.robot.clock_s,
            "robot": self.sim.robot.to_json(),
            "goals": self.goals.snapshot(),
            "belief": {"blocked_pipes": sorted(self.belief.blocked_pipes)},
            "planning_state": self.planning_state().to_json(),
            "remaining_actions": [a.to_json() for a in self.actions[self.cursor :]],
            "action_ordinal_base": self.action_ordinal_base + self.cursor,
            "trail": [
                {
                    "pipe": b.pipe,
                    "entered_from": b.entered_from,
                    "via_cross": list(b.via_cross) if b.via_cross else None,
                }
                for b in self.trail
            ],
        }
        self.checkpoints.append(Checkpoint(doc))

    def restore_from_checkpoint(self, cp: Checkpoint) -> None:
        """Reset executive bookkeeping to the snapshot. The physical robot is
        wherever it is; re-dispatched jobs cope with that."""
        doc = cp.doc
        if doc.get("graph_fingerprint") != _graph_fingerprint(self.belief):
            raise CheckpointError("checkpoint does not match the mission map")
        restored = GoalSet.from_snapshot(doc["goals"])
        self.goals.pending = restored.pending
        self.goals.achieved = restored.achieved
        self.goals.dropped = restored.dropped
        self.goals.current_exit = restored.current_exit
        self.actions = [GroundedAction.from_json(a) for a in doc["remaining_actions"]]
        self.cursor = 0
        self.action_ordinal_base = doc["action_ordinal_base"]
        self.job_queue = []
        self.retry_job = None
        self.parked_at = doc["planning_state"].get("parked")
        self.trail = [
            Breadcrumb(
                b["pipe"],
                b["entered_from"],
                tuple(b["via_cross"]) if b["via_cross"] else None,
            )
            for b in doc["trail"]
        ]

    # -- the step machine ---------------------------------------------------

    def tick(self) -> RunOutcome | None:
        if self.outcome is not None:
            return self.outcome
        if self.recovery is RecoveryState.EXECUTING:
            self._tick_executing()
        elif self.recovery in _PHASES:
            self._tick_phase()
        elif self.recovery is RecoveryState.REBOOTING:
            self._tick_reboot()
        elif self.recovery is RecoveryState.RETREAT:
            self._tick_retreat()
        else:  # RESUMED: bookkeeping state, fall back into execution
            self.recovery = recovery_step(self.recovery, "OK")
        return self.outcome

    def run_to_outcome(self) -> RunOutcome:
        while True:
            out = self.tick()
            if out is not None:
                return out

    def _current_action(self) -> GroundedAction:
        return self.actions[self.cursor]

    def _current_ordinal(self) -> int:
        return self.action_ordinal_base + self.cursor + 1  # 1-based, global

    def _tick_executing(self) -> None:
        if not self.job_queue:
            if self.cursor >= len(self.actions):
                self.outcome = RunOutcome(RunOutcomeKind.COMPLETED)
                return
            action = self._current_action()
            self._emit(
                "ACTION_START",
                ordinal=self._current_ordinal(),
                action=action.to_json(),
            )
            if (
                action.kind is ActionKind.DRIVE_TO_MANHOLE
                and isinstance(self.sim.robot.place, AtManholePort)
            ):
                # re-entering the pipe whose mouth we stand in
                self.trail.append(
                    Breadcrumb(action.pipe, self.sim.robot.place.manhole, None)
                )
            self.job_queue = expand(action)
            return
        job = self.job_queue[0]
        ordinal = self._current_ordinal()
        if (
            ordinal in self.malfunction_actions
            and ordinal not in self._malfunctions_fired
        ):
            self._malfunctions_fired.add(ordinal)
            err = ErrorCode(
                ErrorClass.MALFUNCTION, "injected transient fault", self.sim.robot.place
            )
            self._emit("JOB_RESULT", job=job.describe(), ok=False, error=err.detail)
            self._handle_error(err, job)
            return
        result = self._run_job(job)
        if result:
            self.job_queue.pop(0)
            if not self.job_queue:
                self._action_completed()
        else:
            self._handle_error(result.error, job)

    def _action_completed(self) -> None:
        action = self._current_action()
        if action.kind is ActionKind.CROSS_MANHOLE:
            self.parked_at = action.manhole
            m = self.belief.graph.manholes[action.manhole]
            self.trail.append(
                Breadcrumb(
                    pipe=m.port(action.to_port).pipe,
                    entered_from=action.manhole,
                    via_cross=(action.manhole, action.from_port, action.to_port),
                )
            )
        elif action.kind is ActionKind.DRIVE_TO_MANHOLE:
            self.parked_at = None
        else:
            # one sample/scan of a pipe satisfies every pending request on it
            want = (
                TaskKind.WATER_SAMPLE
                if action.kind is ActionKind.TAKE_WATER_SAMPLE
                else TaskKind.INSPECT
            )
            for tid in sorted(self.goals.pending):
                t = self.tasks_by_id[tid]
                if t.kind is want and t.target == action.pipe:
                    self._mark(tid)
        self._check_goto_tasks()
        self.cursor += 1
        self._write_checkpoint()

    def _handle_error(self, err: ErrorCode, job: Job) -> None:
        self._emit(
            "ERROR",
            error_class=err.error_class.value,
            detail=err.detail,
            ordinal=self._current_ordinal(),
        )
        if err.error_class is ErrorClass.BLOCKAGE:
            self.retry_job = job
            self.failed_pipe = self._blocked_pipe_for(job)
            self._transition(
                recovery_step(self.recovery, "BLOCKAGE"), pipe=self.failed_pipe
            )
        elif err.error_class is ErrorClass.DANGER:
            self._transition(recovery_step(self.recovery, "DANGER"), reason=err.detail)
        else:
            ordinal = self._current_ordinal()
            if self._reboots.get(ordinal, 0) >= 1:
                # the fault was not temporary after all
                self._transition(
                    recovery_step(RecoveryState.REBOOTING, "MALFUNCTION"),
                    reason=err.detail,
                )
            else:
                self.retry_job = job
                self._transition(recovery_step(self.recovery, "MALFUNCTION"))

    def _blocked_pipe_for(self, job: Job) -> str:
        if job.manhole:  # chamber drive: the blockage sits in the destination pipe
            return self.belief.graph.manholes[job.manhole].port(job.to_port).pipe
        place = self.sim.robot.place
        if isinstance(place, InPipe):
            return place.pipe
        return job.pipe

    # -- recovery phases ------------------------------------------------

    def _retry(self) -> bool | None:
        """Re-run the failed job once. True on success, False on blockage,
        None when the retry escalated to a retreat."""
        assert self.retry_job is not None
        result = self._run_job(self.retry_job, label="retry")
        if result:
            self.job_queue.pop(0)
            self.retry_job = None
            return True
        if (
            isinstance(result, JobFailed)
            and result.error.error_class is ErrorClass.DANGER
        ):
            self._transition(RecoveryState.RETREAT, reason=result.error.detail)
            return None
        return False

    def _resume(self) -> None:
        self._transition(RecoveryState.RESUMED)
        self.recovery = RecoveryState.EXECUTING
        if not self.job_queue:
            self._action_completed()

    def _tick_phase(self) -> None:
        if self.recovery is RecoveryState.PHASE1_BACKUP_RETRY:
            if isinstance(self.sim.robot.place, InPipe):
                self._run_job(
                    Job(
                        JobKind.DRIVE_BACKWARD,
                        speed_cm_s=self.belief.limits.cruise_speed_cm_s,
                        distance_cm=self.config.backup_cm,
                    ),
                    label="backup",
                )
            ok = self._retry()
            if ok:
                self._resume()
            elif ok is False:
                self._transition(recovery_step(self.recovery, "BLOCKAGE"))
        elif self.recovery is RecoveryState.PHASE2_LIFT_HEAD:
            place = self.sim.robot.place
            can_lift = (
                not isinstance(place, InPipe)
                or self.belief.graph.pipes[place.pipe].diameter_cm
                >= self.config.min_lift_diameter_cm
            )
            ok: bool | None = False
            if can_lift:
                self._run_job(Job(JobKind.LIFT_HEAD))
                ok = self._retry()
                self._run_job(Job(JobKind.LOWER_HEAD))
            if ok:
                self._resume()
            elif ok is False:
                self._transition(
                    recovery_step(self.recovery, "BLOCKAGE"), lift_possible=can_lift
                )
        else:  # PHASE3_PUSH
            place = self.sim.robot.place
            can_push = self.config.allow_push and isinstance(place, InPipe)
            pushed = False
            if can_push:
                pipe = self.belief.graph.pipes[place.pipe]
                result = self._run_job(
                    Job(
                        JobKind.PUSH,
                        speed_cm_s=self.belief.limits.cruise_speed_cm_s / 2,
                        distance_cm=pipe.diameter_cm,
                    )
                )
                if isinstance(result, JobFailed):
                    if result.error.error_class is ErrorClass.DANGER:
                        self._transition(
                            RecoveryState.RETREAT, reason=result.error.detail
                        )
                        return
                else:
                    pushed = True
            if pushed:
                ok = self._retry()
                if ok:
                    self._resume()
                    return
                if ok is None:
                    return
            # persistent blockage: back off the obstacle, then let the
            # replanner work around the pipe
            self._transition(
                recovery_step(self.recovery, "BLOCKAGE"), persistent=True
            )
            if isinstance(self.sim.robot.place, InPipe):
                self._run_job(
                    Job(
                        JobKind.DRIVE_BACKWARD,
                        speed_cm_s=self.belief.limits.cruise_speed_cm_s,
                        distance_cm=self.config.backup_cm,
                    ),
                    label="standoff",
                )
            self.outcome = RunOutcome(
                RunOutcomeKind.REPLAN_NEEDED, blocked_pipe=self.failed_pipe
            )

    def _tick_reboot(self) -> None:
        ordinal = self._current_ordinal()
        self.sim.spend(self.config.reboot_s)
        self._reboots[ordinal] = self._reboots.get(ordinal, 0) + 1
        try:
            self.restore_from_checkpoint(self.checkpoints[-1])
        except CheckpointError as e:
            self._emit("ERROR", error_class="MALFUNCTION", detail=str(e), ordinal=ordinal)
            self._transition(RecoveryState.STRANDED)
            self.outcome = RunOutcome(RunOutcomeKind.STRANDED)
            return
        self._transition(recovery_step(RecoveryState.REBOOTING, "OK"), rebooted=True)
        self.recovery = RecoveryState.EXECUTING

    # -- retreat ----------------------------------------------------------

    def _tick_retreat(self) -> None:
        """Back out along the travelled route to the nearest recoverable
        manhole. Runs the whole maneuver in one tick; it either ends
        recovered or stranded."""
        sim = self.sim
        g = self.belief.graph
        while True:
            place = sim.robot.place
            if isinstance(place, AtManholePort):
                if g.manholes[place.manhole].recoverable:
                    self._transition(
                        recovery_step(RecoveryState.RETREAT, "OK"),
                        manhole=place.manhole,
                    )
                    self.outcome = RunOutcome(
                        RunOutcomeKind.RECOVERED_AT_SAFETY,
                        safety_manhole=place.manhole,
                    )
                    return
                pipe_here = g.manholes[place.manhole].port(place.port).pipe
                crumb = self.trail[-1] if self.trail else None
                if crumb is None or crumb.pipe != pipe_here:
                    break
                if crumb.entered_from == place.manhole:
                    if crumb.via_cross is None:
                        break  # lowered in here; no history beyond
                    self.trail.pop()
                    mh, from_port, _to_port = crumb.via_cross
                    result = self._run_job(
                        Job(
                            JobKind.DRIVE_FORWARD,
                            manhole=mh,
                            to_port=from_port,
                            backward=True,
                        ),
                        label="retreat-cross",
                    )
                    if isinstance(result, JobFailed):
                        break
                    continue
                # arrived here driving forward: back into the pipe and
                # retreat towards the end it was entered from
                sim.robot.place = InPipe(pipe_here, place.manhole)
                continue
            assert isinstance(place, InPipe)
            pipe = g.pipes[place.pipe]
            crumb = self.trail[-1] if self.trail else None
            back_to = (
                crumb.entered_from
                if crumb is not None and crumb.pipe == place.pipe
                else ""
            )
            if not back_to:
                break
            target_pos = (
                0.0 if pipe.endpoints[0][0] == back_to else pipe.length_cm
            )
            result = self._run_job(
                Job(
                    JobKind.DRIVE_BACKWARD,
                    speed_cm_s=self.belief.limits.cruise_speed_cm_s,
                    distance_cm=abs(sim.robot.position_cm - target_pos),
                ),
                label="retreat",
            )
            if isinstance(result, JobFailed):
                break
            sense = self._run_job(
                Job(JobKind.SENSE_MANHOLE, manhole=back_to), label="retreat"
            )
            if isinstance(sense, JobFailed):
                break
        self._transition(recovery_step(RecoveryState.RETREAT, "BLOCKAGE"))
        self.outcome = RunOutcome(RunOutcomeKind.STRANDED)


def execute(
    actions: list[GroundedAction],
    sim: Simulator,
    goals: GoalSet,
    belief: BeliefModel,
    tasks_by_id: dict[str, Task],
    events: EventLog | None = None,
    config: SimConfig | None = None,
    trail: list[Breadcrumb] | None = None,
) -> RunOutcome:
    """Run one grounded plan to its outcome (convenience wrapper)."""
    ex = ActionExecutor(
        sim,
        belief,
        goals,
        tasks_by_id,
        actions,
        events or EventLog(),
        config=config,
        trail=trail,
    )
    return ex.run_to_outcome()
