"""Ground-truth world and discrete-event robot model.

The simulator owns the true map and the obstacles in it; the planning stack
above only ever learns about them through job results. Identical inputs
(mission, ground truth, scenario script, seed) replay to identical
trajectories and clocks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum

from .jobs import ErrorClass, ErrorCode, Job, JobFailed, JobKind, JobOk, JobResult
from .planner.model import AtManholePort, InPipe, Place
from .sewer import SewerGraph


class SimulatorError(RuntimeError):
    """A job was dispatched that makes no sense at the robot's place: a
    programming error in the executive, not a mission event."""


class ObstacleKind(Enum):
    LIGHT_WASTE = "LIGHT_WASTE"   # disappears when the robot lifts its head
    PUSHABLE = "PUSHABLE"         # yields to a phase-3 push
    STUCK_RISK = "STUCK_RISK"     # pushing it endangers the robot
    IMMOVABLE = "IMMOVABLE"       # nothing helps; the pipe stays blocked


@dataclass(frozen=True)
class Obstacle:
    kind: ObstacleKind
    position_cm: float  # along the pipe, measured from its first endpoint


@dataclass
class GroundTruth:
    graph: SewerGraph
    obstacles: dict[str, Obstacle] = field(default_factory=dict)
    rng_seed: int = 0

    def check(self) -> None:
        for pid, ob in self.obstacles.items():
            pipe = self.graph.pipes.get(pid)
            if pipe is None:
                raise ValueError(f"obstacle in unknown pipe {pid}")
            if not (0 <= ob.position_cm <= pipe.length_cm):
                raise ValueError(f"obstacle position outside {pid}")


@dataclass(frozen=True)
class SimConfig:
    """All invented timing and recovery constants in one place."""

    sample_s: float = 120.0
    scan_s: float = 60.0
    cross_s: float = 90.0
    lift_head_s: float = 15.0
    reboot_s: float = 30.0
    backup_cm: float = 20.0
    standoff_cm: float = 10.0
    min_lift_diameter_cm: float = 40.0
    allow_push: bool = True


@dataclass
class RobotState:
    place: Place
    heading: str | None          # manhole the head points at; None = dead end
    position_cm: float           # along current pipe from its first endpoint
    head_lifted: bool = False
    clock_s: float = 0.0
    energy_budget_s: float = 7200.0

    def to_json(self) -> dict:
        from .planner.model import place_to_json

        return {
            "place": place_to_json(self.place),
            "heading": self.heading,
            "position_cm": self.position_cm,
            "head_lifted": self.head_lifted,
            "clock_s": self.clock_s,
            "energy_budget_s": self.energy_budget_s,
        }


@dataclass(frozen=True)
class FaultTrigger:
    """When a scripted obstacle materializes."""

    at_start: bool = False
    clock_s: float | None = None
    pipe_entry: tuple[str, int] | None = None  # fires on the Nth entry into pipe


@dataclass
class ScriptedFault:
    trigger: FaultTrigger
    pipe: str
    kind: ObstacleKind
    position_cm: float
    fired: bool = False


@dataclass(frozen=True)
class Scenario:
    """Reproducible fault script: obstacles for the simulator plus
    malfunction injections consumed by the executive."""

    name: str = "unnamed"
    seed: int = 0
    obstacles: tuple[ScriptedFault, ...] = ()
    malfunction_actions: tuple[int, ...] = ()  # 1-based global action ordinals

    @classmethod
    def from_json(cls, doc: str | dict) -> "Scenario":
        if isinstance(doc, str):
            doc = json.loads(doc)
        faults = []
        for ob in doc.get("obstacles", []):
            trig = ob.get("trigger", {"at_start": True})
            trigger = FaultTrigger(
                at_start=bool(trig.get("at_start", False)),
                clock_s=trig.get("clock_s"),
                pipe_entry=(
                    (trig["pipe_entry"]["pipe"], int(trig["pipe_entry"]["count"]))
                    if "pipe_entry" in trig
                    else None
                ),
            )
            faults.append(
                ScriptedFault(
                    trigger=trigger,
                    pipe=ob["pipe"],
                    kind=ObstacleKind(ob["kind"]),
                    position_cm=float(ob["position_cm"]),
                )
            )
        return cls(
            name=doc.get("name", "unnamed"),
            seed=int(doc.get("seed", 0)),
            obstacles=tuple(faults),
            malfunction_actions=tuple(
                int(m["at_action"]) for m in doc.get("malfunctions", [])
            ),
        )

    def to_json(self) -> dict:
        obs = []
        for f in self.obstacles:
            trig: dict = {}
            if f.trigger.at_start:
                trig["at_start"] = True
            if f.trigger.clock_s is not None:
                trig["clock_s"] = f.trigger.clock_s
            if f.trigger.pipe_entry is not None:
                trig["pipe_entry"] = {
                    "pipe": f.trigger.pipe_entry[0],
                    "count": f.trigger.pipe_entry[1],
                }
            obs.append(
                {
                    "pipe": f.pipe,
                    "kind": f.kind.value,
                    "position_cm": f.position_cm,
                    "trigger": trig or {"at_start": True},
                }
            )
        return {
            "name": self.name,
            "seed": self.seed,
            "obstacles": obs,
            "malfunctions": [{"at_action": a} for a in self.malfunction_actions],
        }


def entry_robot_state(
    g: SewerGraph, entry_pipe: str, towards: str, energy_budget_s: float
) -> RobotState:
    """The robot as lowered into the entry pipe, facing the entry heading.

    It starts at the end away from the heading manhole (that is where the
    crew lowered it in), so the first drive covers the whole pipe.
    """
    pipe = g.pipes[entry_pipe]
    ends = {e[0]: e for e in pipe.endpoints}
    if towards not in ends:
        raise ValueError(f"pipe {entry_pipe} does not end at {towards}")
    towards_pos = 0.0 if pipe.endpoints[0][0] == towards else pipe.length_cm
    start_pos = pipe.length_cm - towards_pos
    return RobotState(
        place=InPipe(entry_pipe, towards),
        heading=towards,
        position_cm=start_pos,
        energy_budget_s=energy_budget_s,
    )


class Simulator:
    """Single-owner state machine: one robot, one world, one clock."""

    def __init__(
        self,
        ground_truth: GroundTruth,
        robot: RobotState,
        config: SimConfig | None = None,
        scenario: Scenario | None = None,
    ):
        ground_truth.check()
        self.gt = ground_truth
        self.robot = robot
        self.config = config or SimConfig()
        self._script: list[ScriptedFault] = list(scenario.obstacles) if scenario else []
        self._pipe_entries: dict[str, int] = {}
        if isinstance(robot.place, InPipe):
            self._pipe_entries[robot.place.pipe] = 1
        self._fire_triggers()

    # -- fault handling ------------------------------------------------

    def inject_fault(self, pipe: str, kind: ObstacleKind, position_cm: float) -> None:
        if pipe not in self.gt.graph.pipes:
            raise ValueError(f"unknown pipe {pipe}")
        if not (0 <= position_cm <= self.gt.graph.pipes[pipe].length_cm):
            raise ValueError(f"position {position_cm} outside pipe {pipe}")
        self.gt.obstacles[pipe] = Obstacle(kind, position_cm)

    def _fire_triggers(self) -> None:
        for f in self._script:
            if f.fired:
                continue
            t = f.trigger
            due = (
                t.at_start
                or (t.clock_s is not None and self.robot.clock_s >= t.clock_s)
                or (
                    t.pipe_entry is not None
                    and self._pipe_entries.get(t.pipe_entry[0], 0) >= t.pipe_entry[1]
                )
            )
            if due:
                f.fired = True
                self.inject_fault(f.pipe, f.kind, f.position_cm)

    def _note_pipe_entry(self, pipe: str) -> None:
        self._pipe_entries[pipe] = self._pipe_entries.get(pipe, 0) + 1

    # -- time ------------------------------------------------------------

    def _spend(self, seconds: float) -> None:
        self.robot.clock_s += seconds
        self.robot.energy_budget_s = max(0.0, self.robot.energy_budget_s - seconds)

    def spend(self, seconds: float) -> None:
        """Account time for maneuvers outside regular jobs (e.g. a reboot)."""
        self._spend(seconds)

    def elapsed_report(self, time_budget_s: float) -> tuple[float, float, bool]:
        """(clock, energy remaining, overrun). Reporting only — the robot is
        never halted on overrun."""
        return (
            self.robot.clock_s,
            self.robot.energy_budget_s,
            self.robot.clock_s > time_budget_s,
        )

    # -- geometry helpers --------------------------------------------------

    def _pipe_frame(self, pipe_id: str, toward: str) -> tuple[float, int]:
        """(target position, direction sign) for driving toward a manhole
        (or the dead end when toward is '')."""
        pipe = self.gt.graph.pipes[pipe_id]
        if toward == "":
            return pipe.length_cm, 1
        for i, (mid, _) in enumerate(pipe.endpoints):
            if mid == toward:
                return (0.0, -1) if i == 0 else (pipe.length_cm, 1)
        raise SimulatorError(f"pipe {pipe_id} does not end at {toward}")

    def _obstacle_ahead(
        self, pipe_id: str, pos: float, target: float
    ) -> tuple[Obstacle, float] | None:
        ob = self.gt.obstacles.get(pipe_id)
        if ob is None:
            return None
        lo, hi = sorted((pos, target))
        if lo - 1e-9 <= ob.position_cm <= hi + 1e-9 and ob.position_cm != pos:
            return ob, ob.position_cm
        return None

    # -- job execution ----------------------------------------------------

    def run_job(self, job: Job) -> JobResult:
        self._fire_triggers()
        handler = {
            JobKind.DRIVE_FORWARD: self._job_drive,
            JobKind.DRIVE_BACKWARD: self._job_backward,
            JobKind.SENSE_MANHOLE: self._job_sense,
            JobKind.LIFT_HEAD: self._job_lift,
            JobKind.LOWER_HEAD: self._job_lower,
            JobKind.PUSH: self._job_push,
            JobKind.SAMPLE: self._job_sample,
            JobKind.SCAN: self._job_scan,
        }[job.kind]
        result = handler(job)
        self._fire_triggers()
        return result

    def _blockage(self, detail: str, duration: float) -> JobFailed:
        return JobFailed(
            ErrorCode(ErrorClass.BLOCKAGE, detail, self.robot.place), duration
        )

    def _job_drive(self, job: Job) -> JobResult:
        r = self.robot
        if job.manhole:
            return self._chamber_drive(job)
        if not isinstance(r.place, InPipe) or (job.pipe and r.place.pipe != job.pipe):
            # stepping out of a mouth into the pipe proper
            if isinstance(r.place, AtManholePort):
                port = self.gt.graph.manholes[r.place.manhole].port(r.place.port)
                if job.pipe and port.pipe != job.pipe:
                    raise SimulatorError(
                        f"drive {job.pipe} dispatched at {r.place.manhole} port "
                        f"{r.place.port} which carries {port.pipe}"
                    )
                pipe = self.gt.graph.pipes[port.pipe]
                at_first = pipe.endpoints[0] == (r.place.manhole, r.place.port)
                r.place = InPipe(port.pipe, job.toward or None)
                r.position_cm = 0.0 if at_first else pipe.length_cm
                self._note_pipe_entry(port.pipe)
            else:
                raise SimulatorError(f"drive dispatched while at {r.place}")
        pid = r.place.pipe if isinstance(r.place, InPipe) else job.pipe
        target, _sign = self._pipe_frame(pid, job.toward)
        r.place = InPipe(pid, job.toward or None)
        r.heading = job.toward or None
        hit = self._obstacle_ahead(pid, r.position_cm, target)
        if hit is not None:
            ob, ob_pos = hit
            stop = ob_pos - self.config.standoff_cm if ob_pos >= r.position_cm else ob_pos + self.config.standoff_cm
            stop = min(max(stop, 0.0), self.gt.graph.pipes[pid].length_cm)
            dist = abs(stop - r.position_cm)
            dur = dist / job.speed_cm_s if job.speed_cm_s else 0.0
            r.position_cm = stop
            self._spend(dur)
            return self._blockage(
                f"obstacle in {pid} at {ob_pos:g} cm", dur
            )
        dist = abs(target - r.position_cm)
        dur = dist / job.speed_cm_s if job.speed_cm_s else 0.0
        r.position_cm = target
        self._spend(dur)
        return JobOk(dur)

    def _chamber_drive(self, job: Job) -> JobResult:
        r = self.robot
        if not isinstance(r.place, AtManholePort) or r.place.manhole != job.manhole:
            raise SimulatorError(f"chamber drive at {job.manhole} dispatched at {r.place}")
        m = self.gt.graph.manholes[job.manhole]
        to_pipe = m.port(job.to_port).pipe
        pipe = self.gt.graph.pipes[to_pipe]
        mouth = 0.0 if pipe.endpoints[0][0] == job.manhole else pipe.length_cm
        ob = self.gt.obstacles.get(to_pipe)
        dur = self.config.cross_s
        if ob is not None and abs(ob.position_cm - mouth) <= self.config.standoff_cm:
            self._spend(dur)
            return self._blockage(
                f"obstacle at the mouth of {to_pipe}", dur
            )
        far = pipe.other_end(job.manhole)
        facing = job.manhole if job.backward else (far[0] if far else None)
        r.place = InPipe(to_pipe, facing)
        r.heading = facing
        r.position_cm = mouth
        self._note_pipe_entry(to_pipe)
        self._spend(dur)
        return JobOk(dur)

    def _job_backward(self, job: Job) -> JobResult:
        r = self.robot
        if not isinstance(r.place, InPipe):
            raise SimulatorError(f"backward drive dispatched at {r.place}")
        pid = r.place.pipe
        pipe = self.gt.graph.pipes[pid]
        target_fwd, _ = self._pipe_frame(pid, r.place.facing or "")
        back_target = pipe.length_cm - target_fwd  # the end behind the robot
        if back_target > r.position_cm:
            stop = min(r.position_cm + job.distance_cm, back_target)
        elif back_target < r.position_cm:
            stop = max(r.position_cm - job.distance_cm, back_target)
        else:
            stop = r.position_cm
        hit = self._obstacle_ahead(pid, r.position_cm, stop)
        if hit is not None:
            ob, ob_pos = hit
            edge = (
                ob_pos + self.config.standoff_cm
                if ob_pos < r.position_cm
                else ob_pos - self.config.standoff_cm
            )
            stop = min(max(edge, 0.0), pipe.length_cm)
        dist = abs(stop - r.position_cm)
        dur = dist / job.speed_cm_s if job.speed_cm_s else 0.0
        r.position_cm = stop
        self._spend(dur)
        if hit is not None:
            return self._blockage(f"obstacle behind in {pid}", dur)
        return JobOk(dur)

    def _job_sense(self, job: Job) -> JobResult:
        r = self.robot
        if not isinstance(r.place, InPipe):
            raise SimulatorError(f"SENSE_MANHOLE dispatched at {r.place}")
        pipe = self.gt.graph.pipes[r.place.pipe]
        for i, (mid, idx) in enumerate(pipe.endpoints):
            end_pos = 0.0 if i == 0 else pipe.length_cm
            if mid == job.manhole and abs(r.position_cm - end_pos) < 1e-6:
                r.place = AtManholePort(mid, idx)
                r.heading = mid
                return JobOk(0.0)
        return JobFailed(
            ErrorCode(
                ErrorClass.MALFUNCTION,
                f"expected manhole {job.manhole} not detected",
                r.place,
            ),
            0.0,
        )

    def _job_lift(self, job: Job) -> JobResult:
        r = self.robot
        self._spend(self.config.lift_head_s)
        r.head_lifted = True
        if isinstance(r.place, InPipe):
            ob = self.gt.obstacles.get(r.place.pipe)
            if ob is not None and ob.kind is ObstacleKind.LIGHT_WASTE:
                del self.gt.obstacles[r.place.pipe]
        return JobOk(self.config.lift_head_s)

    def _job_lower(self, job: Job) -> JobResult:
        self.robot.head_lifted = False
        self._spend(self.config.lift_head_s)
        return JobOk(self.config.lift_head_s)

    def _job_push(self, job: Job) -> JobResult:
        r = self.robot
        if not isinstance(r.place, InPipe):
            raise SimulatorError(f"PUSH dispatched at {r.place}")
        pid = r.place.pipe
        pipe = self.gt.graph.pipes[pid]
        dur = (
            job.distance_cm / job.speed_cm_s if job.speed_cm_s else 0.0
        )
        ob = self.gt.obstacles.get(pid)
        self._spend(dur)
        if ob is None:
            return JobOk(dur)
        if ob.kind is ObstacleKind.PUSHABLE:
            del self.gt.obstacles[pid]
            return JobOk(dur)
        if ob.kind is ObstacleKind.STUCK_RISK:
            return JobFailed(
                ErrorCode(
                    ErrorClass.DANGER,
                    f"obstacle in {pid} shifted and may jam between segments",
                    r.place,
                ),
                dur,
            )
        return self._blockage(f"obstacle in {pid} does not yield", dur)

    def _job_sample(self, job: Job) -> JobResult:
        if not isinstance(self.robot.place, InPipe):
            raise SimulatorError(f"SAMPLE dispatched at {self.robot.place}")
        self._spend(self.config.sample_s)
        return JobOk(self.config.sample_s)

    def _job_scan(self, job: Job) -> JobResult:
        self._spend(self.config.scan_s)
        return JobOk(self.config.scan_s)
