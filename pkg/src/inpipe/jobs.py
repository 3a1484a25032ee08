"""Jobs and error codes: the contract between the action executive and the
base machine (here, the simulator standing in for it)."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .planner.model import Place


class JobKind(Enum):
    DRIVE_FORWARD = "DRIVE_FORWARD"
    DRIVE_BACKWARD = "DRIVE_BACKWARD"
    LIFT_HEAD = "LIFT_HEAD"
    LOWER_HEAD = "LOWER_HEAD"
    PUSH = "PUSH"
    SENSE_MANHOLE = "SENSE_MANHOLE"
    SAMPLE = "SAMPLE"
    SCAN = "SCAN"


@dataclass(frozen=True)
class Job:
    """A base-machine operation. Drives carry speed and distance; chamber
    drives also carry the port they exit through (the turn was configured
    by the action's parameters)."""

    kind: JobKind
    speed_cm_s: float = 0.0
    distance_cm: float = 0.0
    pipe: str = ""
    toward: str = ""       # manhole a pipe drive heads for
    manhole: str = ""      # chamber context
    to_port: int = 0       # chamber drive exit port
    backward: bool = False  # chamber drive taken tail-first (retreat)

    def __post_init__(self) -> None:
        if self.distance_cm < 0:
            raise ValueError("job distance must be >= 0")

    def describe(self) -> str:
        bits = [self.kind.value]
        if self.kind in (JobKind.DRIVE_FORWARD, JobKind.DRIVE_BACKWARD, JobKind.PUSH):
            bits.append(f"{self.distance_cm:g}cm@{self.speed_cm_s:g}cm/s")
        if self.pipe:
            bits.append(self.pipe)
        if self.manhole:
            bits.append(self.manhole)
        return " ".join(bits)


class ErrorClass(Enum):
    BLOCKAGE = "BLOCKAGE"
    DANGER = "DANGER"
    MALFUNCTION = "MALFUNCTION"


@dataclass(frozen=True)
class ErrorCode:
    error_class: ErrorClass
    detail: str
    at: Place


@dataclass(frozen=True)
class JobOk:
    duration_s: float

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class JobFailed:
    error: ErrorCode
    duration_s: float

    def __bool__(self) -> bool:
        return False


JobResult = JobOk | JobFailed
