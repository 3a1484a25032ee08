"""Planner-side world types: places, the belief model, and planning state.

The belief model is the robot's copy of the map. It diverges from reality
when pipes turn out to be blocked; route search only ever sees the belief.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..sewer import KinematicLimits, SewerGraph


@dataclass(frozen=True)
class InPipe:
    """Robot somewhere inside a pipe. facing is the manhole its head points
    at, or None when it points at a dead end."""

    pipe: str
    facing: str | None = None


@dataclass(frozen=True)
class AtManholePort:
    """Robot at a manhole's chamber entrance, in the mouth of the pipe
    carried by the given port."""

    manhole: str
    port: int


Place = InPipe | AtManholePort


def place_to_json(p: Place) -> dict:
    if isinstance(p, InPipe):
        return {"in_pipe": p.pipe, "facing": p.facing}
    return {"at_manhole": p.manhole, "port": p.port}


def place_from_json(doc: dict) -> Place:
    if "in_pipe" in doc:
        return InPipe(doc["in_pipe"], doc.get("facing"))
    return AtManholePort(doc["at_manhole"], doc["port"])


@dataclass(frozen=True)
class BeliefModel:
    graph: SewerGraph
    blocked_pipes: frozenset[str] = frozenset()
    limits: KinematicLimits = field(default_factory=KinematicLimits)

    def __post_init__(self) -> None:
        unknown = self.blocked_pipes - set(self.graph.pipes)
        if unknown:
            raise ValueError(f"blocked pipes not in graph: {sorted(unknown)}")

    def block(self, pipe_id: str) -> "BeliefModel":
        if pipe_id not in self.graph.pipes:
            raise ValueError(f"unknown pipe {pipe_id}")
        return replace(self, blocked_pipes=self.blocked_pipes | {pipe_id})


@dataclass(frozen=True)
class PlanningState:
    """What route search starts from: where the robot is, which task facts
    already hold, and — when it has just driven through a chamber — which
    manhole it is straddling (that is the posture recovery cranes need)."""

    at: Place
    sampled: frozenset[str] = frozenset()
    inspected: frozenset[str] = frozenset()
    parked: str | None = None

    def check(self, g: SewerGraph) -> None:
        if isinstance(self.at, InPipe):
            pipe = g.pipes.get(self.at.pipe)
            if pipe is None:
                raise ValueError(f"state references unknown pipe {self.at.pipe}")
            if self.at.facing is not None and self.at.facing not in (
                e[0] for e in pipe.endpoints
            ):
                raise ValueError(
                    f"pipe {self.at.pipe} does not end at {self.at.facing}"
                )
        else:
            m = g.manholes.get(self.at.manhole)
            if m is None:
                raise ValueError(f"state references unknown manhole {self.at.manhole}")
            m.port(self.at.port)
        for p in self.sampled | self.inspected:
            if p not in g.pipes:
                raise ValueError(f"state references unknown pipe {p}")
        if self.parked is not None and self.parked not in g.manholes:
            raise ValueError(f"state references unknown manhole {self.parked}")

    def to_json(self) -> dict:
        return {
            "at": place_to_json(self.at),
            "sampled": sorted(self.sampled),
            "inspected": sorted(self.inspected),
            "parked": self.parked,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "PlanningState":
        return cls(
            at=place_from_json(doc["at"]),
            sampled=frozenset(doc["sampled"]),
            inspected=frozenset(doc["inspected"]),
            parked=doc.get("parked"),
        )
