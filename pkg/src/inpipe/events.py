"""Run events: the ordered, replayable trace of a mission.

Events carry the simulation clock, never wall time, so identical runs
serialize byte-identically. NDJSON on disk, one event per line.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Any

EVENT_KINDS = (
    "PLAN_EMITTED",
    "ACTION_START",
    "JOB_RESULT",
    "ERROR",
    "RECOVERY_TRANSITION",
    "REPLAN",
    "GOAL_UPDATE",
    "TERMINAL",
)


@dataclass(frozen=True)
class RunEvent:
    seq: int
    t_sim_s: float
    kind: str
    payload: dict

    def to_json_line(self) -> str:
        return json.dumps(
            {"seq": self.seq, "t_sim_s": self.t_sim_s, "kind": self.kind,
             "payload": self.payload},
            sort_keys=True,
            ensure_ascii=True,
        )

    @classmethod
    def from_json_line(cls, line: str) -> "RunEvent":
        doc = json.loads(line)
        return cls(doc["seq"], doc["t_sim_s"], doc["kind"], doc["payload"])


class EventLog:
    """Collects events in order; optionally mirrors them to an NDJSON file."""

    def __init__(self, path: str | Path | None = None):
        self.events: list[RunEvent] = []
        self._seq = 0
        self._last_t = 0.0
        self._fh: IO[str] | None = None
        if path is not None:
            self._fh = open(path, "w", encoding="utf-8")

    def emit(self, t_sim_s: float, kind: str, payload: dict[str, Any]) -> RunEvent:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind}")
        if t_sim_s < self._last_t - 1e-9:
            raise ValueError("simulation time went backwards")
        self._last_t = max(self._last_t, t_sim_s)
        self._seq += 1
        ev = RunEvent(self._seq, t_sim_s, kind, payload)
        self.events.append(ev)
        if self._fh is not None:
            self._fh.write(ev.to_json_line() + "\n")
            self._fh.flush()
        return ev

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def since(self, seq: int) -> list[RunEvent]:
        return [e for e in self.events if e.seq > seq]

    def to_ndjson(self) -> str:
        return "".join(e.to_json_line() + "\n" for e in self.events)


def read_ndjson(text: str) -> list[RunEvent]:
    return [RunEvent.from_json_line(l) for l in text.splitlines() if l.strip()]
