"""Topological sewer map: manholes, pipes, ports, and the KIS-lite ASCII format.

The map is the robot's only spatial knowledge. Geometry is reduced to what
route planning needs: per-manhole port bearings (for turn limits), per-port
invert offsets (for step limits), and pipe lengths/diameters.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

PIPE_DIAMETER_RANGE_CM = (30.0, 60.0)


class KisError(ValueError):
    """Raised on any KIS-lite syntax or consistency problem.

    Carries the 1-based line number when the problem is tied to a line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnknownPortError(KeyError):
    """Port index not present on the manhole."""


@dataclass(frozen=True)
class KinematicLimits:
    """Physical abilities of the robot relevant to route feasibility."""

    max_turn_deg: float = 90.0
    max_step_cm: float = 30.0
    cruise_speed_cm_s: float = 30.0
    max_speed_cm_s: float = 60.0

    def __post_init__(self) -> None:
        if not (0 < self.cruise_speed_cm_s <= self.max_speed_cm_s):
            raise ValueError("cruise speed must be in (0, max_speed]")


@dataclass(frozen=True)
class Port:
    """One pipe connection on a manhole.

    angle_deg is the pipe's bearing measured clockwise from the manhole's own
    reference direction; invert_offset_cm is the pipe invert's height above
    the manhole floor (differences between ports are the steps the robot has
    to climb).
    """

    index: int
    pipe: str
    angle_deg: float
    invert_offset_cm: float = 0.0


@dataclass(frozen=True)
class Manhole:
    id: str
    diameter_cm: float
    ports: tuple[Port, ...]
    recoverable: bool = True

    def port(self, index: int) -> Port:
        for p in self.ports:
            if p.index == index:
                return p
        raise UnknownPortError(f"{self.id} has no port {index}")

    def port_for_pipe(self, pipe_id: str) -> Port:
        for p in self.ports:
            if p.pipe == pipe_id:
                return p
        raise UnknownPortError(f"{self.id} has no port carrying {pipe_id}")


@dataclass(frozen=True)
class Pipe:
    """A pipe run. endpoints holds 0..2 (manhole, port index) attachments;
    pipes with a single attachment are dead-end stubs."""

    id: str
    length_cm: float
    diameter_cm: float
    endpoints: tuple[tuple[str, int], ...] = ()

    def other_end(self, manhole_id: str) -> tuple[str, int] | None:
        """The attachment at the far end from manhole_id, or None for a stub."""
        for end in self.endpoints:
            if end[0] != manhole_id:
                return end
        return None


def id_number(token: str) -> int:
    """Numeric part of an ID like P12 or M6, for canonical ordering."""
    m = re.fullmatch(r"[MP](\d+)", token)
    if not m:
        raise ValueError(f"not a manhole/pipe id: {token!r}")
    return int(m.group(1))


@dataclass
class SewerGraph:
    manholes: dict[str, Manhole] = field(default_factory=dict)
    pipes: dict[str, Pipe] = field(default_factory=dict)

    def validate(self) -> None:
        """Check referential integrity and canonical port numbering."""
        carriers: dict[str, list[tuple[str, int]]] = {p: [] for p in self.pipes}
        for m in self.manholes.values():
            if not m.ports:
                raise KisError(f"manhole {m.id} has no ports")
            if m.diameter_cm <= 0:
                raise KisError(f"manhole {m.id} diameter must be positive")
            indices = [p.index for p in m.ports]
            if indices != list(range(1, len(m.ports) + 1)):
                raise KisError(f"manhole {m.id} ports must be numbered 1..{len(m.ports)}")
            angles = [p.angle_deg for p in m.ports]
            if any(not (0 <= a < 360) for a in angles):
                raise KisError(f"manhole {m.id} port angle out of [0, 360)")
            if any(b <= a for a, b in zip(angles, angles[1:])):
                raise KisError(
                    f"manhole {m.id} port angles must strictly increase with index"
                )
            for p in m.ports:
                if p.invert_offset_cm < 0:
                    raise KisError(f"manhole {m.id} port {p.index}: negative invert")
                if p.pipe not in self.pipes:
                    raise KisError(
                        f"manhole {m.id} port {p.index} references unknown pipe {p.pipe}"
                    )
                carriers[p.pipe].append((m.id, p.index))
        lo, hi = PIPE_DIAMETER_RANGE_CM
        for pipe in self.pipes.values():
            if pipe.length_cm <= 0:
                raise KisError(f"pipe {pipe.id} length must be positive")
            if not (lo <= pipe.diameter_cm <= hi):
                raise KisError(
                    f"pipe {pipe.id} diameter {pipe.diameter_cm} outside [{lo}, {hi}]"
                )
            found = sorted(carriers[pipe.id], key=lambda e: (id_number(e[0]), e[1]))
            if len(found) > 2:
                raise KisError(f"pipe {pipe.id} attached to more than two ports")
            if tuple(found) != pipe.endpoints:
                raise KisError(
                    f"pipe {pipe.id} endpoints {pipe.endpoints} do not match "
                    f"port records {tuple(found)}"
                )

    def copy_without_pipe_edges(self) -> "SewerGraph":
        return SewerGraph(dict(self.manholes), dict(self.pipes))


def turn_angle(m: Manhole, from_port: int, to_port: int) -> float:
    """Deviation from straight-through travel between two ports, in degrees.

    0 means the ports are diametrically opposite (no turning needed); 180
    would mean doubling back into the same direction.
    """
    if from_port == to_port:
        raise ValueError("from and to ports must differ")
    a = m.port(from_port).angle_deg
    b = m.port(to_port).angle_deg
    separation = abs(a - b) % 360.0
    if separation > 180.0:
        separation = 360.0 - separation
    return abs(180.0 - separation)


@dataclass(frozen=True)
class Traversability:
    ok: bool
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def traversable(
    m: Manhole, from_port: int, to_port: int, limits: KinematicLimits
) -> Traversability:
    """Whether the robot can physically cross m between the two ports.

    Both gates use absolute differences, so the check is symmetric in
    (from, to).
    """
    turn = turn_angle(m, from_port, to_port)
    if turn > limits.max_turn_deg:
        return Traversability(
            False, f"turn {turn:g} deg exceeds limit {limits.max_turn_deg:g}"
        )
    step = abs(
        m.port(from_port).invert_offset_cm - m.port(to_port).invert_offset_cm
    )
    if step > limits.max_step_cm:
        return Traversability(
            False, f"step {step:g} cm exceeds limit {limits.max_step_cm:g}"
        )
    return Traversability(True)


# Geometry classes per port count. A manhole type is the port count k; where a
# k is listed here, the sorted multiset of consecutive angle gaps picks a
# letter class (matched within GAP_TOLERANCE_DEG). Unmatched gap signatures
# fall through to the last letter of the table row.
GAP_TOLERANCE_DEG = 10.0
_GAP_CLASSES: dict[int, list[tuple[str, tuple[float, ...]]]] = {
    3: [("A", (90.0, 90.0, 180.0))],
}
_FALLBACK_LETTER = {3: "B"}


def _gap_signature(m: Manhole) -> tuple[float, ...]:
    angles = sorted(p.angle_deg for p in m.ports)
    gaps = [b - a for a, b in zip(angles, angles[1:])]
    gaps.append(360.0 - angles[-1] + angles[0])
    return tuple(sorted(gaps))


def manhole_type_designator(m: Manhole) -> str:
    """Token naming the manhole's geometry, e.g. TYPE_4 or TYPE_3_TYPE_B."""
    k = len(m.ports)
    base = f"TYPE_{k}"
    if k not in _GAP_CLASSES:
        return base
    sig = _gap_signature(m)
    for letter, ref in _GAP_CLASSES[k]:
        if len(ref) == len(sig) and all(
            abs(a - b) <= GAP_TOLERANCE_DEG for a, b in zip(sig, ref)
        ):
            return f"{base}_TYPE_{letter}"
    return f"{base}_TYPE_{_FALLBACK_LETTER[k]}"


# --- KIS-lite parsing / serialization -------------------------------------
#
# Line-oriented ASCII, one record per line, '#' comments, blank lines ignored:
#   MANHOLE <Mid> DIAM_CM <float> RECOVERABLE <0|1>
#   PORT <Mid> <idx> PIPE <Pid> ANGLE_DEG <float> INVERT_CM <float>
#   PIPE <Pid> LEN_CM <float> DIAM_CM <float>
# Pipe endpoints are inferred from the PORT records naming the pipe.

_ID_RE = re.compile(r"[MP]\d+")


def _expect(cond: bool, msg: str, line: int) -> None:
    if not cond:
        raise KisError(msg, line)


def _parse_float(tok: str, what: str, line: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise KisError(f"bad {what}: {tok!r}", line) from None


def parse_kis(text: str) -> SewerGraph:
    """Parse a KIS-lite document into a validated SewerGraph."""
    manhole_rows: dict[str, tuple[int, float, bool]] = {}
    port_rows: list[tuple[int, str, int, str, float, float]] = []
    pipe_rows: dict[str, tuple[int, float, float]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        tokens = stripped.split()
        kind = tokens[0]
        if kind == "MANHOLE":
            _expect(len(tokens) == 6, f"MANHOLE record needs 6 tokens, got {len(tokens)}", lineno)
            _expect(tokens[2] == "DIAM_CM" and tokens[4] == "RECOVERABLE",
                    "malformed MANHOLE record", lineno)
            mid = tokens[1]
            _expect(mid.startswith("M") and _ID_RE.fullmatch(mid) is not None,
                    f"bad manhole id {mid!r}", lineno)
            _expect(mid not in manhole_rows, f"duplicate manhole {mid}", lineno)
            _expect(tokens[5] in ("0", "1"), f"RECOVERABLE must be 0 or 1, got {tokens[5]!r}", lineno)
            diam = _parse_float(tokens[3], "diameter", lineno)
            manhole_rows[mid] = (lineno, diam, tokens[5] == "1")
        elif kind == "PORT":
            _expect(len(tokens) == 9, f"PORT record needs 9 tokens, got {len(tokens)}", lineno)
            _expect(tokens[3] == "PIPE" and tokens[5] == "ANGLE_DEG" and tokens[7] == "INVERT_CM",
                    "malformed PORT record", lineno)
            mid = tokens[1]
            try:
                idx = int(tokens[2])
            except ValueError:
                raise KisError(f"bad port index {tokens[2]!r}", lineno) from None
            _expect(idx >= 1, f"port index must be >= 1, got {idx}", lineno)
            pid = tokens[4]
            _expect(pid.startswith("P") and _ID_RE.fullmatch(pid) is not None,
                    f"bad pipe id {pid!r}", lineno)
            angle = _parse_float(tokens[6], "angle", lineno)
            invert = _parse_float(tokens[8], "invert offset", lineno)
            port_rows.append((lineno, mid, idx, pid, angle, invert))
        elif kind == "PIPE":
            _expect(len(tokens) == 6, f"PIPE record needs 6 tokens, got {len(tokens)}", lineno)
            _expect(tokens[2] == "LEN_CM" and tokens[4] == "DIAM_CM",
                    "malformed PIPE record", lineno)
            pid = tokens[1]
            _expect(pid.startswith("P") and _ID_RE.fullmatch(pid) is not None,
                    f"bad pipe id {pid!r}", lineno)
            _expect(pid not in pipe_rows, f"duplicate pipe {pid}", lineno)
            length = _parse_float(tokens[3], "length", lineno)
            diam = _parse_float(tokens[5], "diameter", lineno)
            pipe_rows[pid] = (lineno, length, diam)
        else:
            raise KisError(f"unknown record kind {kind!r}", lineno)

    ports_by_manhole: dict[str, list[tuple[int, Port]]] = {m: [] for m in manhole_rows}
    carriers: dict[str, list[tuple[str, int, int]]] = {p: [] for p in pipe_rows}
    for lineno, mid, idx, pid, angle, invert in port_rows:
        _expect(mid in manhole_rows, f"PORT references undeclared manhole {mid}", lineno)
        _expect(pid in pipe_rows, f"PORT references undeclared pipe {pid}", lineno)
        _expect(all(p.index != idx for _, p in ports_by_manhole[mid]),
                f"duplicate port {idx} on {mid}", lineno)
        ports_by_manhole[mid].append((lineno, Port(idx, pid, angle, invert)))
        carriers[pid].append((mid, idx, lineno))

    graph = SewerGraph()
    for pid in sorted(pipe_rows, key=id_number):
        lineno, length, diam = pipe_rows[pid]
        ends = carriers[pid]
        if len(ends) > 2:
            raise KisError(f"pipe {pid} attached to {len(ends)} ports (max 2)", ends[2][2])
        endpoints = tuple(sorted(((m, i) for m, i, _ in ends),
                                 key=lambda e: (id_number(e[0]), e[1])))
        graph.pipes[pid] = Pipe(pid, length, diam, endpoints)
    for mid in sorted(manhole_rows, key=id_number):
        lineno, diam, recoverable = manhole_rows[mid]
        rows = sorted(ports_by_manhole[mid], key=lambda r: r[1].index)
        ports = tuple(p for _, p in rows)
        _expect(bool(ports), f"manhole {mid} declares no ports", lineno)
        indices = [p.index for p in ports]
        if indices != list(range(1, len(ports) + 1)):
            raise KisError(f"manhole {mid} ports must be a contiguous 1..k range", lineno)
        for (la, a), (lb, b) in zip(rows, rows[1:]):
            if b.angle_deg <= a.angle_deg:
                raise KisError(
                    f"manhole {mid} port {b.index} angle must exceed port {a.index} angle "
                    "(ports are numbered in bearing order)", lb)
        graph.manholes[mid] = Manhole(mid, diam, ports, recoverable)

    graph.validate()
    return graph


def _fmt(x: float) -> str:
    return f"{x:g}"


def serialize_kis(g: SewerGraph) -> str:
    """Render a SewerGraph canonically: manholes (with their ports) then
    pipes, each ordered by numeric ID. parse_kis round-trips the output."""
    lines = ["# KIS-lite sewer database"]
    for mid in sorted(g.manholes, key=id_number):
        m = g.manholes[mid]
        lines.append(
            f"MANHOLE {m.id} DIAM_CM {_fmt(m.diameter_cm)} RECOVERABLE {int(m.recoverable)}"
        )
        for p in m.ports:
            lines.append(
                f"PORT {m.id} {p.index} PIPE {p.pipe} ANGLE_DEG {_fmt(p.angle_deg)} "
                f"INVERT_CM {_fmt(p.invert_offset_cm)}"
            )
    for pid in sorted(g.pipes, key=id_number):
        p = g.pipes[pid]
        lines.append(f"PIPE {p.id} LEN_CM {_fmt(p.length_cm)} DIAM_CM {_fmt(p.diameter_cm)}")
    return "\n".join(lines) + "\n"


def with_recoverable(g: SewerGraph, manhole_id: str, value: bool) -> SewerGraph:
    """Functional update helper used by tests and the mission editor."""
    m = g.manholes[manhole_id]
    manholes = dict(g.manholes)
    manholes[manhole_id] = replace(m, recoverable=value)
    return SewerGraph(manholes, dict(g.pipes))


def parse_coord_annotations(text: str) -> dict[str, tuple[float, float]]:
    """Optional layout annotations for map rendering, carried in comments:
    `# @coord M1 <x> <y>`. Not part of the record grammar."""
    coords: dict[str, tuple[float, float]] = {}
    for raw in text.splitlines():
        stripped = raw.strip()
        if not stripped.startswith("#"):
            continue
        tokens = stripped.lstrip("#").split()
        if len(tokens) == 4 and tokens[0] == "@coord":
            try:
                coords[tokens[1]] = (float(tokens[2]), float(tokens[3]))
            except ValueError:
                continue
    return coords
