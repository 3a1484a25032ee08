"""Solution-file grammar: one action per line, single-space separated.

    DRIVE_PIPE_TO_MANHOLE <pipe> <manhole>
    DRIVE_MANHOLE_TYPE_<k>[_TYPE_<letter>]_FROM_<i>_TO_<j> <manhole> <pipes...>
    TAKE_WATER_SAMPLE <pipe>
    INSPECT_PIPE <pipe>

render(parse(text)) == text for well-formed documents.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

_CROSS_RE = re.compile(r"DRIVE_MANHOLE_TYPE_(\d+)(?:_TYPE_([A-Z]))?_FROM_(\d+)_TO_(\d+)")
_ID_RE = re.compile(r"[MP]\d+")
_SIMPLE_NAMES = {"DRIVE_PIPE_TO_MANHOLE", "TAKE_WATER_SAMPLE", "INSPECT_PIPE"}


class SolutionSyntaxError(ValueError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class SymbolicAction:
    name: str
    args: tuple[str, ...]

    def line(self) -> str:
        return " ".join((self.name,) + self.args)


@dataclass(frozen=True)
class SymbolicPlan:
    actions: tuple[SymbolicAction, ...] = ()

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)


@dataclass(frozen=True)
class CrossSpec:
    """Decoded DRIVE_MANHOLE name parts."""

    type_k: int
    letter: str | None
    from_port: int
    to_port: int


def decode_cross_name(name: str) -> CrossSpec | None:
    m = _CROSS_RE.fullmatch(name)
    if not m:
        return None
    return CrossSpec(int(m.group(1)), m.group(2), int(m.group(3)), int(m.group(4)))


def parse_solution(text: str) -> SymbolicPlan:
    actions: list[SymbolicAction] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped:
            continue
        tokens = stripped.split(" ")
        name, args = tokens[0], tokens[1:]
        if name not in _SIMPLE_NAMES and decode_cross_name(name) is None:
            raise SolutionSyntaxError(f"unknown action name {name!r}", lineno)
        if not args:
            raise SolutionSyntaxError(f"{name} needs at least one argument", lineno)
        for a in args:
            if not _ID_RE.fullmatch(a):
                raise SolutionSyntaxError(f"bad id token {a!r}", lineno)
        if name == "DRIVE_PIPE_TO_MANHOLE":
            if len(args) != 2 or args[0][0] != "P" or args[1][0] != "M":
                raise SolutionSyntaxError(
                    "DRIVE_PIPE_TO_MANHOLE takes a pipe then a manhole", lineno
                )
        elif name in ("TAKE_WATER_SAMPLE", "INSPECT_PIPE"):
            if len(args) != 1 or args[0][0] != "P":
                raise SolutionSyntaxError(f"{name} takes a single pipe", lineno)
        else:
            spec = decode_cross_name(name)
            assert spec is not None
            if len(args) != spec.type_k + 1 or args[0][0] != "M":
                raise SolutionSyntaxError(
                    f"{name} takes a manhole then its {spec.type_k} pipes", lineno
                )
            if any(a[0] != "P" for a in args[1:]):
                raise SolutionSyntaxError(f"{name}: pipe arguments expected", lineno)
        actions.append(SymbolicAction(name, tuple(args)))
    return SymbolicPlan(tuple(actions))


def render_solution(plan: SymbolicPlan) -> str:
    if not plan.actions:
        return ""
    return "\n".join(a.line() for a in plan.actions) + "\n"
