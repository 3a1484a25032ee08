"""Seeded random instance generators for property tests.

Everything here is driven by an explicit random.Random so failures are
reproducible from the printed seed.
"""
from __future__ import annotations

import random

from inpipe.mission import Mission, Task, TaskKind
from inpipe.sewer import Manhole, Pipe, Port, SewerGraph


def random_graph(
    rng: random.Random,
    n_manholes: int | None = None,
    extra_pipe_factor: float = 0.4,
    stub_count: int | None = None,
    easy_geometry: bool = False,
) -> SewerGraph:
    """A valid random SewerGraph.

    Built as a random spanning tree plus extra chords plus stubs, then port
    angles are assigned in bearing order. easy_geometry keeps every crossing
    within the kinematic limits; otherwise angles and inverts are free and
    some crossings come out untraversable.
    """
    n = n_manholes if n_manholes is not None else rng.randint(2, 12)
    manhole_ids = [f"M{i}" for i in range(1, n + 1)]
    attachments: dict[str, list[str]] = {m: [] for m in manhole_ids}
    pipe_ends: dict[str, tuple[str, ...]] = {}
    next_pipe = 1

    def new_pipe(ends: tuple[str, ...]) -> str:
        nonlocal next_pipe
        pid = f"P{next_pipe}"
        next_pipe += 1
        pipe_ends[pid] = ends
        for m in ends:
            attachments[m].append(pid)
        return pid

    order = manhole_ids[:]
    rng.shuffle(order)
    for i, m in enumerate(order[1:], start=1):
        other = rng.choice(order[:i])
        new_pipe((other, m))
    for _ in range(int(n * extra_pipe_factor)):
        a, b = rng.sample(manhole_ids, 2) if n >= 2 else (manhole_ids[0],) * 2
        if any(set(pipe_ends[p]) == {a, b} for p in attachments[a]):
            continue
        new_pipe((a, b))
    stubs = stub_count if stub_count is not None else rng.randint(0, 2)
    for _ in range(stubs):
        new_pipe((rng.choice(manhole_ids),))

    pipes = {
        pid: Pipe(
            pid,
            length_cm=round(rng.uniform(100, 2000), 1),
            diameter_cm=round(rng.uniform(30, 60), 1),
        )
        for pid in pipe_ends
    }

    manholes: dict[str, Manhole] = {}
    endpoint_map: dict[str, list[tuple[str, int]]] = {p: [] for p in pipes}
    for m in manhole_ids:
        carried = attachments[m]
        k = len(carried)
        if easy_geometry:
            # Evenly spread bearings keep every pairwise turn <= 90 for k <= 2
            # and most pairs legal for larger k; inverts stay within the step.
            base = rng.uniform(0, 360 / max(k, 1) / 2)
            angles = sorted((base + i * 360.0 / k) % 360 for i in range(k))
            inverts = [round(rng.uniform(0, 25), 1) for _ in range(k)]
        else:
            angles = sorted(rng.sample(range(0, 360), k))
            inverts = [round(rng.uniform(0, 60), 1) for _ in range(k)]
        rng.shuffle(carried)
        ports = tuple(
            Port(i + 1, carried[i], float(angles[i]), inverts[i]) for i in range(k)
        )
        manholes[m] = Manhole(
            m,
            diameter_cm=round(rng.uniform(80, 150), 1),
            ports=ports,
            recoverable=rng.random() > 0.2,
        )
        for p in ports:
            endpoint_map[p.pipe].append((m, p.index))

    from inpipe.sewer import id_number

    for pid, ends in endpoint_map.items():
        ends.sort(key=lambda e: (id_number(e[0]), e[1]))
        pipes[pid] = Pipe(
            pid, pipes[pid].length_cm, pipes[pid].diameter_cm, tuple(ends)
        )

    g = SewerGraph(manholes, pipes)
    g.validate()
    return g


def random_mission(rng: random.Random, g: SewerGraph, max_tasks: int = 4) -> Mission:
    """A schema-valid mission on g (reachability not guaranteed)."""
    recoverable = [m for m in g.manholes.values() if m.recoverable]
    if not recoverable:
        raise ValueError("graph has no recoverable manhole")
    exit_m = rng.choice(recoverable).id
    two_ended = [p for p in g.pipes.values() if len(p.endpoints) == 2]
    entry_pipe = rng.choice(two_ended if two_ended else list(g.pipes.values()))
    towards = rng.choice(entry_pipe.endpoints)[0]
    tasks = []
    kinds = [TaskKind.WATER_SAMPLE, TaskKind.INSPECT, TaskKind.GOTO]
    for i in range(rng.randint(0, max_tasks)):
        kind = rng.choice(kinds)
        if kind is TaskKind.GOTO and rng.random() < 0.5:
            target = rng.choice(sorted(g.manholes))
        else:
            target = rng.choice(sorted(g.pipes))
        tasks.append(Task(f"t{i+1}", kind, target))
    return Mission(
        entry_pipe=entry_pipe.id,
        entry_towards=towards,
        exit=exit_m,
        tasks=tuple(tasks),
    )
