"""HTTP/JSON mission service: the operator console's backend.

One world per server; any number of runs. All mutating calls for a run are
serialized on that run's lock, so stepping and live fault injection stay
deterministic.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field

from fastapi import Body, FastAPI, HTTPException, Query
from fastapi.middleware.cors import CORSMiddleware

from .events import EventLog
from .mission import MissionError, parse_mission
from .planner.model import InPipe
from .replanner import TERMINAL_STATUSES, MissionController, RunStatus
from .sewer import SewerGraph, parse_coord_annotations, serialize_kis
from .simulator import GroundTruth, ObstacleKind, Scenario


def world_to_json(
    g: SewerGraph, coords: dict[str, tuple[float, float]] | None = None
) -> dict:
    coords = coords or {}
    return {
        "manholes": [
            {
                "id": m.id,
                "diameter_cm": m.diameter_cm,
                "recoverable": m.recoverable,
                "ports": [
                    {
                        "index": p.index,
                        "pipe": p.pipe,
                        "angle_deg": p.angle_deg,
                        "invert_offset_cm": p.invert_offset_cm,
                    }
                    for p in m.ports
                ],
                "coord": list(coords[m.id]) if m.id in coords else None,
            }
            for m in g.manholes.values()
        ],
        "pipes": [
            {
                "id": p.id,
                "length_cm": p.length_cm,
                "diameter_cm": p.diameter_cm,
                "endpoints": [[m, i] for m, i in p.endpoints],
            }
            for p in g.pipes.values()
        ],
    }


@dataclass
class _Run:
    controller: MissionController
    events: EventLog
    lock: threading.Lock = field(default_factory=threading.Lock)
    paused: bool = False

    @property
    def status(self) -> RunStatus:
        return self.controller.run.status

    def snapshot(self) -> dict:
        c = self.controller
        place = c.sim.robot.place
        if isinstance(place, InPipe):
            place_doc = {"in_pipe": place.pipe, "facing": place.facing,
                         "position_cm": c.sim.robot.position_cm}
        else:
            place_doc = {"at_manhole": place.manhole, "port": place.port}
        current_plan = c.run.history[-1][0] if c.run.history else None
        from .planner import render_solution

        clock, energy, overrun = c.sim.elapsed_report(c.mission.time_budget_s)
        return {
            "status": c.run.status.value,
            "robot": place_doc,
            "parked_at": c.executor.parked_at if c.executor else None,
            "goals": c.run.goals.snapshot(),
            "blocked_pipes": sorted(c.run.belief.blocked_pipes),
            "plan": render_solution(current_plan) if current_plan else "",
            "plans_so_far": len(c.run.history),
            "clock_s": clock,
            "energy_remaining_s": energy,
            "overrun": overrun,
            "paused": self.paused,
        }


def create_app(
    graph: SewerGraph,
    kis_text: str | None = None,
    console_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="inpipe mission service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    coords = parse_coord_annotations(kis_text) if kis_text else parse_coord_annotations(
        serialize_kis(graph)
    )
    runs: dict[str, _Run] = {}
    counter = threading.Lock()
    next_id = [0]

    def get_run(run_id: str) -> _Run:
        run = runs.get(run_id)
        if run is None:
            raise HTTPException(status_code=404, detail=f"unknown run {run_id}")
        return run

    @app.get("/world")
    def world() -> dict:
        return world_to_json(graph, coords)

    @app.post("/mission", status_code=201)
    def create_mission(body: dict = Body(...)) -> dict:
        mission_doc = body.get("mission", body)
        try:
            mission = parse_mission(mission_doc, graph)
        except MissionError as e:
            raise HTTPException(status_code=422, detail=str(e)) from None
        scenario = None
        if body.get("scenario"):
            try:
                scenario = Scenario.from_json(body["scenario"])
            except (KeyError, ValueError) as e:
                raise HTTPException(status_code=422, detail=f"bad scenario: {e}") from None
        gt = GroundTruth(graph=graph, rng_seed=int(body.get("seed", 0)))
        events = EventLog()
        controller = MissionController(
            mission, gt, scenario=scenario, events=events
        )
        with counter:
            next_id[0] += 1
            run_id = f"r{next_id[0]}"
        runs[run_id] = _Run(controller=controller, events=events)
        return {"id": run_id, "status": controller.run.status.value}

    @app.post("/run/{run_id}/start")
    def start(run_id: str) -> dict:
        run = get_run(run_id)
        with run.lock:
            if run.status in TERMINAL_STATUSES:
                raise HTTPException(status_code=409, detail="run already terminal")
            run.paused = False
            while run.status not in TERMINAL_STATUSES and not run.paused:
                run.controller.tick()
        return {"status": run.status.value}

    @app.post("/run/{run_id}/pause")
    def pause(run_id: str) -> dict:
        run = get_run(run_id)
        with run.lock:
            if run.status in TERMINAL_STATUSES:
                raise HTTPException(status_code=409, detail="run already terminal")
            run.paused = True
        return {"status": run.status.value, "paused": True}

    @app.post("/run/{run_id}/step")
    def step(run_id: str, n: int = Query(default=1, ge=1, le=100_000)) -> dict:
        run = get_run(run_id)
        with run.lock:
            if run.status in TERMINAL_STATUSES:
                raise HTTPException(status_code=409, detail="run already terminal")
            for _ in range(n):
                if run.controller.tick() in TERMINAL_STATUSES:
                    break
        return {"status": run.status.value}

    @app.post("/run/{run_id}/fault")
    def fault(run_id: str, body: dict = Body(...)) -> dict:
        run = get_run(run_id)
        with run.lock:
            try:
                kind = ObstacleKind(body["kind"])
                run.controller.sim.inject_fault(
                    body["pipe"], kind, float(body["position_cm"])
                )
            except (KeyError, ValueError) as e:
                raise HTTPException(status_code=422, detail=str(e)) from None
        return {"injected": body["pipe"], "kind": kind.value}

    @app.get("/run/{run_id}/events")
    def events(run_id: str, since: int = Query(default=0, ge=0)) -> dict:
        run = get_run(run_id)
        evs = run.events.since(since)
        return {
            "events": [
                {
                    "seq": e.seq,
                    "t_sim_s": e.t_sim_s,
                    "kind": e.kind,
                    "payload": e.payload,
                }
                for e in evs
            ],
            "terminal": run.status in TERMINAL_STATUSES,
        }

    @app.get("/run/{run_id}/state")
    def state(run_id: str) -> dict:
        run = get_run(run_id)
        with run.lock:
            return run.snapshot()

    if console_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=console_dir, html=True), name="console")

    return app
