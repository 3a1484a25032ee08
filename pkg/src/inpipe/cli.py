"""Operator command line.

    inpipe plan <kis> <mission.json>
    inpipe run <kis> <mission.json> [--scenario s.json] [--seed n] [--log out.ndjson]
    inpipe validate <kis> <mission.json> <plan.txt>
    inpipe serve [kis] [--port n]

run exit codes: 0 completed, 2 partial, 3 parked at a safety point,
4 stranded.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import fixture_path
from .events import EventLog
from .mission import goal_state, parse_mission
from .planner import (
    BeliefModel,
    InPipe,
    PlanningState,
    parse_solution,
    render_solution,
    solve,
    validate_plan,
)
from .replanner import EXIT_CODES, run_mission
from .sewer import parse_kis
from .simulator import GroundTruth, Scenario


def _load_world(path: str):
    return parse_kis(Path(path).read_text(encoding="utf-8"))


def _load_mission(path: str, graph):
    return parse_mission(Path(path).read_text(encoding="utf-8"), graph)


def _initial_state(mission) -> PlanningState:
    return PlanningState(at=InPipe(mission.entry_pipe, mission.entry_towards))


def cmd_plan(args: argparse.Namespace) -> int:
    graph = _load_world(args.kis)
    mission = _load_mission(args.mission, graph)
    belief = BeliefModel(graph=graph)
    tasks = {t.task_id: t for t in mission.tasks}
    plan = solve(belief, _initial_state(mission), goal_state(mission), tasks)
    if plan is None:
        print("UNSOLVABLE", file=sys.stderr)
        return 1
    sys.stdout.write(render_solution(plan))
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    graph = _load_world(args.kis)
    mission = _load_mission(args.mission, graph)
    scenario = None
    if args.scenario:
        scenario = Scenario.from_json(Path(args.scenario).read_text(encoding="utf-8"))
    if args.seed is not None:
        gt = GroundTruth(graph=graph, rng_seed=args.seed)
    else:
        gt = GroundTruth(graph=graph, rng_seed=scenario.seed if scenario else 0)
    events = EventLog(args.log) if args.log else EventLog()
    run = run_mission(mission, gt, scenario=scenario, events=events)
    term = events.events[-1]
    print(
        f"{run.status.value}: achieved={sorted(run.goals.achieved)} "
        f"dropped={dict(sorted(run.goals.dropped.items()))} "
        f"exit={run.goals.current_exit} "
        f"clock={term.payload['clock_s']:.1f}s replans={term.payload['replans']}"
    )
    return EXIT_CODES[run.status]


def cmd_validate(args: argparse.Namespace) -> int:
    graph = _load_world(args.kis)
    mission = _load_mission(args.mission, graph)
    plan = parse_solution(Path(args.plan).read_text(encoding="utf-8"))
    belief = BeliefModel(graph=graph)
    tasks = {t.task_id: t for t in mission.tasks}
    verdict = validate_plan(
        belief, _initial_state(mission), plan, goal_state(mission), tasks
    )
    if verdict:
        print("OK")
        return 0
    print(f"Violation at step {verdict.step}: {verdict.reason}")
    return 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    graph = _load_world(args.kis)
    kis_text = Path(args.kis).read_text(encoding="utf-8")
    console = args.console
    if console is None and Path("frontend/index.html").exists():
        console = "frontend"
    if console is not None and not Path(console, "index.html").exists():
        print(f"error: no console at {console}", file=sys.stderr)
        return 64
    app = create_app(graph, kis_text, console_dir=console)
    if console:
        print(f"console at http://{args.host}:{args.port}/ (from {console})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inpipe", description="In-pipe inspection robot mission stack"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="print the symbolic plan for a mission")
    p.add_argument("kis")
    p.add_argument("mission")
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("run", help="simulate a mission to its terminal status")
    p.add_argument("kis")
    p.add_argument("mission")
    p.add_argument("--scenario", help="fault script JSON")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--log", help="write the NDJSON event log here")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("validate", help="check a solution file against a mission")
    p.add_argument("kis")
    p.add_argument("mission")
    p.add_argument("plan")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("serve", help="start the HTTP mission service")
    p.add_argument(
        "kis",
        nargs="?",
        default=str(fixture_path("ais_test_env.kis")),
        help="world map (defaults to the packaged test environment)",
    )
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8333)
    p.add_argument(
        "--console",
        default=None,
        help="directory with the built operator console "
        "(autodetects ./frontend when present)",
    )
    p.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 64
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 64


if __name__ == "__main__":
    sys.exit(main())
