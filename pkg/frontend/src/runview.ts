/** Event-sourced view of a run.
 *
 * Everything here derives from received events (plus the world document and
 * an optional state snapshot on reload). User actions never mutate the view
 * directly: an injected fault only shows up once its consequences arrive in
 * the stream.
 */

import type { GoalsDoc, RunEventDoc, RunStateDoc, WorldDoc } from "./types.js";

export interface PlanStep {
  kind: "drive" | "cross" | "sample" | "inspect";
  pipe?: string;
  manhole?: string;
  raw: string;
}

export function parsePlanText(plan: string): PlanStep[] {
  const steps: PlanStep[] = [];
  for (const raw of plan.split("\n")) {
    const line = raw.trim();
    if (!line) continue;
    const tokens = line.split(" ");
    const name = tokens[0];
    if (name === "DRIVE_PIPE_TO_MANHOLE") {
      steps.push({ kind: "drive", pipe: tokens[1], manhole: tokens[2], raw: line });
    } else if (name.startsWith("DRIVE_MANHOLE_")) {
      steps.push({ kind: "cross", manhole: tokens[1], raw: line });
    } else if (name === "TAKE_WATER_SAMPLE") {
      steps.push({ kind: "sample", pipe: tokens[1], raw: line });
    } else if (name === "INSPECT_PIPE") {
      steps.push({ kind: "inspect", pipe: tokens[1], raw: line });
    } else {
      throw new Error(`unknown plan line: ${line}`);
    }
  }
  return steps;
}

export interface TimelineEntry {
  seq: number;
  tSimS: number;
  kind: string;
  text: string;
  /** css hook: "phase", "replan", "error", "terminal", "plain" */
  flavor: "phase" | "replan" | "error" | "terminal" | "plain";
}

export interface RobotMarker {
  kind: "pipe" | "manhole";
  id: string;
  detail: string;
}

export class RunView {
  status = "PLANNING";
  goals: GoalsDoc | null = null;
  blockedPipes: string[] = [];
  routePipes: string[] = [];
  previousRoutePipes: string[] = [];
  planText = "";
  recoveryState: string | null = null;
  robot: RobotMarker | null = null;
  clockS = 0;
  timeline: TimelineEntry[] = [];
  lastSeq = 0;
  terminal = false;
  replans = 0;

  constructor(private world: WorldDoc) {}

  private pipeExists(id: string): boolean {
    return this.world.pipes.some((p) => p.id === id);
  }

  apply(ev: RunEventDoc): void {
    if (ev.seq <= this.lastSeq) return; // replays are idempotent
    this.lastSeq = ev.seq;
    this.clockS = ev.t_sim_s;
    const p = ev.payload as Record<string, any>;
    let text = ev.kind;
    let flavor: TimelineEntry["flavor"] = "plain";
    switch (ev.kind) {
      case "PLAN_EMITTED": {
        this.planText = String(p.plan ?? "");
        const steps = parsePlanText(this.planText);
        this.previousRoutePipes = this.routePipes;
        this.routePipes = steps
          .filter((s) => s.kind === "drive" && s.pipe && this.pipeExists(s.pipe))
          .map((s) => s.pipe!);
        this.status = "EXECUTING";
        text = `plan with ${p.action_count} actions to ${p.exit}` +
          (p.overrun_warning ? " (predicted overrun!)" : "");
        break;
      }
      case "ACTION_START": {
        const a = p.action as Record<string, any>;
        if (a.kind === "DRIVE_TO_MANHOLE") {
          this.robot = {
            kind: "pipe",
            id: String(a.pipe),
            detail: `driving ${a.pipe} to ${a.direction}`,
          };
        } else if (a.kind === "CROSS_MANHOLE") {
          this.robot = {
            kind: "manhole",
            id: String(a.manhole),
            detail: `crossing ${a.manhole} ${a.from_port}->${a.to_port}`,
          };
        } else {
          this.robot = {
            kind: "pipe",
            id: String(a.pipe),
            detail: a.kind === "TAKE_WATER_SAMPLE"
              ? `sampling ${a.pipe}`
              : `inspecting ${a.pipe}`,
          };
        }
        text = `action ${p.ordinal}: ${this.robot.detail}`;
        break;
      }
      case "JOB_RESULT":
        text = `${p.job}${p.ok ? "" : ` FAILED: ${p.error}`}`;
        flavor = p.ok ? "plain" : "error";
        break;
      case "ERROR":
        text = `${p.error_class}: ${p.detail}`;
        flavor = "error";
        break;
      case "RECOVERY_TRANSITION":
        this.recoveryState = String(p.state);
        if (this.recoveryState === "RESUMED" || this.recoveryState === "EXECUTING") {
          this.recoveryState = null;
        }
        text = `recovery -> ${p.state}`;
        flavor = "phase";
        break;
      case "REPLAN":
        this.replans += 1;
        this.blockedPipes = (p.blocked_pipes as string[]) ?? this.blockedPipes;
        text = `replanning around ${p.blocked_pipe}`;
        flavor = "replan";
        this.recoveryState = null;
        break;
      case "GOAL_UPDATE":
        this.goals = p.goals as GoalsDoc;
        if (p.achieved) text = `task ${p.achieved} achieved`;
        else if (p.dropped) text = `task ${p.dropped} dropped (${p.reason})`;
        else if (p.exit_changed)
          text = `exit moved ${p.exit_changed.from} -> ${p.exit_changed.to}`;
        break;
      case "TERMINAL":
        this.status = String(p.status);
        this.goals = p.goals as GoalsDoc;
        this.terminal = true;
        text = `${p.status} after ${Number(p.clock_s).toFixed(1)}s, ` +
          `${p.replans} replans`;
        flavor = "terminal";
        break;
    }
    this.timeline.push({
      seq: ev.seq,
      tSimS: ev.t_sim_s,
      kind: ev.kind,
      text,
      flavor,
    });
  }

  applyAll(events: RunEventDoc[]): void {
    for (const ev of events) this.apply(ev);
  }

  /** Pipes whose route membership changed with the latest replan. */
  routeDiff(): { added: string[]; removed: string[] } {
    const before = new Set(this.previousRoutePipes);
    const after = new Set(this.routePipes);
    return {
      added: [...after].filter((p) => !before.has(p)),
      removed: [...before].filter((p) => !after.has(p)),
    };
  }
}

/** Rebuild the full view after a reload: world + state snapshot + replayed
 * events. The snapshot only cross-checks; events are the source of truth. */
export function reconstruct(
  world: WorldDoc,
  events: RunEventDoc[],
  snapshot?: RunStateDoc,
): RunView {
  const view = new RunView(world);
  view.applyAll(events);
  if (snapshot) {
    if (view.terminal && snapshot.status !== view.status) {
      throw new Error(
        `replay disagrees with snapshot: ${view.status} vs ${snapshot.status}`,
      );
    }
    if (!view.goals) view.goals = snapshot.goals;
  }
  return view;
}
