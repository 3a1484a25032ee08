/** Mission authoring by map clicks.
 *
 * Flow: click the entry pipe, click the manhole it should head for, click
 * target pipes/manholes (a picker chooses GOTO / INSPECT / WATER_SAMPLE per
 * click), click the exit manhole, done. Serialization is canonical so the
 * authored bytes match a hand-written mission file exactly.
 */

import type { MissionDoc, TaskDoc, TaskKind, WorldDoc } from "./types.js";

export type AuthoringStage =
  | "pick-entry-pipe"
  | "pick-entry-heading"
  | "pick-tasks"
  | "pick-exit"
  | "done";

export class AuthoringError extends Error {}

export class MissionAuthor {
  stage: AuthoringStage = "pick-entry-pipe";
  entryPipe: string | null = null;
  entryTowards: string | null = null;
  exit: string | null = null;
  tasks: TaskDoc[] = [];
  timeBudgetS = 7200;
  private nextTask = 1;

  constructor(private world: WorldDoc) {}

  private pipe(id: string) {
    const p = this.world.pipes.find((p) => p.id === id);
    if (!p) throw new AuthoringError(`unknown pipe ${id}`);
    return p;
  }

  private manhole(id: string) {
    const m = this.world.manholes.find((m) => m.id === id);
    if (!m) throw new AuthoringError(`unknown manhole ${id}`);
    return m;
  }

  /** Manholes that are legal heading choices for the picked entry pipe. */
  headingChoices(): string[] {
    if (!this.entryPipe) return [];
    return this.pipe(this.entryPipe).endpoints.map(([m]) => m);
  }

  clickPipe(id: string, kind?: TaskKind): void {
    this.pipe(id);
    if (this.stage === "pick-entry-pipe") {
      this.entryPipe = id;
      this.stage = "pick-entry-heading";
      return;
    }
    if (this.stage === "pick-tasks") {
      if (!kind) throw new AuthoringError("pick a task kind for the clicked pipe");
      this.tasks.push({ id: `t${this.nextTask++}`, kind, target: id });
      return;
    }
    throw new AuthoringError(`cannot click a pipe while ${this.stage}`);
  }

  clickManhole(id: string, kind?: TaskKind): void {
    const m = this.manhole(id);
    if (this.stage === "pick-entry-heading") {
      if (!this.headingChoices().includes(id)) {
        throw new AuthoringError(
          `entry pipe ${this.entryPipe} does not end at ${id}`,
        );
      }
      this.entryTowards = id;
      this.stage = "pick-tasks";
      return;
    }
    if (this.stage === "pick-tasks") {
      if (kind === "GOTO") {
        this.tasks.push({ id: `t${this.nextTask++}`, kind, target: id });
        return;
      }
      if (kind) {
        throw new AuthoringError(`${kind} needs a pipe target`);
      }
      // a bare manhole click in task stage picks the exit
      if (!m.recoverable) {
        throw new AuthoringError(`${id} is not recoverable and cannot be the exit`);
      }
      this.exit = id;
      this.stage = "done";
      return;
    }
    throw new AuthoringError(`cannot click a manhole while ${this.stage}`);
  }

  removeTask(taskId: string): void {
    this.tasks = this.tasks.filter((t) => t.id !== taskId);
  }

  mission(): MissionDoc {
    if (!this.entryPipe || !this.entryTowards || !this.exit) {
      throw new AuthoringError("mission is not fully authored yet");
    }
    return {
      entry: { pipe: this.entryPipe, towards: this.entryTowards },
      exit: this.exit,
      time_budget_s: this.timeBudgetS,
      tasks: this.tasks.map((t) => ({ id: t.id, kind: t.kind, target: t.target })),
    };
  }
}

/** Canonical bytes: 2-space indent, fixed key order, trailing newline.
 * Matches the mission files the planning stack writes. */
export function serializeMission(m: MissionDoc): string {
  const doc = {
    entry: { pipe: m.entry.pipe, towards: m.entry.towards },
    exit: m.exit,
    time_budget_s: m.time_budget_s,
    tasks: m.tasks.map((t) => ({ id: t.id, kind: t.kind, target: t.target })),
  };
  return JSON.stringify(doc, null, 2) + "\n";
}
