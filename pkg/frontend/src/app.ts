/** Console wiring: author a mission on the map, launch it, steer faults. */

import { MissionAuthor, serializeMission } from "./authoring.js";
import { GatewayClient, GatewayError } from "./client.js";
import { SewerMap } from "./map.js";
import { reconstruct, RunView } from "./runview.js";
import { Timeline } from "./timeline.js";
import type { ObstacleKind, TaskKind, WorldDoc } from "./types.js";

type Mode = "author" | "run";

const TASK_KINDS: (TaskKind | "ENTRY/EXIT")[] = [
  "ENTRY/EXIT",
  "GOTO",
  "INSPECT",
  "WATER_SAMPLE",
];
const FAULT_KINDS: ObstacleKind[] = [
  "LIGHT_WASTE",
  "PUSHABLE",
  "STUCK_RISK",
  "IMMOVABLE",
];

class ConsoleApp {
  private client: GatewayClient;
  private world!: WorldDoc;
  private map!: SewerMap;
  private timeline!: Timeline;
  private author!: MissionAuthor;
  private view: RunView | null = null;
  private mode: Mode = "author";
  private runId: string | null = null;
  private polling = false;

  constructor(private root: HTMLElement, base: string) {
    this.client = new GatewayClient(base);
  }

  async boot(): Promise<void> {
    this.world = await this.client.world();
    this.author = new MissionAuthor(this.world);
    this.buildChrome();
    this.map = new SewerMap(
      this.root.querySelector(".map-pane")!,
      this.world,
      {
        onPipeClick: (p) => this.pipeClicked(p),
        onManholeClick: (m) => this.manholeClicked(m),
      },
    );
    this.timeline = new Timeline(this.root.querySelector(".timeline-pane")!);
    this.redraw();
  }

  private buildChrome(): void {
    this.root.innerHTML = `
      <div class="toolbar">
        <span class="stage-hint"></span>
        <label>task kind <select class="kind-picker"></select></label>
        <label>fault kind <select class="fault-picker"></select></label>
        <button class="launch" disabled>launch mission</button>
        <button class="start" disabled>start</button>
        <button class="pause" disabled>pause</button>
        <button class="step" disabled>step 10</button>
        <span class="status-line"></span>
      </div>
      <div class="panes">
        <div class="map-pane"></div>
        <div class="side-pane">
          <div class="goals-pane"></div>
          <pre class="mission-json"></pre>
          <div class="timeline-pane"></div>
        </div>
      </div>`;
    const kindPicker = this.root.querySelector<HTMLSelectElement>(".kind-picker")!;
    for (const k of TASK_KINDS) {
      const opt = document.createElement("option");
      opt.value = opt.textContent = k;
      kindPicker.appendChild(opt);
    }
    const faultPicker = this.root.querySelector<HTMLSelectElement>(".fault-picker")!;
    for (const k of FAULT_KINDS) {
      const opt = document.createElement("option");
      opt.value = opt.textContent = k;
      faultPicker.appendChild(opt);
    }
    this.button("launch").addEventListener("click", () => this.launch());
    this.button("start").addEventListener("click", () => this.control("start"));
    this.button("pause").addEventListener("click", () => this.control("pause"));
    this.button("step").addEventListener("click", () => this.control("step"));
  }

  private button(cls: string): HTMLButtonElement {
    return this.root.querySelector<HTMLButtonElement>(`.${cls}`)!;
  }

  private pickedKind(): TaskKind | undefined {
    const v = this.root.querySelector<HTMLSelectElement>(".kind-picker")!.value;
    return v === "ENTRY/EXIT" ? undefined : (v as TaskKind);
  }

  private pipeClicked(pipe: string): void {
    if (this.mode === "author") {
      try {
        this.author.clickPipe(pipe, this.pickedKind());
      } catch (e) {
        this.flash(String(e));
      }
      this.redraw();
      return;
    }
    // run mode: clicking a pipe injects the picked fault kind mid-pipe
    if (!this.runId) return;
    const kind = this.root.querySelector<HTMLSelectElement>(".fault-picker")!
      .value as ObstacleKind;
    const length =
      this.world.pipes.find((p) => p.id === pipe)?.length_cm ?? 100;
    this.client
      .injectFault(this.runId, pipe, kind, length / 2)
      .then(() => this.flash(`injected ${kind} into ${pipe}`))
      .catch((e: GatewayError) => this.flash(`injection rejected: ${e.message}`));
    // no optimistic update: the map changes only when events arrive
  }

  private manholeClicked(manhole: string): void {
    if (this.mode !== "author") return;
    try {
      this.author.clickManhole(manhole, this.pickedKind());
    } catch (e) {
      this.flash(String(e));
    }
    this.redraw();
  }

  private async launch(): Promise<void> {
    const mission = this.author.mission();
    const created = await this.client.createRun(mission);
    this.runId = created.id;
    this.mode = "run";
    this.view = new RunView(this.world);
    this.timeline.reset();
    this.redraw();
    this.poll();
  }

  private async control(verb: "start" | "pause" | "step"): Promise<void> {
    if (!this.runId) return;
    try {
      if (verb === "start") await this.client.start(this.runId);
      else if (verb === "pause") await this.client.pause(this.runId);
      else await this.client.step(this.runId, 10);
    } catch (e) {
      this.flash(String(e));
    }
    this.poll();
  }

  /** Pull new events and fold them into the view. */
  private async poll(): Promise<void> {
    if (!this.runId || !this.view || this.polling) return;
    this.polling = true;
    try {
      const batch = await this.client.events(this.runId, this.view.lastSeq);
      this.view.applyAll(batch.events);
      this.redraw();
      if (!batch.terminal) {
        setTimeout(() => {
          this.polling = false;
          this.poll();
        }, 300);
        return;
      }
    } finally {
      this.polling = false;
    }
    this.redraw();
  }

  /** Rebuild everything from the server after a reload. */
  async resume(runId: string): Promise<void> {
    const [events, state] = await Promise.all([
      this.client.events(runId, 0),
      this.client.state(runId),
    ]);
    this.runId = runId;
    this.mode = "run";
    this.view = reconstruct(this.world, events.events, state);
    this.timeline.reset();
    this.redraw();
    if (!events.terminal) this.poll();
  }

  private flash(message: string): void {
    this.root.querySelector(".status-line")!.textContent = message;
  }

  private redraw(): void {
    const missionReady = this.author.stage === "done";
    this.button("launch").disabled = !(this.mode === "author" && missionReady);
    const live = this.mode === "run" && this.view !== null && !this.view.terminal;
    this.button("start").disabled = !live;
    this.button("pause").disabled = !live;
    this.button("step").disabled = !live;

    const hint = this.root.querySelector(".stage-hint")!;
    if (this.mode === "author") {
      const stageText: Record<string, string> = {
        "pick-entry-pipe": "click the pipe the robot is lowered into",
        "pick-entry-heading": "click the manhole it should head for",
        "pick-tasks":
          "click pipes with a task kind picked; bare manhole click sets the exit",
        done: "mission ready",
      };
      hint.textContent = stageText[this.author.stage] ?? this.author.stage;
    } else {
      hint.textContent =
        `run ${this.runId}: ${this.view?.status ?? ""}` +
        (this.view?.recoveryState ? ` [${this.view.recoveryState}]` : "");
    }

    const missionPre = this.root.querySelector<HTMLElement>(".mission-json")!;
    if (this.mode === "author" && missionReady) {
      missionPre.textContent = serializeMission(this.author.mission());
    } else if (this.mode === "author") {
      missionPre.textContent = "";
    }

    const goalsPane = this.root.querySelector<HTMLElement>(".goals-pane")!;
    if (this.view?.goals) {
      const g = this.view.goals;
      goalsPane.textContent =
        `pending ${g.pending.join(", ") || "-"} | ` +
        `achieved ${g.achieved.join(", ") || "-"} | ` +
        `dropped ${Object.keys(g.dropped).join(", ") || "-"} | ` +
        `exit ${g.current_exit}`;
    }

    this.map.render({
      routePipes: this.view?.routePipes ?? [],
      previousRoutePipes: this.view?.routeDiff().removed ?? [],
      blockedPipes: this.view?.blockedPipes ?? [],
      robot: this.view?.robot ?? null,
      tasks: this.mode === "author" ? this.author.tasks : [],
      entryPipe: this.author.entryPipe,
      exitManhole: this.mode === "author" ? this.author.exit
        : this.view?.goals?.current_exit ?? null,
    });
    if (this.view) this.timeline.render(this.view.timeline);
  }
}

export async function bootConsole(
  root: HTMLElement,
  base = "",
): Promise<ConsoleApp> {
  const app = new ConsoleApp(root, base);
  await app.boot();
  return app;
}
