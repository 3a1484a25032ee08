/** SVG map rendering: manholes, pipes, robot marker, blockage badges,
 * route highlights, task markers. Pure redraw from given view state. */

import { layoutWorld, MapLayout, pipeSegment } from "./layout.js";
import type { RobotMarker } from "./runview.js";
import type { TaskDoc, WorldDoc } from "./types.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export interface MapCallbacks {
  onPipeClick?: (pipe: string, ev: MouseEvent) => void;
  onManholeClick?: (manhole: string, ev: MouseEvent) => void;
}

export interface MapState {
  routePipes: string[];
  previousRoutePipes: string[];
  blockedPipes: string[];
  robot: RobotMarker | null;
  tasks: TaskDoc[];
  entryPipe: string | null;
  exitManhole: string | null;
}

export class SewerMap {
  private layout: MapLayout;
  private svg: SVGSVGElement;

  constructor(
    private root: HTMLElement,
    private world: WorldDoc,
    private callbacks: MapCallbacks = {},
  ) {
    this.layout = layoutWorld(world);
    this.svg = document.createElementNS(SVG_NS, "svg");
    this.svg.setAttribute("class", "sewer-map");
    this.root.appendChild(this.svg);
    this.fitViewBox();
  }

  private fitViewBox(): void {
    const xs: number[] = [];
    const ys: number[] = [];
    for (const p of this.layout.manholes.values()) {
      xs.push(p.x);
      ys.push(p.y);
    }
    for (const p of this.layout.stubEnds.values()) {
      xs.push(p.x);
      ys.push(p.y);
    }
    const pad = 40;
    const minX = Math.min(...xs) - pad;
    const minY = Math.min(...ys) - pad;
    const w = Math.max(...xs) - minX + pad;
    const h = Math.max(...ys) - minY + pad;
    this.svg.setAttribute("viewBox", `${minX} ${minY} ${w} ${h}`);
  }

  render(state: MapState): void {
    this.svg.replaceChildren();
    const taskPipes = new Map<string, string>();
    for (const t of state.tasks) taskPipes.set(t.target, t.kind);

    for (const pipe of this.world.pipes) {
      const [a, b] = pipeSegment(this.world, this.layout, pipe.id);
      const line = document.createElementNS(SVG_NS, "line");
      line.setAttribute("x1", String(a.x));
      line.setAttribute("y1", String(a.y));
      line.setAttribute("x2", String(b.x));
      line.setAttribute("y2", String(b.y));
      const classes = ["pipe"];
      if (state.routePipes.includes(pipe.id)) classes.push("route");
      else if (state.previousRoutePipes.includes(pipe.id)) classes.push("old-route");
      if (state.blockedPipes.includes(pipe.id)) classes.push("blocked");
      if (pipe.id === state.entryPipe) classes.push("entry");
      line.setAttribute("class", classes.join(" "));
      line.setAttribute("data-pipe", pipe.id);
      line.addEventListener("click", (ev) =>
        this.callbacks.onPipeClick?.(pipe.id, ev),
      );
      this.svg.appendChild(line);

      const mid = { x: (a.x + b.x) / 2, y: (a.y + b.y) / 2 };
      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(mid.x + 4));
      label.setAttribute("y", String(mid.y - 4));
      label.setAttribute("class", "pipe-label");
      label.textContent = pipe.id;
      this.svg.appendChild(label);

      if (state.blockedPipes.includes(pipe.id)) {
        const badge = document.createElementNS(SVG_NS, "text");
        badge.setAttribute("x", String(mid.x - 8));
        badge.setAttribute("y", String(mid.y + 12));
        badge.setAttribute("class", "blockage-badge");
        badge.textContent = "⛔";
        this.svg.appendChild(badge);
      }
      const taskKind = taskPipes.get(pipe.id);
      if (taskKind) {
        const marker = document.createElementNS(SVG_NS, "text");
        marker.setAttribute("x", String(mid.x - 8));
        marker.setAttribute("y", String(mid.y - 10));
        marker.setAttribute("class", "task-marker");
        marker.textContent = taskKind === "WATER_SAMPLE" ? "\u{1f4a7}" :
          taskKind === "INSPECT" ? "\u{1f50d}" : "⚑";
        this.svg.appendChild(marker);
      }
    }

    for (const m of this.world.manholes) {
      const p = this.layout.manholes.get(m.id)!;
      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(p.x));
      circle.setAttribute("cy", String(p.y));
      circle.setAttribute("r", "10");
      const classes = ["manhole"];
      if (!m.recoverable) classes.push("no-recovery");
      if (m.id === state.exitManhole) classes.push("exit");
      if (taskPipes.has(m.id)) classes.push("task-target");
      circle.setAttribute("class", classes.join(" "));
      circle.setAttribute("data-manhole", m.id);
      circle.addEventListener("click", (ev) =>
        this.callbacks.onManholeClick?.(m.id, ev),
      );
      this.svg.appendChild(circle);

      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(p.x + 12));
      label.setAttribute("y", String(p.y + 4));
      label.setAttribute("class", "manhole-label");
      label.textContent = m.id;
      this.svg.appendChild(label);
    }

    if (state.robot) {
      let pos;
      if (state.robot.kind === "manhole") {
        pos = this.layout.manholes.get(state.robot.id);
      } else {
        const [a, b] = pipeSegment(this.world, this.layout, state.robot.id);
        pos = { x: (a.x + b.x) / 2, y: (a.y + b.y) / 2 };
      }
      if (pos) {
        const robot = document.createElementNS(SVG_NS, "circle");
        robot.setAttribute("cx", String(pos.x));
        robot.setAttribute("cy", String(pos.y));
        robot.setAttribute("r", "6");
        robot.setAttribute("class", "robot");
        this.svg.appendChild(robot);
        const title = document.createElementNS(SVG_NS, "title");
        title.textContent = state.robot.detail;
        robot.appendChild(title);
      }
    }
  }
}
