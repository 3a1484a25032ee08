/** Event feed rendering: recovery phases and replans stand out. */

import type { TimelineEntry } from "./runview.js";

export class Timeline {
  private list: HTMLOListElement;
  private rendered = 0;

  constructor(root: HTMLElement) {
    this.list = document.createElement("ol");
    this.list.className = "timeline";
    root.appendChild(this.list);
  }

  render(entries: TimelineEntry[]): void {
    for (const entry of entries.slice(this.rendered)) {
      const item = document.createElement("li");
      item.className = `timeline-entry ${entry.flavor}`;
      const t = document.createElement("span");
      t.className = "t";
      t.textContent = `${entry.tSimS.toFixed(1)}s`;
      const text = document.createElement("span");
      text.textContent = entry.text;
      item.append(t, text);
      this.list.appendChild(item);
    }
    this.rendered = entries.length;
    this.list.scrollTop = this.list.scrollHeight;
  }

  reset(): void {
    this.list.replaceChildren();
    this.rendered = 0;
  }
}
