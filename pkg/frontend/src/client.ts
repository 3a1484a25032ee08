/** Thin fetch wrapper over the mission service. No state lives here. */

import type {
  MissionDoc,
  ObstacleKind,
  RunEventDoc,
  RunStateDoc,
  WorldDoc,
} from "./types.js";

export class GatewayError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

async function expectJson<T>(resp: Response): Promise<T> {
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const body = await resp.json();
      if (body && typeof body.detail === "string") detail = body.detail;
    } catch {
      // keep the status text
    }
    throw new GatewayError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class GatewayClient {
  constructor(private base: string = "") {}

  world(): Promise<WorldDoc> {
    return fetch(`${this.base}/world`).then((r) => expectJson<WorldDoc>(r));
  }

  createRun(
    mission: MissionDoc,
    scenario?: unknown,
    seed?: number,
  ): Promise<{ id: string; status: string }> {
    const body: Record<string, unknown> = { mission };
    if (scenario !== undefined) body.scenario = scenario;
    if (seed !== undefined) body.seed = seed;
    return fetch(`${this.base}/mission`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => expectJson(r));
  }

  start(runId: string): Promise<{ status: string }> {
    return fetch(`${this.base}/run/${runId}/start`, { method: "POST" }).then(
      (r) => expectJson(r),
    );
  }

  pause(runId: string): Promise<{ status: string }> {
    return fetch(`${this.base}/run/${runId}/pause`, { method: "POST" }).then(
      (r) => expectJson(r),
    );
  }

  step(runId: string, n = 1): Promise<{ status: string }> {
    return fetch(`${this.base}/run/${runId}/step?n=${n}`, {
      method: "POST",
    }).then((r) => expectJson(r));
  }

  injectFault(
    runId: string,
    pipe: string,
    kind: ObstacleKind,
    positionCm: number,
  ): Promise<unknown> {
    return fetch(`${this.base}/run/${runId}/fault`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ pipe, kind, position_cm: positionCm }),
    }).then((r) => expectJson(r));
  }

  events(
    runId: string,
    since = 0,
  ): Promise<{ events: RunEventDoc[]; terminal: boolean }> {
    return fetch(`${this.base}/run/${runId}/events?since=${since}`).then((r) =>
      expectJson(r),
    );
  }

  state(runId: string): Promise<RunStateDoc> {
    return fetch(`${this.base}/run/${runId}/state`).then((r) =>
      expectJson<RunStateDoc>(r),
    );
  }
}
