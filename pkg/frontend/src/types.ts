/** Wire types mirroring the gateway's documented JSON contract. */

export interface PortDoc {
  index: number;
  pipe: string;
  angle_deg: number;
  invert_offset_cm: number;
}

export interface ManholeDoc {
  id: string;
  diameter_cm: number;
  recoverable: boolean;
  ports: PortDoc[];
  coord: [number, number] | null;
}

export interface PipeDoc {
  id: string;
  length_cm: number;
  diameter_cm: number;
  endpoints: [string, number][];
}

export interface WorldDoc {
  manholes: ManholeDoc[];
  pipes: PipeDoc[];
}

export type TaskKind = "GOTO" | "INSPECT" | "WATER_SAMPLE";

export interface TaskDoc {
  id: string;
  kind: TaskKind;
  target: string;
}

export interface MissionDoc {
  entry: { pipe: string; towards: string };
  exit: string;
  time_budget_s: number;
  tasks: TaskDoc[];
}

export type ObstacleKind = "LIGHT_WASTE" | "PUSHABLE" | "STUCK_RISK" | "IMMOVABLE";

export interface RunEventDoc {
  seq: number;
  t_sim_s: number;
  kind: string;
  payload: Record<string, unknown>;
}

export interface GoalsDoc {
  pending: string[];
  achieved: string[];
  dropped: Record<string, string>;
  current_exit: string;
}

export interface RunStateDoc {
  status: string;
  robot:
    | { in_pipe: string; facing: string | null; position_cm: number }
    | { at_manhole: string; port: number };
  parked_at: string | null;
  goals: GoalsDoc;
  blocked_pipes: string[];
  plan: string;
  plans_so_far: number;
  clock_s: number;
  energy_remaining_s: number;
  overrun: boolean;
  paused: boolean;
}
