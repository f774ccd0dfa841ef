// Frame shapes of the pipeline's WebSocket protocol. Field names mirror the
// server exactly; everything arriving is treated as untrusted JSON and
// narrowed through the guards below.

export type Vec3 = [number, number, number];
export type Vec2 = [number, number];

export interface RegionBox {
  name?: string;
  min: Vec3;
  max: Vec3;
}

export interface PoseDict {
  position: Vec3;
  orientation: Vec2;
  label: string;
}

export interface HelloFrame {
  type: "hello";
  scenarios: string[];
  mode: string;
  tick: number;
}

export interface WorldObjectDict {
  id: string;
  name: string;
  attributes: Record<string, string>;
  position: Vec3;
  grasps: Record<string, PoseDict>;
}

export interface WorldFrame {
  type: "world";
  scenario: string;
  workspace: RegionBox;
  objects: WorldObjectDict[];
  obstacles: RegionBox[];
  keepouts: RegionBox[];
  named_poses: Record<string, PoseDict>;
}

export interface ParseFrame {
  type: "parse";
  t: number;
  status: "no_parse" | "partial" | "complete";
  n: number;
  chart: string;
  best: string | null;
  version: number;
}

export interface StateFrame {
  type: "state";
  t: number;
  p: Vec3;
  e: Vec2;
  v: Vec3;
  speed: number;
  event_id: number;
  max_slack: number;
  goal: Vec3 | null;
  regions: RegionBox[];
  via_points: Vec3[];
  keepouts: RegionBox[];
  planning: boolean;
}

export interface EventFrame {
  type: "event";
  id: number;
  t: number;
  goal: PoseDict | null;
  constraints: Array<Record<string, unknown> & { kind: string }>;
  cost_params: Record<string, number> | null;
  supersedes: number | null;
  plan: {
    goals: PoseDict[];
    orientation_box: Vec2 | null;
    keepouts: string[];
    speed_scale: number;
    actions: string[];
  };
}

export interface MetricsFrame {
  type: "metrics";
  t: number;
  t_task: number | null;
  events: number;
}

export interface ErrorFrame {
  type: "error";
  message: string;
}

export interface ModeFrame {
  type: "mode";
  mode: string;
}

export type ServerFrame =
  | HelloFrame
  | WorldFrame
  | ParseFrame
  | StateFrame
  | EventFrame
  | MetricsFrame
  | ErrorFrame
  | ModeFrame;

export function isServerFrame(value: unknown): value is ServerFrame {
  if (typeof value !== "object" || value === null) return false;
  const type = (value as { type?: unknown }).type;
  return (
    type === "hello" || type === "world" || type === "parse" ||
    type === "state" || type === "event" || type === "metrics" ||
    type === "error" || type === "mode"
  );
}

export type ClientMessage =
  | { word: string }
  | { select_scenario: string }
  | { reset: true }
  | { mode: string };
