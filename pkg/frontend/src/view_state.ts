// Client-side model of everything the panels render. Frames mutate it in
// arrival order; state frames older than the newest rendered one are
// dropped, and unknown frame types are counted but never throw.

import {
  EventFrame,
  HelloFrame,
  MetricsFrame,
  ParseFrame,
  StateFrame,
  Vec2,
  Vec3,
  WorldFrame,
  isServerFrame,
} from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

export interface Sample {
  t: number;
  speed: number;
  e1: number;
  e2: number;
  bound1: number;
  bound2: number;
}

const DEFAULT_BOUND = 1.5;
const MAX_SAMPLES = 1200;
const MAX_TRAIL = 4000;

export class ViewState {
  connection: ConnectionStatus = "connecting";
  hello: HelloFrame | null = null;
  world: WorldFrame | null = null;
  parse: ParseFrame | null = null;
  state: StateFrame | null = null;
  metrics: MetricsFrame | null = null;
  events: EventFrame[] = [];
  errors: string[] = [];
  trail: Vec3[] = [];
  samples: Sample[] = [];
  orientationBox: Vec2 = [DEFAULT_BOUND, DEFAULT_BOUND];
  corridorVersion = 0;
  droppedStale = 0;
  unknownFrames = 0;
  private lastStateT = -Infinity;
  private regionsKey = "";

  applyRaw(data: string): void {
    let parsed: unknown;
    try {
      parsed = JSON.parse(data);
    } catch {
      this.unknownFrames += 1;
      console.warn("undecodable frame", data.slice(0, 80));
      return;
    }
    this.apply(parsed);
  }

  apply(frame: unknown): void {
    if (!isServerFrame(frame)) {
      this.unknownFrames += 1;
      console.warn("unknown frame type", frame);
      return;
    }
    switch (frame.type) {
      case "hello":
        this.hello = frame;
        return;
      case "world":
        this.world = frame;
        this.resetRun();
        return;
      case "parse":
        this.parse = frame;
        return;
      case "state":
        this.applyState(frame);
        return;
      case "event":
        this.events.push(frame);
        if (frame.plan.orientation_box) {
          this.orientationBox = frame.plan.orientation_box;
        }
        return;
      case "metrics":
        this.metrics = frame;
        return;
      case "error":
        this.errors.push(frame.message);
        return;
      case "mode":
        if (this.hello) this.hello.mode = frame.mode;
        return;
    }
  }

  private applyState(frame: StateFrame): void {
    if (frame.t < this.lastStateT) {
      this.droppedStale += 1;
      return;
    }
    this.lastStateT = frame.t;
    this.state = frame;
    this.trail.push(frame.p);
    if (this.trail.length > MAX_TRAIL) this.trail.splice(0, this.trail.length - MAX_TRAIL);
    this.samples.push({
      t: frame.t,
      speed: frame.speed,
      e1: frame.e[0],
      e2: frame.e[1],
      bound1: this.orientationBox[0],
      bound2: this.orientationBox[1],
    });
    if (this.samples.length > MAX_SAMPLES) {
      this.samples.splice(0, this.samples.length - MAX_SAMPLES);
    }
    // a replan can keep the same free boxes while moving the via polyline
    const key = JSON.stringify([frame.regions, frame.via_points]);
    if (key !== this.regionsKey) {
      this.regionsKey = key;
      this.corridorVersion += 1;
    }
  }

  private resetRun(): void {
    this.trail = [];
    this.samples = [];
    this.events = [];
    this.metrics = null;
    this.parse = null;
    this.state = null;
    this.orientationBox = [DEFAULT_BOUND, DEFAULT_BOUND];
    this.lastStateT = -Infinity;
    this.regionsKey = "";
    this.corridorVersion = 0;
  }
}
