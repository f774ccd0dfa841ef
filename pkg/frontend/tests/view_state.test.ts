import { describe, expect, it } from "vitest";

import { StateFrame } from "../src/protocol.js";
import { ViewState } from "../src/view_state.js";

function stateFrame(t: number, extra: Partial<StateFrame> = {}): StateFrame {
  return {
    type: "state",
    t,
    p: [0.1, 0.2, 0.3],
    e: [0.0, 0.0],
    v: [0, 0, 0],
    speed: 0,
    event_id: 0,
    max_slack: 0,
    goal: null,
    regions: [],
    via_points: [],
    keepouts: [],
    planning: false,
    ...extra,
  };
}

describe("ViewState", () => {
  it("keeps state timestamps monotone and drops stale frames", () => {
    const view = new ViewState();
    view.apply(stateFrame(1.0));
    view.apply(stateFrame(2.0));
    view.apply(stateFrame(1.5));
    expect(view.state?.t).toBe(2.0);
    expect(view.droppedStale).toBe(1);
    expect(view.trail.length).toBe(2);
  });

  it("unknown frame types are counted, never thrown", () => {
    const view = new ViewState();
    expect(() => view.apply({ type: "telemetry2", x: 1 })).not.toThrow();
    expect(() => view.apply(42)).not.toThrow();
    expect(() => view.applyRaw("{not json")).not.toThrow();
    expect(view.unknownFrames).toBe(3);
  });

  it("orientation band tightens when an event carries a box", () => {
    const view = new ViewState();
    view.apply(stateFrame(0.1));
    expect(view.samples[0].bound1).toBeCloseTo(1.5);
    view.apply({
      type: "event",
      id: 2,
      t: 6.4,
      goal: null,
      constraints: [{ kind: "safety", orientation_box: [0.15, 0.15] }],
      cost_params: null,
      supersedes: 1,
      plan: {
        goals: [],
        orientation_box: [0.15, 0.15],
        keepouts: [],
        speed_scale: 1,
        actions: [],
      },
    });
    view.apply(stateFrame(6.5));
    const latest = view.samples[view.samples.length - 1];
    expect(latest.bound1).toBeCloseTo(0.15);
    expect(view.events.length).toBe(1);
  });

  it("corridor version bumps when the region set changes", () => {
    const view = new ViewState();
    const regionA = { name: "a", min: [0, 0, 0] as [number, number, number], max: [1, 1, 1] as [number, number, number] };
    const regionB = { name: "b", min: [1, 0, 0] as [number, number, number], max: [2, 1, 1] as [number, number, number] };
    view.apply(stateFrame(0.1, { regions: [regionA] }));
    view.apply(stateFrame(0.2, { regions: [regionA] }));
    const before = view.corridorVersion;
    view.apply(stateFrame(0.3, { regions: [regionA, regionB] }));
    expect(view.corridorVersion).toBe(before + 1);
  });

  it("world frame resets the run history", () => {
    const view = new ViewState();
    view.apply(stateFrame(5.0));
    view.apply({
      type: "world",
      scenario: "scenario2_upright",
      workspace: { min: [-1, -1, 0], max: [1, 1, 1] },
      objects: [],
      obstacles: [],
      keepouts: [],
      named_poses: {},
    });
    expect(view.trail).toEqual([]);
    expect(view.samples).toEqual([]);
    // time restarts after a reset; an earlier timestamp must be accepted
    view.apply(stateFrame(0.1));
    expect(view.state?.t).toBe(0.1);
  });
});
