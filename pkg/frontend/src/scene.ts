// 2D scene drawing: x-y and y-z projections of the workspace, corridor
// regions, keep-outs, obstacles, trajectory trace, goal, and the
// end-effector. The projection/rect/containment helpers are pure so tests
// can check geometric consistency without a canvas.

import { RegionBox, Vec3 } from "./protocol.js";
import { ViewState } from "./view_state.js";

export type Plane = "xy" | "yz";

export function project(p: Vec3, plane: Plane): [number, number] {
  return plane === "xy" ? [p[0], p[1]] : [p[1], p[2]];
}

export interface Rect {
  u0: number;
  v0: number;
  u1: number;
  v1: number;
}

export function regionRect(region: RegionBox, plane: Plane): Rect {
  const [u0, v0] = project(region.min, plane);
  const [u1, v1] = project(region.max, plane);
  return { u0, v0, u1, v1 };
}

export function pointInRegion(p: Vec3, region: RegionBox, tol = 1e-9): boolean {
  return (
    p[0] >= region.min[0] - tol && p[0] <= region.max[0] + tol &&
    p[1] >= region.min[1] - tol && p[1] <= region.max[1] + tol &&
    p[2] >= region.min[2] - tol && p[2] <= region.max[2] + tol
  );
}

export function pointInAnyRegion(p: Vec3, regions: RegionBox[], tol = 1e-9): boolean {
  return regions.some((r) => pointInRegion(p, r, tol));
}

export interface Transform {
  scale: number;
  offU: number;
  offV: number;
  height: number;
}

// world rect -> canvas pixels, preserving aspect, v axis flipped (up is up)
export function fitTransform(
  bounds: Rect,
  width: number,
  height: number,
  pad = 12,
): Transform {
  const du = Math.max(bounds.u1 - bounds.u0, 1e-6);
  const dv = Math.max(bounds.v1 - bounds.v0, 1e-6);
  const scale = Math.min((width - 2 * pad) / du, (height - 2 * pad) / dv);
  return {
    scale,
    offU: pad - bounds.u0 * scale + ((width - 2 * pad) - du * scale) / 2,
    offV: pad - bounds.v0 * scale + ((height - 2 * pad) - dv * scale) / 2,
    height,
  };
}

export function toCanvas(t: Transform, u: number, v: number): [number, number] {
  return [u * t.scale + t.offU, t.height - (v * t.scale + t.offV)];
}

function drawRect(
  ctx: CanvasRenderingContext2D,
  t: Transform,
  rect: Rect,
  fill: string,
  stroke: string,
): void {
  const [x0, y0] = toCanvas(t, rect.u0, rect.v0);
  const [x1, y1] = toCanvas(t, rect.u1, rect.v1);
  ctx.fillStyle = fill;
  ctx.strokeStyle = stroke;
  ctx.lineWidth = 1;
  const x = Math.min(x0, x1);
  const y = Math.min(y0, y1);
  ctx.fillRect(x, y, Math.abs(x1 - x0), Math.abs(y1 - y0));
  ctx.strokeRect(x, y, Math.abs(x1 - x0), Math.abs(y1 - y0));
}

function drawPolyline(
  ctx: CanvasRenderingContext2D,
  t: Transform,
  points: Vec3[],
  plane: Plane,
  color: string,
  width: number,
): void {
  if (points.length < 2) return;
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  points.forEach((p, i) => {
    const [x, y] = toCanvas(t, ...project(p, plane));
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}

export function drawScene(
  ctx: CanvasRenderingContext2D,
  view: ViewState,
  plane: Plane,
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  const workspace = view.world?.workspace;
  if (!workspace) {
    ctx.fillStyle = "#667";
    ctx.font = "13px sans-serif";
    ctx.fillText("waiting for world…", 14, 22);
    return;
  }
  const t = fitTransform(regionRect(workspace, plane), width, height);

  drawRect(ctx, t, regionRect(workspace, plane), "#10141c", "#39415a");
  for (const obstacle of view.world?.obstacles ?? []) {
    drawRect(ctx, t, regionRect(obstacle, plane), "rgba(120,128,140,0.45)", "#6b7280");
  }
  for (const region of view.state?.regions ?? []) {
    drawRect(ctx, t, regionRect(region, plane), "rgba(56,132,255,0.14)", "rgba(110,168,254,0.8)");
  }
  for (const keepout of view.state?.keepouts ?? []) {
    drawRect(ctx, t, regionRect(keepout, plane), "rgba(255,82,82,0.22)", "#ff5252");
  }
  for (const obj of view.world?.objects ?? []) {
    const [x, y] = toCanvas(t, ...project(obj.position, plane));
    ctx.fillStyle = "#ffd54f";
    ctx.beginPath();
    ctx.arc(x, y, 4, 0, Math.PI * 2);
    ctx.fill();
    ctx.fillStyle = "#cdd3e0";
    ctx.font = "11px sans-serif";
    ctx.fillText(obj.name, x + 6, y - 4);
  }

  if (view.state?.via_points?.length) {
    drawPolyline(ctx, t, view.state.via_points, plane, "rgba(110,168,254,0.7)", 1);
  }
  drawPolyline(ctx, t, view.trail, plane, "#ff8a65", 2);

  const goal = view.state?.goal;
  if (goal) {
    const [x, y] = toCanvas(t, ...project(goal, plane));
    ctx.strokeStyle = "#69f0ae";
    ctx.lineWidth = 2;
    ctx.beginPath();
    ctx.moveTo(x - 6, y);
    ctx.lineTo(x + 6, y);
    ctx.moveTo(x, y - 6);
    ctx.lineTo(x, y + 6);
    ctx.stroke();
  }
  const p = view.state?.p;
  if (p) {
    const [x, y] = toCanvas(t, ...project(p, plane));
    ctx.fillStyle = "#e3ecff";
    ctx.beginPath();
    ctx.arc(x, y, 5, 0, Math.PI * 2);
    ctx.fill();
    ctx.strokeStyle = "#82b1ff";
    ctx.stroke();
  }
  ctx.fillStyle = "#8a93ab";
  ctx.font = "11px sans-serif";
  ctx.fillText(plane === "xy" ? "x-y plane" : "y-z plane", 14, 16);
}
