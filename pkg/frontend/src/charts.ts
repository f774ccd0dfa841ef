// Strip charts: the two orientation-error angles inside their permitted
// band, and a velocity-norm sparkline.

import { Sample } from "./view_state.js";

export function drawOrientationStrip(
  ctx: CanvasRenderingContext2D,
  samples: Sample[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);
  if (samples.length < 2) return;
  const t0 = samples[0].t;
  const t1 = samples[samples.length - 1].t;
  const span = Math.max(t1 - t0, 1e-6);
  const eMax = 1.6;
  const x = (t: number) => ((t - t0) / span) * (width - 8) + 4;
  const y = (e: number) => height / 2 - (e / eMax) * (height / 2 - 4);

  // permitted band (can tighten mid-run)
  ctx.fillStyle = "rgba(148,160,184,0.18)";
  for (let i = 0; i < samples.length - 1; i++) {
    const s = samples[i];
    const bound = Math.min(s.bound1, eMax);
    const xa = x(s.t);
    const xb = x(samples[i + 1].t);
    ctx.fillRect(xa, y(bound), Math.max(xb - xa, 1), y(-bound) - y(bound));
  }
  const seriesColors: Array<[keyof Sample, string]> = [
    ["e1", "#ffab91"],
    ["e2", "#80cbc4"],
  ];
  for (const [key, color] of seriesColors) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    samples.forEach((s, i) => {
      const px = x(s.t);
      const py = y(s[key] as number);
      if (i === 0) ctx.moveTo(px, py);
      else ctx.lineTo(px, py);
    });
    ctx.stroke();
  }
  ctx.strokeStyle = "#39415a";
  ctx.beginPath();
  ctx.moveTo(0, height / 2);
  ctx.lineTo(width, height / 2);
  ctx.stroke();
  ctx.fillStyle = "#8a93ab";
  ctx.font = "11px sans-serif";
  ctx.fillText("orientation error e1 / e2 (rad) with permitted band", 8, 12);
}

export function drawSpeedSparkline(
  ctx: CanvasRenderingContext2D,
  samples: Sample[],
  width: number,
  height: number,
): void {
  ctx.clearRect(0, 0, width, height);
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);
  if (samples.length < 2) return;
  const t0 = samples[0].t;
  const span = Math.max(samples[samples.length - 1].t - t0, 1e-6);
  const vMax = Math.max(0.3, ...samples.map((s) => s.speed));
  ctx.strokeStyle = "#82b1ff";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  samples.forEach((s, i) => {
    const px = ((s.t - t0) / span) * (width - 8) + 4;
    const py = height - 4 - (s.speed / vMax) * (height - 18);
    if (i === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
  ctx.fillStyle = "#8a93ab";
  ctx.font = "11px sans-serif";
  const latest = samples[samples.length - 1];
  ctx.fillText(`speed ${latest.speed.toFixed(3)} m/s`, 8, 12);
}
