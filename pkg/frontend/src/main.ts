// Page assembly: input box streaming words, scene projections, strip
// charts, the live parser table, and the event timeline.

import { SteerClient } from "./client.js";
import { drawOrientationStrip, drawSpeedSparkline } from "./charts.js";
import { drawScene } from "./scene.js";
import { ViewState } from "./view_state.js";
import { WordEmitter } from "./words.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const view = new ViewState();
const wsUrl =
  new URLSearchParams(location.search).get("ws") ??
  `ws://${location.hostname || "127.0.0.1"}:8700/ws`;

const input = el<HTMLInputElement>("word-input");
const status = el<HTMLSpanElement>("status");
const reconnect = el<HTMLButtonElement>("reconnect");
const scenarioSelect = el<HTMLSelectElement>("scenario");
const resetButton = el<HTMLButtonElement>("reset");
const chartPanel = el<HTMLPreElement>("chart");
const bestLine = el<HTMLDivElement>("best");
const eventList = el<HTMLUListElement>("events");
const errorLine = el<HTMLDivElement>("errors");
const sceneXY = el<HTMLCanvasElement>("scene-xy");
const sceneYZ = el<HTMLCanvasElement>("scene-yz");
const stripE = el<HTMLCanvasElement>("strip-e");
const stripV = el<HTMLCanvasElement>("strip-v");

const client = new SteerClient(wsUrl, view, syncControls);
const emitter = new WordEmitter((word) => {
  client.sendWord(word);
});

function syncControls(): void {
  status.textContent = view.connection;
  status.className = `status ${view.connection}`;
  input.disabled = view.connection !== "open";
  reconnect.hidden = view.connection !== "closed";
  if (view.hello && scenarioSelect.options.length !== view.hello.scenarios.length) {
    scenarioSelect.innerHTML = "";
    for (const name of view.hello.scenarios) {
      const option = document.createElement("option");
      option.value = name;
      option.textContent = name;
      scenarioSelect.appendChild(option);
    }
  }
  if (view.world) scenarioSelect.value = view.world.scenario;
}

input.addEventListener("input", () => {
  input.value = emitter.input(input.value);
});
input.addEventListener("keydown", (ev) => {
  if (ev.key === "Enter") {
    input.value = emitter.flush(input.value);
  }
});
reconnect.addEventListener("click", () => client.connect());
resetButton.addEventListener("click", () => client.send({ reset: true }));
scenarioSelect.addEventListener("change", () => {
  client.send({ select_scenario: scenarioSelect.value });
});

function renderPanels(): void {
  if (view.parse) {
    chartPanel.textContent = view.parse.chart;
    bestLine.textContent = view.parse.best
      ? `${view.parse.status}:  ${view.parse.best}`
      : `${view.parse.status}`;
  }
  errorLine.textContent = view.errors.slice(-1)[0] ?? "";
  if (eventList.childElementCount !== view.events.length) {
    eventList.innerHTML = "";
    for (const event of view.events) {
      const item = document.createElement("li");
      const kinds = event.constraints.map((c) => c.kind).join(", ") || "goal";
      const label = event.goal?.label ?? "";
      item.textContent = `#${event.id} @ ${event.t.toFixed(1)}s  ${kinds} ${label}`;
      eventList.appendChild(item);
    }
  }
  let suffix = "";
  if (view.metrics?.t_task != null) suffix = ` — goal reached, t_task ${view.metrics.t_task.toFixed(1)}s`;
  document.title = `wordsteer${suffix}`;
}

function frame(): void {
  const ctxXY = sceneXY.getContext("2d");
  const ctxYZ = sceneYZ.getContext("2d");
  const ctxE = stripE.getContext("2d");
  const ctxV = stripV.getContext("2d");
  if (ctxXY) drawScene(ctxXY, view, "xy", sceneXY.width, sceneXY.height);
  if (ctxYZ) drawScene(ctxYZ, view, "yz", sceneYZ.width, sceneYZ.height);
  if (ctxE) drawOrientationStrip(ctxE, view.samples, stripE.width, stripE.height);
  if (ctxV) drawSpeedSparkline(ctxV, view.samples, stripV.width, stripV.height);
  renderPanels();
  requestAnimationFrame(frame);
}

client.connect();
requestAnimationFrame(frame);
