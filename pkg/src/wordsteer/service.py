"""WebSocket service: stream words in, watch the pipeline act in real time.

One shared steering session per server. Clients send small JSON frames
(``{"word": ...}``, ``{"select_scenario": ...}``, ``{"reset": true}``,
``{"mode": ...}``); the server broadcasts typed frames: ``state`` at the
control rate, ``parse`` after every word, ``event`` when an instruction
resolves, ``metrics`` when the goal is reached, ``error`` for rejected
input (the session survives malformed frames).

The control loop never waits for planning: plans are computed in a worker
and handed over through a latest-wins mailbox; a newer instruction cancels
and restarts the planning job.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import time

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .chart import Chart, best_parse, current_result, dump, feed_word
from .controller import ControlInput, EEState, advance, apply_event, step
from .corridor import NoCorridorError, initial_sets, replan_from
from .events import CostParams, InstructionEvent
from .geometry import region_to_dict
from .lexicon import load_shipped_grammar
from .resolver import UnresolvedReferentError, resolve
from .runner import GOAL_POS_TOL, GOAL_SPEED_TOL, measured_violation
from .scenario import load_scenario, shipped_scenarios
from .world import Pose

TICK = 0.1
DEFAULT_BASELINE_LATENCY = 5.6


class SteerSession:
    """Interactive pipeline fed by client words instead of a scripted stream."""

    def __init__(self, scenario_name: str = "scenario1", speed: float = 1.0):
        self.dictionary = load_shipped_grammar()
        self.speed = speed
        self.mode = "online"
        self.clients: set[WebSocket] = set()
        self.plan_task: asyncio.Task | None = None
        self.mailbox: tuple[InstructionEvent, object, list] | None = None
        self.load_scenario_world(scenario_name)

    def load_scenario_world(self, name: str) -> None:
        scenario = load_scenario(name)
        self.scenario_name = name
        self.world = scenario.world
        self.initial_state = scenario.initial_state
        self.seed = scenario.seed
        self.reset_session()

    def reset_session(self) -> None:
        self.chart = Chart()
        self.submitted_signature = None
        self.last_event: InstructionEvent | None = None
        self.event_counter = 0
        self.sets = None
        self.params = CostParams()
        self.goal_queue: list[Pose] = []
        self.achieved: set[str] = set()
        self.state: EEState = self.initial_state
        self.u_prev = ControlInput()
        self.solution = None
        self.t = 0.0
        self.active_event_id = 0
        self.first_word_t: float | None = None
        self.goal_reached_t: float | None = None
        self.mailbox = None
        if self.plan_task is not None:
            self.plan_task.cancel()
            self.plan_task = None

    # --- frames -----------------------------------------------------------

    def world_frame(self) -> dict:
        return {
            "type": "world",
            "scenario": self.scenario_name,
            **self.world.to_dict(),
        }

    def hello_frame(self) -> dict:
        return {
            "type": "hello",
            "scenarios": shipped_scenarios(),
            "mode": self.mode,
            "tick": TICK,
        }

    def parse_frame(self) -> dict:
        result = current_result(self.chart)
        return {
            "type": "parse",
            "t": self.t,
            "status": result.status,
            "n": self.chart.n,
            "chart": dump(self.chart),
            "best": result.best.render_semantics() if result.best else None,
            "version": result.version,
        }

    def state_frame(self) -> dict:
        corridor = self.sets.task if self.sets is not None else None
        return {
            "type": "state",
            "t": round(self.t, 6),
            "p": [float(v) for v in self.state.p],
            "e": [float(v) for v in self.state.e],
            "v": [float(v) for v in self.state.v],
            "speed": float(self.state.speed),
            "event_id": self.active_event_id,
            "max_slack": float(measured_violation(self.state, self.sets)),
            "goal": list(self.goal_queue[0].position) if self.goal_queue else None,
            "regions": [region_to_dict(r) for r in corridor.regions] if corridor else [],
            "via_points": [list(v) for v in corridor.via_points] if corridor else [],
            "keepouts": [region_to_dict(r) for r in self.sets.keepouts] if self.sets else [],
            "planning": self.plan_task is not None and not self.plan_task.done(),
        }

    def metrics_frame(self) -> dict:
        t_task = None
        if self.first_word_t is not None and self.goal_reached_t is not None:
            t_task = round(self.goal_reached_t - self.first_word_t, 6)
        return {"type": "metrics", "t": self.t, "t_task": t_task, "events": self.event_counter}

    # --- client input -------------------------------------------------------

    async def handle(self, message: dict) -> list[dict]:
        if not isinstance(message, dict):
            return [{"type": "error", "message": "frame must be a JSON object"}]
        if "word" in message:
            return await self.handle_word(str(message["word"]))
        if "select_scenario" in message:
            name = str(message["select_scenario"])
            if name not in shipped_scenarios():
                return [{"type": "error", "message": f"unknown scenario {name!r}"}]
            self.load_scenario_world(name)
            return [self.world_frame(), self.parse_frame()]
        if "reset" in message:
            self.reset_session()
            return [self.world_frame(), self.parse_frame()]
        if "mode" in message:
            mode = str(message["mode"])
            if mode not in ("online", "offline_baseline"):
                return [{"type": "error", "message": f"unknown mode {mode!r}"}]
            self.mode = mode
            return [{"type": "mode", "mode": mode}]
        return [{"type": "error", "message": "unknown frame"}]

    async def handle_word(self, word: str) -> list[dict]:
        if self.first_word_t is None:
            self.first_word_t = self.t
        result = feed_word(self.chart, word, self.dictionary)
        frames = [self.parse_frame()]
        if result.status != "complete":
            return frames
        node = best_parse(result, self.world)
        if node is None:
            if result.best is not None:
                frames.append(
                    {"type": "error", "message": "unresolved referent; keeping current plan"}
                )
            return frames
        if node.signature() == self.submitted_signature:
            return frames
        try:
            event = resolve(
                node, self.world, prior=self.last_event,
                seed=self.seed, timestamp=self.t, event_id=self.event_counter + 1,
            )
        except UnresolvedReferentError as err:
            frames.append({"type": "error", "message": f"unresolved referent {err.symbol!r}"})
            return frames
        self.submitted_signature = node.signature()
        self.event_counter += 1
        self.last_event = event
        self.params = apply_event(self.params, event)
        self.active_event_id = event.id
        self.goal_reached_t = None
        frames.append({"type": "event", **event.to_dict()})
        self.start_planning(event)
        return frames

    # --- planning worker ----------------------------------------------------

    def start_planning(self, event: InstructionEvent) -> None:
        if self.plan_task is not None and not self.plan_task.done():
            self.plan_task.cancel()
        self.plan_task = asyncio.create_task(self._plan_job(event))

    async def _plan_job(self, event: InstructionEvent) -> None:
        if self.mode == "offline_baseline":
            await asyncio.sleep(DEFAULT_BASELINE_LATENCY / self.speed)
        try:
            sets, queue = await asyncio.to_thread(self._compute_sets, event)
        except (NoCorridorError, UnresolvedReferentError) as err:
            await self.broadcast({"type": "error", "message": f"planning failed: {err}"})
            return
        self.mailbox = (event, sets, queue)

    def _compute_sets(self, event: InstructionEvent):
        remaining = [g for g in event.plan.goals if g.label not in self.achieved]
        if not remaining and event.plan.goals:
            remaining = [event.plan.goals[-1]]
        pose = Pose(self.state.p, self.state.e, label="current")
        if self.sets is None:
            if not remaining:
                raise NoCorridorError("event carries no goal")
            sets = initial_sets(
                pose, remaining[0], self.world,
                keepout_names=event.plan.keepout_names,
                orientation_box=event.plan.orientation_box,
            )
        else:
            retarget = InstructionEvent(
                id=event.id, timestamp=event.timestamp,
                goal=remaining[0] if remaining else self.sets.task.goal,
                constraints=event.constraints, cost_params=event.cost_params,
                supersedes=event.supersedes, plan=event.plan,
            )
            sets = replan_from(pose, retarget, self.sets, self.world)
        return sets, remaining

    # --- control loop ---------------------------------------------------------

    async def tick(self) -> None:
        if self.mailbox is not None:
            _event, self.sets, self.goal_queue = self.mailbox
            self.mailbox = None
        self._advance_goal_queue()
        holding = (
            self.mode == "offline_baseline"
            and self.plan_task is not None
            and not self.plan_task.done()
        )
        if self.sets is not None and self.goal_queue and not holding:
            self.solution = await asyncio.to_thread(
                step, self.state, self.u_prev, self.sets, self.params,
                None, self.solution,
            )
            self.u_prev = self.solution.first_input
            self.state = advance(self.state, self.u_prev, TICK)
        else:
            self._hold()
        self.t = round(self.t + TICK, 9)
        await self.broadcast(self.state_frame())

    def _advance_goal_queue(self) -> None:
        if self.sets is None or not self.goal_queue:
            return
        target = self.goal_queue[0]
        dist = float(np.linalg.norm(np.asarray(self.state.p) - target.p))
        if dist > GOAL_POS_TOL or self.state.speed > GOAL_SPEED_TOL:
            return
        self.achieved.add(target.label)
        self.goal_queue.pop(0)
        if self.goal_queue:
            try:
                self.sets = initial_sets(
                    Pose(self.state.p, self.state.e, label="current"),
                    self.goal_queue[0], self.world,
                    keepout_names=tuple(r.name for r in self.sets.keepouts),
                    orientation_box=self.sets.orientation_box,
                )
            except NoCorridorError:
                self.goal_queue = []
        elif self.goal_reached_t is None:
            self.goal_reached_t = self.t
            asyncio.get_running_loop().create_task(self.broadcast(self.metrics_frame()))

    def _hold(self) -> None:
        limits = self.sets.robot if self.sets is not None else None
        a_cap = (limits.a_max if limits else 5.0) / np.sqrt(3.0)
        e_cap = limits.e_acc_max if limits else 10.0
        a = np.clip(-np.asarray(self.state.v) / TICK, -a_cap, a_cap)
        eacc = np.clip(-np.asarray(self.state.edot) / TICK, -e_cap, e_cap)
        self.u_prev = ControlInput(a=tuple(a), eacc=tuple(eacc))
        self.state = advance(self.state, self.u_prev, TICK)

    # --- fan-out ---------------------------------------------------------------

    async def broadcast(self, frame: dict) -> None:
        dead = []
        for ws in list(self.clients):
            try:
                await ws.send_json(frame)
            except Exception:
                dead.append(ws)
        for ws in dead:
            self.clients.discard(ws)


def create_app(scenario_name: str = "scenario1", speed: float = 1.0) -> FastAPI:
    session = SteerSession(scenario_name, speed=speed)

    async def loop() -> None:
        period = TICK / session.speed
        while True:
            began = time.perf_counter()
            await session.tick()
            elapsed = time.perf_counter() - began
            await asyncio.sleep(max(period - elapsed, 0.0))

    @contextlib.asynccontextmanager
    async def lifespan(_app: FastAPI):
        task = asyncio.create_task(loop())
        yield
        task.cancel()
        with contextlib.suppress(asyncio.CancelledError):
            await task

    app = FastAPI(title="wordsteer", lifespan=lifespan)
    app.state.session = session

    @app.websocket("/ws")
    async def websocket_endpoint(ws: WebSocket):
        await ws.accept()
        # greetings precede any broadcast telemetry for this client
        await ws.send_json(session.hello_frame())
        await ws.send_json(session.world_frame())
        await ws.send_json(session.parse_frame())
        session.clients.add(ws)
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    message = json.loads(raw)
                except json.JSONDecodeError:
                    await ws.send_json(
                        {"type": "error", "message": "malformed JSON frame"}
                    )
                    continue
                for frame in await session.handle(message):
                    await session.broadcast(frame) if frame["type"] in (
                        "parse", "event", "world",
                    ) else await ws.send_json(frame)
        except WebSocketDisconnect:
            session.clients.discard(ws)

    @app.get("/health")
    async def health():
        return {"ok": True, "t": session.t, "scenario": session.scenario_name}

    return app
