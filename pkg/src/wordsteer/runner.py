"""Closed-loop scenario execution and run metrics.

Simulated time advances in fixed control periods. Each tick ingests the
words whose timestamps have passed, resolves any newly completed parse
into an instruction event, applies events (replanning without stopping in
online mode, queueing behind a stop-and-replan latency in the baseline),
then solves the horizon problem and advances the plant one step.

All logs are plain rows so a run can be replayed bit-identically; wall
clock only enters the planning-time metric, never the trajectory.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .chart import Chart, best_parse, feed_word
from .controller import (
    DT,
    ControlInput,
    EEState,
    HorizonSolution,
    advance,
    apply_event,
    step,
)
from .corridor import AdmissibleSets, NoCorridorError, initial_sets, replan_from
from .events import CostParams, InstructionEvent
from .geometry import violation as region_violation
from .lexicon import Dictionary, load_shipped_grammar
from .resolver import UnresolvedReferentError, resolve
from .scenario import MODE_BASELINE, MODE_ONLINE, Scenario
from .world import Pose

GOAL_POS_TOL = 0.010
GOAL_SPEED_TOL = 0.020
MOTION_SPEED_EPS = 1e-3

TRAJECTORY_COLUMNS = [
    "t", "px", "py", "pz", "e1", "e2", "vx", "vy", "vz",
    "speed", "event_id", "max_slack",
]


@dataclass
class RunLogs:
    rows: list = field(default_factory=list)
    plan_calls: list = field(default_factory=list)   # (t, duration_s)
    events: list = field(default_factory=list)       # (t, id, kinds)
    errors: list = field(default_factory=list)       # (t, message)
    first_word_t: float | None = None
    goal_reached_t: float | None = None
    timed_out: bool = False


@dataclass
class RunMetrics:
    t_plan: list
    t_traj: list
    t_task: float | None
    events: list
    min_mid_motion_speed: float | None
    max_violation: float
    goal_reached: bool
    errors: list

    def to_dict(self) -> dict:
        return {
            "t_plan": self.t_plan,
            "t_traj": self.t_traj,
            "t_task": self.t_task,
            "events": [
                {"t": t, "id": eid, "kinds": list(kinds)} for t, eid, kinds in self.events
            ],
            "min_mid_motion_speed": self.min_mid_motion_speed,
            "max_violation": self.max_violation,
            "goal_reached": self.goal_reached,
            "errors": self.errors,
        }


def measured_violation(state: EEState, sets: AdmissibleSets | None) -> float:
    """Executed-state constraint violation: corridor membership, orientation
    box of the active segment, and keep-out penetration depth."""
    if sets is None:
        return 0.0
    corridor = sets.task
    worst = 0.0
    membership = min(region_violation(r, state.p) for r in corridor.regions)
    worst = max(worst, membership)
    s = corridor.progress_of(state.p)
    b1, b2 = corridor.orientation_bounds[corridor.segment_index(s)]
    worst = max(worst, abs(state.e[0]) - b1, abs(state.e[1]) - b2)
    for keepout in sets.keepouts:
        depth = -region_violation(keepout, state.p)
        worst = max(worst, depth)
    return max(worst, 0.0)


class _Pipeline:
    """Single-run state: parser, planner handoff values, control loop."""

    def __init__(self, scenario: Scenario, dictionary: Dictionary | None = None):
        self.scenario = scenario
        self.dictionary = dictionary or load_shipped_grammar()
        self.world = scenario.world
        self.chart = Chart()
        self.word_index = 0
        self.submitted_signature = None
        self.last_event: InstructionEvent | None = None
        self.event_counter = 0
        self.pending_events: list[InstructionEvent] = []
        self.sets: AdmissibleSets | None = None
        self.params = CostParams()
        self.goal_queue: list[Pose] = []
        self.achieved: set[str] = set()
        self.state = scenario.initial_state
        self.u_prev = ControlInput()
        self.solution: HorizonSolution | None = None
        self.logs = RunLogs()
        self.active_event_id = 0
        # baseline bookkeeping
        self.plan_ready_t: float | None = None
        self.baseline_started = False

    # --- language side -----------------------------------------------------

    def ingest_words(self, t: float) -> None:
        for wt, word in self.scenario.words_until(t, self.word_index):
            self.word_index += 1
            if self.logs.first_word_t is None:
                self.logs.first_word_t = wt
            result = feed_word(self.chart, word, self.dictionary)
            if result.status != "complete":
                continue
            node = best_parse(result, self.world)
            if node is None:
                if result.best is not None:
                    self.logs.errors.append(
                        (wt, "unresolved referent: parse discarded, keeping plan")
                    )
                continue
            if node.signature() == self.submitted_signature:
                continue
            try:
                event = resolve(
                    node,
                    self.world,
                    prior=self.last_event,
                    seed=self.scenario.seed,
                    timestamp=wt,
                    event_id=self.event_counter + 1,
                )
            except UnresolvedReferentError as err:
                self.logs.errors.append((wt, f"unresolved referent: {err.symbol}"))
                continue
            self.submitted_signature = node.signature()
            self.event_counter += 1
            self.last_event = event
            self.pending_events.append(event)
            self.logs.events.append((wt, event.id, event.kinds()))

    # --- planning side -----------------------------------------------------

    def current_pose(self) -> Pose:
        return Pose(self.state.p, self.state.e, label="current")

    def _plan_initial(self, event: InstructionEvent, t: float) -> None:
        begin = time.perf_counter()
        self.sets = initial_sets(
            self.current_pose(),
            event.plan.goals[0],
            self.world,
            keepout_names=event.plan.keepout_names,
            orientation_box=event.plan.orientation_box,
        )
        self._record_plan(t, time.perf_counter() - begin)
        self.goal_queue = list(event.plan.goals)
        self.achieved = set()

    def _replan(self, event: InstructionEvent, t: float) -> None:
        remaining = [g for g in event.plan.goals if g.label not in self.achieved]
        if not remaining:
            remaining = [event.plan.goals[-1]] if event.plan.goals else []
        self.goal_queue = remaining
        target = self.goal_queue[0] if self.goal_queue else self.sets.task.goal
        begin = time.perf_counter()
        retarget = InstructionEvent(
            id=event.id,
            timestamp=event.timestamp,
            goal=target,
            constraints=event.constraints,
            cost_params=event.cost_params,
            supersedes=event.supersedes,
            plan=event.plan,
        )
        new_sets = replan_from(self.current_pose(), retarget, self.sets, self.world)
        duration = time.perf_counter() - begin
        if new_sets is not self.sets:
            self._record_plan(t, duration)
        self.sets = new_sets

    def _record_plan(self, t: float, duration: float) -> None:
        if self.scenario.mode == MODE_BASELINE:
            duration = self.scenario.offline_latency
        self.logs.plan_calls.append((t, duration))

    def apply_event(self, event: InstructionEvent, t: float) -> None:
        self.params = apply_event(self.params, event)
        self.active_event_id = event.id
        try:
            if self.sets is None:
                if event.plan.goals:
                    self._plan_initial(event, t)
            else:
                self._replan(event, t)
        except NoCorridorError as err:
            self.logs.errors.append((t, f"no corridor: {err}"))

    def advance_goal_queue(self, t: float) -> bool:
        """Returns True when the active goal was just reached."""
        if self.sets is None or not self.goal_queue:
            return False
        target = self.goal_queue[0]
        dist = float(np.linalg.norm(np.asarray(self.state.p) - target.p))
        if dist > GOAL_POS_TOL or self.state.speed > GOAL_SPEED_TOL:
            return False
        self.achieved.add(target.label)
        self.goal_queue.pop(0)
        if self.goal_queue:
            begin = time.perf_counter()
            next_goal = self.goal_queue[0]
            self.sets = initial_sets(
                self.current_pose(),
                next_goal,
                self.world,
                keepout_names=tuple(r.name for r in self.sets.keepouts),
                orientation_box=self.sets.orientation_box,
            )
            self._record_plan(t, time.perf_counter() - begin)
        else:
            self.logs.goal_reached_t = t
        return True

    # --- control side -------------------------------------------------------

    def control_tick(self) -> None:
        if self.sets is None or not self.goal_queue:
            self.hold_tick()
            return
        self.solution = step(
            self.state, self.u_prev, self.sets, self.params, fallback=self.solution
        )
        self.u_prev = self.solution.first_input
        self.state = advance(self.state, self.u_prev, DT)

    def hold_tick(self) -> None:
        """Brake to rest and stay put (no active goal or planning in flight)."""
        limits = self.sets.robot if self.sets is not None else None
        a_cap = (limits.a_max if limits else 5.0) / np.sqrt(3.0)
        e_cap = limits.e_acc_max if limits else 10.0
        a = np.clip(-np.asarray(self.state.v) / DT, -a_cap, a_cap)
        eacc = np.clip(-np.asarray(self.state.edot) / DT, -e_cap, e_cap)
        self.u_prev = ControlInput(a=tuple(a), eacc=tuple(eacc))
        self.state = advance(self.state, self.u_prev, DT)

    def log_row(self, t: float) -> None:
        s = self.state
        self.logs.rows.append(
            (
                float(t), float(s.p[0]), float(s.p[1]), float(s.p[2]),
                float(s.e[0]), float(s.e[1]),
                float(s.v[0]), float(s.v[1]), float(s.v[2]), float(s.speed),
                self.active_event_id,
                float(measured_violation(s, self.sets)),
            )
        )


def run(
    scenario: Scenario,
    out_dir: str | Path | None = None,
    dictionary: Dictionary | None = None,
) -> tuple[RunMetrics, RunLogs]:
    """Deterministic closed-loop run to goal or timeout; logs emitted."""
    pipeline = _Pipeline(scenario, dictionary)
    runner = _run_online if scenario.mode == MODE_ONLINE else _run_baseline
    runner(pipeline)
    metrics = compute_metrics(pipeline.logs)
    if out_dir is not None:
        write_run(Path(out_dir), scenario, metrics, pipeline.logs)
    return metrics, pipeline.logs


def _words_exhausted(pipeline: _Pipeline) -> bool:
    return pipeline.word_index >= len(pipeline.scenario.utterance)


def _run_online(pipeline: _Pipeline) -> None:
    t = 0.0
    pipeline.log_row(t)
    while t < pipeline.scenario.timeout:
        pipeline.ingest_words(t)
        while pipeline.pending_events:
            pipeline.apply_event(pipeline.pending_events.pop(0), t)
        pipeline.advance_goal_queue(t)
        if _words_exhausted(pipeline) and not pipeline.goal_queue:
            return
        pipeline.control_tick()
        t = round(t + DT, 9)
        pipeline.log_row(t)
    pipeline.logs.timed_out = True


def _run_baseline(pipeline: _Pipeline) -> None:
    """Stop-and-replan pattern: the robot idles for the full planning
    latency at the start and again, stopped, after each queued change."""
    t = 0.0
    latency = pipeline.scenario.offline_latency
    pipeline.log_row(t)
    waiting_event: InstructionEvent | None = None
    ready_at: float | None = None
    while t < pipeline.scenario.timeout:
        pipeline.ingest_words(t)

        if waiting_event is None and pipeline.pending_events and (
            pipeline.sets is None or not pipeline.goal_queue
        ):
            # adopt the newest pending instruction; planning takes `latency`
            waiting_event = pipeline.pending_events.pop()
            pipeline.pending_events.clear()
            ready_at = t + latency
        if waiting_event is not None and t + 1e-9 >= ready_at:
            pipeline.apply_event(waiting_event, t)
            waiting_event, ready_at = None, None

        if waiting_event is None:
            pipeline.advance_goal_queue(t)
        if (
            _words_exhausted(pipeline)
            and not pipeline.goal_queue
            and not pipeline.pending_events
            and waiting_event is None
            and pipeline.sets is not None
        ):
            return
        if waiting_event is None:
            pipeline.control_tick()
        else:
            pipeline.hold_tick()
        t = round(t + DT, 9)
        pipeline.log_row(t)
    pipeline.logs.timed_out = True


# --- metrics -------------------------------------------------------------------

def compute_metrics(logs: RunLogs) -> RunMetrics:
    speeds = [row[9] for row in logs.rows]
    times = [row[0] for row in logs.rows]

    episodes = []
    start = None
    for t, speed in zip(times, speeds):
        if speed > MOTION_SPEED_EPS and start is None:
            start = t
        elif speed <= MOTION_SPEED_EPS and start is not None:
            episodes.append((start, t))
            start = None
    if start is not None:
        episodes.append((start, times[-1]))

    t_task = None
    if logs.first_word_t is not None and logs.goal_reached_t is not None:
        t_task = logs.goal_reached_t - logs.first_word_t
    elif logs.first_word_t is None:
        t_task = 0.0

    min_mid = None
    if episodes:
        margin = 0.3
        lo = episodes[0][0] + margin
        hi = episodes[-1][1] - margin
        window = [s for t, s in zip(times, speeds) if lo <= t <= hi]
        if window:
            min_mid = min(window)

    return RunMetrics(
        t_plan=[d for _, d in logs.plan_calls],
        t_traj=[round(b - a, 9) for a, b in episodes],
        t_task=t_task,
        events=list(logs.events),
        min_mid_motion_speed=min_mid,
        max_violation=max((row[11] for row in logs.rows), default=0.0),
        goal_reached=logs.goal_reached_t is not None,
        errors=list(logs.errors),
    )


# --- run directory I/O -----------------------------------------------------------

def trajectory_csv(logs: RunLogs) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRAJECTORY_COLUMNS)
    for row in logs.rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_run(out_dir: Path, scenario: Scenario, metrics: RunMetrics, logs: RunLogs) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "trajectory.csv").write_text(trajectory_csv(logs), encoding="utf-8")
    (out_dir / "metrics.json").write_text(
        json.dumps(
            {"scenario": scenario.name, "mode": scenario.mode, **metrics.to_dict()},
            indent=2,
        ),
        encoding="utf-8",
    )


def read_metrics(run_dir: str | Path) -> dict:
    with open(Path(run_dir) / "metrics.json", encoding="utf-8") as fh:
        return json.load(fh)
