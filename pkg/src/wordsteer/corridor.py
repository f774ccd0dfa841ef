"""Online reference-path planning through chains of overlapping boxes.

Free space is the workspace minus inflated obstacles and keep-outs,
decomposed on a coarse grid into greedily grown maximal boxes. A shortest
path over the box-overlap graph yields an ordered corridor of convex
regions plus via-points; containment of the via polyline follows from
convexity because consecutive via-points share a region.

The corridor, the keep-out list, and the robot's own limits together form
the admissible sets consumed by the horizon controller.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field, replace

import numpy as np

from .events import InstructionEvent
from .geometry import ConvexRegion, box, box_overlap_interior, contains
from .world import Pose, WorldSnapshot

GRID_RESOLUTION = 0.05
INFLATION_MARGIN = 0.02
DEFAULT_ORIENTATION_BOUND = 1.5
OVERLAP_EPS = 1e-6


class NoCorridorError(RuntimeError):
    """No chain of free regions connects start and goal."""


@dataclass(frozen=True)
class RobotLimits:
    """Instruction-independent kinematic bounds of the simulated effector."""

    v_max: float = 1.0
    a_max: float = 5.0
    e_rate_max: float = 2.0
    e_acc_max: float = 10.0

    def __post_init__(self):
        for name in ("v_max", "a_max", "e_rate_max", "e_acc_max"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Corridor:
    regions: tuple[ConvexRegion, ...]
    via_points: tuple[tuple[float, float, float], ...]
    orientation_bounds: tuple[tuple[float, float], ...]
    e_start: tuple[float, float]
    e_goal: tuple[float, float]
    goal: Pose
    orientation_infeasible: bool = False

    def __post_init__(self):
        assert len(self.via_points) == len(self.regions) + 1
        assert len(self.orientation_bounds) == len(self.regions)

    # --- arclength parametrization ----------------------------------------

    @property
    def _via(self) -> np.ndarray:
        return np.asarray(self.via_points, dtype=float)

    @property
    def segment_lengths(self) -> np.ndarray:
        via = self._via
        return np.linalg.norm(np.diff(via, axis=0), axis=1)

    @property
    def cumulative(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.segment_lengths)])

    @property
    def length(self) -> float:
        return float(self.cumulative[-1])

    def point_at(self, s: float) -> np.ndarray:
        via, cum = self._via, self.cumulative
        s = float(np.clip(s, 0.0, cum[-1]))
        idx = int(np.searchsorted(cum, s, side="right") - 1)
        idx = min(idx, len(via) - 2)
        seg = cum[idx + 1] - cum[idx]
        frac = 0.0 if seg <= 0 else (s - cum[idx]) / seg
        return via[idx] + frac * (via[idx + 1] - via[idx])

    def e_ref_at(self, s: float) -> np.ndarray:
        e0 = np.asarray(self.e_start, dtype=float)
        e1 = np.asarray(self.e_goal, dtype=float)
        if self.length <= 0:
            return e1
        frac = float(np.clip(s / self.length, 0.0, 1.0))
        return e0 + frac * (e1 - e0)

    def progress_of(self, point) -> float:
        """Arclength of the closest polyline point (earliest on ties)."""
        p = np.asarray(point, dtype=float)
        via, cum = self._via, self.cumulative
        best_s, best_d = 0.0, float("inf")
        for i in range(len(via) - 1):
            a, b = via[i], via[i + 1]
            ab = b - a
            denom = float(ab @ ab)
            t = 0.0 if denom <= 0 else float(np.clip((p - a) @ ab / denom, 0.0, 1.0))
            q = a + t * ab
            d = float(np.linalg.norm(p - q))
            if d < best_d - 1e-12:
                best_d = d
                best_s = float(cum[i] + t * np.linalg.norm(ab))
        return best_s

    def segment_index(self, s: float) -> int:
        cum = self.cumulative
        s = float(np.clip(s, 0.0, cum[-1]))
        idx = int(np.searchsorted(cum, s, side="right") - 1)
        return min(idx, len(self.regions) - 1)

    def _handoff_depth(self, i: int) -> float:
        """Interior depth of via-point i+1 inside both regions it joins.

        Any point within this distance of the via-point lies in both
        regions, so it bounds how wide the dual-activation window may be.
        """
        via = np.asarray(self.via_points[i + 1])
        depth = float("inf")
        for region in (self.regions[i], self.regions[i + 1]):
            depth = min(depth, float(np.min(region.b - region.A @ via)))
        return max(depth, 0.0)

    def active_regions(self, s: float, margin: float = 0.05) -> list[int]:
        """Region indices constraining a state at progress ``s``.

        Near a handoff both neighbouring regions are active; the window is
        capped by the via-point's interior depth so the reference polyline
        always satisfies the conjoined membership constraints.
        """
        idx = self.segment_index(s)
        cum = self.cumulative
        active = [idx]
        if idx > 0:
            window = min(margin, self._handoff_depth(idx - 1))
            if s - cum[idx] < window:
                active.insert(0, idx - 1)
        if idx < len(self.regions) - 1:
            window = min(margin, self._handoff_depth(idx))
            if cum[idx + 1] - s < window:
                active.append(idx + 1)
        return active

    def to_dict(self) -> dict:
        from .geometry import region_to_dict

        return {
            "regions": [region_to_dict(r) for r in self.regions],
            "via_points": [list(v) for v in self.via_points],
            "orientation_bounds": [list(b) for b in self.orientation_bounds],
            "e_start": list(self.e_start),
            "e_goal": list(self.e_goal),
            "goal": self.goal.to_dict(),
            "orientation_infeasible": self.orientation_infeasible,
        }


@dataclass(frozen=True)
class AdmissibleSets:
    task: Corridor
    keepouts: tuple[ConvexRegion, ...] = ()
    orientation_box: tuple[float, float] | None = None
    robot: RobotLimits = field(default_factory=RobotLimits)

    def to_dict(self) -> dict:
        from .geometry import region_to_dict

        return {
            "task": self.task.to_dict(),
            "keepouts": [region_to_dict(r) for r in self.keepouts],
            "orientation_box": list(self.orientation_box) if self.orientation_box else None,
            "robot": {
                "v_max": self.robot.v_max,
                "a_max": self.robot.a_max,
                "e_rate_max": self.robot.e_rate_max,
                "e_acc_max": self.robot.e_acc_max,
            },
        }


# --- free-space decomposition -----------------------------------------------

class _FreeSpaceGrid:
    def __init__(self, workspace: ConvexRegion, blocked: list[ConvexRegion]):
        if not workspace.is_box:
            raise NoCorridorError("planning needs an axis-aligned workspace box")
        self.lo = np.asarray(workspace.box_min, dtype=float)
        self.hi = np.asarray(workspace.box_max, dtype=float)
        self.res = GRID_RESOLUTION
        self.dims = np.maximum(1, np.round((self.hi - self.lo) / self.res)).astype(int)
        self.free = np.ones(self.dims, dtype=bool)
        for region in blocked:
            self._block(region)

    def _block(self, region: ConvexRegion) -> None:
        lo, hi = _region_bounds(region)
        lo = lo - INFLATION_MARGIN
        hi = hi + INFLATION_MARGIN
        i0 = np.maximum(0, np.floor((lo - self.lo) / self.res - 1e-9)).astype(int)
        i1 = np.minimum(self.dims, np.ceil((hi - self.lo) / self.res + 1e-9)).astype(int)
        if np.any(i1 <= i0):
            return
        self.free[i0[0]:i1[0], i0[1]:i1[1], i0[2]:i1[2]] = False

    def cell_of(self, point) -> tuple[int, int, int] | None:
        p = np.asarray(point, dtype=float)
        idx = np.floor((p - self.lo) / self.res).astype(int)
        idx = np.minimum(idx, self.dims - 1)
        if np.any(idx < 0) or np.any(idx >= self.dims):
            return None
        return tuple(int(v) for v in idx)

    def grow_boxes(self) -> list[ConvexRegion]:
        """Greedy maximal boxes covering all free cells; boxes may overlap."""
        covered = np.zeros(self.dims, dtype=bool)
        regions: list[ConvexRegion] = []
        while True:
            remaining = np.argwhere(self.free & ~covered)
            if remaining.size == 0:
                break
            seed = tuple(int(v) for v in remaining[0])
            lo_idx = np.array(seed)
            hi_idx = np.array(seed)
            grown = True
            while grown:
                grown = False
                for axis in range(3):
                    for sign in (1, -1):
                        trial_lo, trial_hi = lo_idx.copy(), hi_idx.copy()
                        if sign > 0:
                            if trial_hi[axis] + 1 >= self.dims[axis]:
                                continue
                            trial_hi[axis] += 1
                        else:
                            if trial_lo[axis] - 1 < 0:
                                continue
                            trial_lo[axis] -= 1
                        slab = self.free[
                            trial_lo[0]:trial_hi[0] + 1,
                            trial_lo[1]:trial_hi[1] + 1,
                            trial_lo[2]:trial_hi[2] + 1,
                        ]
                        if slab.all():
                            lo_idx, hi_idx = trial_lo, trial_hi
                            grown = True
            covered[lo_idx[0]:hi_idx[0] + 1,
                    lo_idx[1]:hi_idx[1] + 1,
                    lo_idx[2]:hi_idx[2] + 1] = True
            regions.append(
                box(
                    self.lo + lo_idx * self.res,
                    self.lo + (hi_idx + 1) * self.res,
                    name=f"free{len(regions)}",
                )
            )
        return regions


def _region_bounds(region: ConvexRegion) -> tuple[np.ndarray, np.ndarray]:
    if region.is_box:
        return np.asarray(region.box_min), np.asarray(region.box_max)
    # conservative: block the axis-aligned bounding box of the region
    from scipy.optimize import linprog

    lo, hi = np.zeros(3), np.zeros(3)
    for axis in range(3):
        for sign, out in ((1.0, hi), (-1.0, lo)):
            c = np.zeros(3)
            c[axis] = -sign
            res = linprog(c, A_ub=region.A, b_ub=region.b,
                          bounds=[(None, None)] * 3, method="highs")
            if not res.success:
                raise NoCorridorError("cannot bound obstacle region")
            out[axis] = res.x[axis]
    return lo, hi


# --- corridor construction ---------------------------------------------------

def plan_corridor(
    start: Pose,
    goal: Pose,
    world: WorldSnapshot,
    keepouts: tuple[ConvexRegion, ...] = (),
    orientation_box: tuple[float, float] | None = None,
) -> Corridor:
    """Chain of overlapping free boxes from start to goal.

    Raises :class:`NoCorridorError` when the goal is sealed off (distinct
    and recoverable; the pipeline keeps its previous plan).
    """
    for keepout in keepouts:
        if contains(keepout, goal.position):
            raise NoCorridorError(f"goal lies inside keep-out {keepout.name!r}")
    blocked = list(world.obstacles) + list(keepouts)
    grid = _FreeSpaceGrid(world.workspace, blocked)
    regions = grid.grow_boxes()
    if not regions:
        raise NoCorridorError("workspace has no free cells")

    start_idx = _deepest_region(regions, start.position)
    goal_idx = _deepest_region(regions, goal.position)
    if start_idx is None:
        raise NoCorridorError(f"start {start.position} not inside free space")
    if goal_idx is None:
        raise NoCorridorError(f"goal {goal.position} not inside free space")

    chain = _search_chain(regions, start_idx, goal_idx)
    chain = _shortcut_chain(regions, chain)
    via = _via_points(regions, chain, start.position, goal.position)

    bound = DEFAULT_ORIENTATION_BOUND if orientation_box is None else None
    per_segment = tuple(
        (orientation_box if orientation_box is not None else (bound, bound))
        for _ in chain
    )
    return Corridor(
        regions=tuple(regions[i] for i in chain),
        via_points=via,
        orientation_bounds=per_segment,
        e_start=tuple(float(v) for v in start.orientation),
        e_goal=tuple(float(v) for v in goal.orientation),
        goal=goal,
    )


def _deepest_region(regions: list[ConvexRegion], point) -> int | None:
    best, best_margin = None, -1.0
    p = np.asarray(point, dtype=float)
    for i, region in enumerate(regions):
        if not contains(region, p, tol=1e-12):
            continue
        margin = float(np.min(region.b - region.A @ p))
        if margin > best_margin:
            best, best_margin = i, margin
    return best


def _search_chain(regions: list[ConvexRegion], start: int, goal: int) -> list[int]:
    centers = [
        (np.asarray(r.box_min) + np.asarray(r.box_max)) / 2.0 for r in regions
    ]
    neighbors: dict[int, list[int]] = {i: [] for i in range(len(regions))}
    for i in range(len(regions)):
        for j in range(i + 1, len(regions)):
            if box_overlap_interior(regions[i], regions[j], margin=OVERLAP_EPS) is not None:
                neighbors[i].append(j)
                neighbors[j].append(i)
    dist = {start: 0.0}
    prev: dict[int, int] = {}
    heap = [(0.0, start)]
    visited = set()
    while heap:
        d, node = heapq.heappop(heap)
        if node in visited:
            continue
        visited.add(node)
        if node == goal:
            break
        for nxt in neighbors[node]:
            cand = d + float(np.linalg.norm(centers[node] - centers[nxt]))
            if cand < dist.get(nxt, float("inf")) - 1e-12:
                dist[nxt] = cand
                prev[nxt] = node
                heapq.heappush(heap, (cand, nxt))
    if goal not in visited:
        raise NoCorridorError("free regions do not connect start and goal")
    chain = [goal]
    while chain[-1] != start:
        chain.append(prev[chain[-1]])
    return list(reversed(chain))


def _shortcut_chain(regions: list[ConvexRegion], chain: list[int]) -> list[int]:
    # hop straight to the farthest chain member we already overlap with
    out = [chain[0]]
    i = 0
    while i < len(chain) - 1:
        j = len(chain) - 1
        while j > i + 1:
            if box_overlap_interior(regions[chain[i]], regions[chain[j]], margin=OVERLAP_EPS):
                break
            j -= 1
        out.append(chain[j])
        i = j
    return out


def _via_points(regions, chain, start, goal) -> tuple:
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    crossings = []
    for a, b in zip(chain, chain[1:]):
        lo, hi = box_overlap_interior(regions[a], regions[b], margin=OVERLAP_EPS)
        crossings.append((np.asarray(lo), np.asarray(hi)))
    points = [ (lo + hi) / 2.0 for lo, hi in crossings ]
    # pull crossing points toward the straight neighbour chord, two sweeps,
    # but keep them well inside the overlap so handoffs stay feasible
    for _ in range(2):
        for i, (lo, hi) in enumerate(crossings):
            before = start if i == 0 else points[i - 1]
            after = goal if i == len(points) - 1 else points[i + 1]
            mid = (np.asarray(before) + np.asarray(after)) / 2.0
            shrink = np.minimum((hi - lo) * 0.5 - 1e-9, 0.05)
            points[i] = np.clip(mid, lo + shrink, hi - shrink)
    via = [tuple(float(v) for v in start)]
    via += [tuple(float(v) for v in p) for p in points]
    via.append(tuple(float(v) for v in goal))
    return tuple(via)


# --- admissible-set assembly --------------------------------------------------

def initial_sets(
    start: Pose,
    goal: Pose,
    world: WorldSnapshot,
    keepout_names: tuple[str, ...] = (),
    orientation_box: tuple[float, float] | None = None,
    limits: RobotLimits | None = None,
) -> AdmissibleSets:
    keepouts = _lookup_keepouts(world, keepout_names)
    corridor = plan_corridor(start, goal, world, keepouts, orientation_box)
    return AdmissibleSets(
        task=corridor,
        keepouts=keepouts,
        orientation_box=orientation_box,
        robot=limits or RobotLimits(),
    )


def _lookup_keepouts(world: WorldSnapshot, names) -> tuple[ConvexRegion, ...]:
    found = []
    for name in names:
        region = world.keepout_by_name(name)
        if region is None:
            raise NoCorridorError(f"unknown keep-out {name!r}")
        found.append(region)
    return tuple(found)


def replan_from(
    current: Pose,
    event: InstructionEvent,
    prior: AdmissibleSets,
    world: WorldSnapshot,
) -> AdmissibleSets:
    """New admissible sets starting at the current pose.

    Cost-only events return the prior sets untouched. A newly added
    orientation box that the current pose already violates is still
    emitted; the controller's slack mechanism recovers from it.
    """
    keepout_names = tuple(event.plan.keepout_names)
    orientation_box = event.plan.orientation_box or prior.orientation_box
    goal = event.goal or prior.task.goal

    same_goal = goal.label == prior.task.goal.label
    same_safety = (
        set(keepout_names) == {r.name for r in prior.keepouts}
        and orientation_box == prior.orientation_box
    )
    if same_goal and same_safety:
        return prior

    keepouts = _lookup_keepouts(world, keepout_names)
    corridor = plan_corridor(current, goal, world, keepouts, orientation_box)
    if orientation_box is not None:
        e = np.asarray(current.orientation, dtype=float)
        if np.any(np.abs(e) > np.asarray(orientation_box) + 1e-12):
            corridor = replace(corridor, orientation_infeasible=True)
    return AdmissibleSets(
        task=corridor,
        keepouts=keepouts,
        orientation_box=orientation_box,
        robot=prior.robot,
    )
