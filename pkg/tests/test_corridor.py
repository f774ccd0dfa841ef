import time

import numpy as np
import pytest

from wordsteer.corridor import (
    AdmissibleSets,
    NoCorridorError,
    RobotLimits,
    plan_corridor,
    initial_sets,
    replan_from,
)
from wordsteer.events import CostParams, InstructionEvent, ResolvedPlan
from wordsteer.geometry import box, contains, intersect_nonempty
from wordsteer.world import Pose, WorldSnapshot, load_shipped_world


def empty_world():
    return WorldSnapshot(
        objects=(),
        obstacles=(),
        keepouts=(),
        workspace=box((-1, -1, 0), (1, 1, 1), name="workspace"),
    )


def polyline_contained(corridor, ds=0.001):
    length = corridor.length
    n = max(2, int(np.ceil(length / ds)))
    for s in np.linspace(0.0, length, n):
        p = corridor.point_at(s)
        if not any(contains(r, p, tol=1e-9) for r in corridor.regions):
            return False, p
    return True, None


def test_empty_world_single_region_straight_line():
    corridor = plan_corridor(
        Pose((-0.5, -0.5, 0.2)), Pose((0.5, 0.5, 0.8)), empty_world()
    )
    assert len(corridor.regions) == 1
    assert len(corridor.via_points) == 2
    ok, bad = polyline_contained(corridor)
    assert ok, bad


def test_start_and_goal_inside_end_regions():
    world = load_shipped_world("scenario1")
    corridor = plan_corridor(
        Pose((0.4673, -0.0249, 0.4406)), Pose((0.40, 0.45, 0.27)), world
    )
    assert contains(corridor.regions[0], (0.4673, -0.0249, 0.4406))
    assert contains(corridor.regions[-1], (0.40, 0.45, 0.27))
    ok, bad = polyline_contained(corridor)
    assert ok, bad


def test_consecutive_regions_share_via_point():
    world = load_shipped_world("scenario3")
    corridor = plan_corridor(
        Pose((0.40, 0.40, 0.27)), Pose((0.3134, -0.75, 0.47)), world
    )
    for i in range(len(corridor.regions) - 1):
        via = corridor.via_points[i + 1]
        assert contains(corridor.regions[i], via, tol=1e-9)
        assert contains(corridor.regions[i + 1], via, tol=1e-9)
        assert intersect_nonempty(corridor.regions[i], corridor.regions[i + 1]) is not None
    ok, bad = polyline_contained(corridor)
    assert ok, bad


def test_keepout_excluded_from_corridor():
    world = load_shipped_world("scenario2")
    keepout = world.keepout_by_name("laptop")
    corridor = plan_corridor(
        Pose((0.40, 0.40, 0.27)), Pose((0.0, -0.6, 0.8)), world, keepouts=(keepout,)
    )
    for region in corridor.regions:
        assert intersect_nonempty(region, keepout) is None
    ok, bad = polyline_contained(corridor)
    assert ok, bad
    # the detour bends around the keep-out in the x-y plane
    for s in np.linspace(0, corridor.length, 200):
        assert not contains(keepout, corridor.point_at(s))


def test_goal_inside_keepout_is_distinct_error():
    world = load_shipped_world("scenario2")
    keepout = world.keepout_by_name("laptop")
    with pytest.raises(NoCorridorError):
        plan_corridor(
            Pose((0.40, 0.40, 0.27)), Pose((0.35, -0.18, 0.5)), world, keepouts=(keepout,)
        )


def test_obstacles_avoided_with_margin():
    world = load_shipped_world("scenario3")
    corridor = plan_corridor(
        Pose((0.40, 0.40, 0.27)), Pose((0.3134, -0.75, 0.47)), world
    )
    for region in corridor.regions:
        for obstacle in world.obstacles:
            assert intersect_nonempty(region, obstacle) is None


def test_determinism():
    world = load_shipped_world("scenario2")
    args = (Pose((0.40, 0.40, 0.27)), Pose((0.0, -0.6, 0.8)), world)
    a = plan_corridor(*args, keepouts=(world.keepout_by_name("laptop"),))
    b = plan_corridor(*args, keepouts=(world.keepout_by_name("laptop"),))
    assert a.via_points == b.via_points
    assert [r.box_min for r in a.regions] == [r.box_min for r in b.regions]


def test_planning_latency_under_50ms():
    cases = [
        ("scenario1", (0.4673, -0.0249, 0.4406), (0.40, 0.45, 0.27), ()),
        ("scenario2", (0.40, 0.40, 0.27), (0.0, -0.6, 0.8), ("laptop",)),
        ("scenario3", (0.40, 0.40, 0.27), (0.3134, -0.75, 0.47), ()),
    ]
    worst = 0.0
    for name, start, goal, keepout_names in cases:
        world = load_shipped_world(name)
        keepouts = tuple(world.keepout_by_name(k) for k in keepout_names)
        plan_corridor(Pose(start), Pose(goal), world, keepouts)  # warm caches
        begin = time.perf_counter()
        plan_corridor(Pose(start), Pose(goal), world, keepouts)
        worst = max(worst, time.perf_counter() - begin)
    assert worst < 0.050, f"slowest plan took {worst * 1e3:.1f} ms"


def test_replan_with_cost_only_event_is_identity():
    world = load_shipped_world("scenario3")
    sets = initial_sets(Pose((0.4673, -0.0249, 0.4406)), world.named_poses["handover"], world)
    event = InstructionEvent(
        id=2, timestamp=6.1, cost_params=CostParams(speed_weight=2.0),
        plan=ResolvedPlan(goals=(world.named_poses["handover"],), speed_scale=2.0),
    )
    assert replan_from(Pose((0.1, 0.0, 0.5)), event, sets, world) is sets


def test_replan_goal_change_starts_at_current_pose():
    world = load_shipped_world("scenario1")
    mug = world.object_by_id("mug1")
    sets = initial_sets(Pose((0.4673, -0.0249, 0.4406)), mug.grasps["side"], world)
    current = Pose((0.42, 0.20, 0.35))
    event = InstructionEvent(
        id=2, timestamp=3.7, goal=mug.grasps["top"],
        plan=ResolvedPlan(goals=(mug.grasps["top"],)),
    )
    new = replan_from(current, event, sets, world)
    assert new.task.via_points[0] == current.position
    assert new.task.goal.label == "mug1:top"


def test_replan_orientation_infeasibility_flagged_for_slack():
    world = load_shipped_world("scenario2")
    sets = initial_sets(Pose((0.40, 0.40, 0.27), (0.35, 0.2)), world.named_poses["receive"], world)
    current = Pose((0.45, 0.2, 0.4), (0.5, 0.3))  # already tilted past the box
    event = InstructionEvent(
        id=2, timestamp=6.4, goal=None,
        constraints=(),
        cost_params=CostParams(),
        plan=ResolvedPlan(
            goals=(world.named_poses["receive"],), orientation_box=(0.15, 0.15)
        ),
    )
    new = replan_from(current, event, sets, world)
    assert new.orientation_box == (0.15, 0.15)
    assert new.task.orientation_infeasible
    assert all(b == (0.15, 0.15) for b in new.task.orientation_bounds)


def test_corridor_dump_schema():
    world = load_shipped_world("scenario1")
    sets = initial_sets(
        Pose((0.4673, -0.0249, 0.4406)),
        world.object_by_id("mug1").grasps["side"],
        world,
    )
    doc = sets.to_dict()
    task = doc["task"]
    assert len(task["via_points"]) == len(task["regions"]) + 1
    assert len(task["orientation_bounds"]) == len(task["regions"])
    for region in task["regions"]:
        assert "min" in region and "max" in region
    assert doc["robot"]["v_max"] == 1.0
    import json

    json.dumps(doc)  # serializable as shipped


def test_robot_limits_are_positive_and_fixed():
    limits = RobotLimits()
    assert limits.v_max == 1.0 and limits.a_max == 5.0 and limits.e_acc_max == 10.0
    with pytest.raises(ValueError):
        RobotLimits(v_max=0.0)


def test_scenario3_corridor_routes_between_or_over_walls():
    world = load_shipped_world("scenario3")
    corridor = plan_corridor(
        Pose((0.40, 0.40, 0.27)), Pose((0.3134, -0.75, 0.47)), world
    )
    # wherever the path crosses the wall slab it must use the gap or go over
    for s in np.linspace(0, corridor.length, 500):
        p = corridor.point_at(s)
        if -0.42 <= p[1] <= -0.28:
            assert (-0.28 <= p[0] <= 0.08) or p[2] >= 0.82, p
