import json

import pytest

from wordsteer.geometry import contains
from wordsteer.world import WorldError, load_shipped_world, load_world_dict

MINIMAL = {
    "schema": "wordsteer/world@1",
    "workspace": {"min": [-1, -1, 0], "max": [1, 1, 1]},
    "objects": [],
    "obstacles": [],
}


def test_scenario1_world_contents():
    world = load_shipped_world("scenario1")
    mugs = world.find_objects("mug")
    assert len(mugs) == 1
    assert set(mugs[0].grasps) >= {"side", "top"}
    assert len(world.obstacles) == 1


def test_scenario2_world_has_laptop_keepout():
    world = load_shipped_world("scenario2")
    keepout = world.keepout_by_name("laptop")
    assert keepout is not None
    laptop = world.find_objects("laptop")[0]
    above = (laptop.position[0], laptop.position[1], laptop.position[2] + 0.3)
    assert contains(keepout, above)


def test_scenario3_world_walls_and_handover():
    world = load_shipped_world("scenario3")
    assert "handover" in world.named_poses
    assert len(world.find_objects("screwdriver")) == 1
    assert len(world.obstacles) == 3


def test_empty_object_list_is_valid():
    world = load_world_dict(MINIMAL)
    assert world.objects == ()


def test_object_outside_workspace_rejected():
    doc = json.loads(json.dumps(MINIMAL))
    doc["objects"] = [
        {"id": "far", "name": "far", "position": [5, 0, 0], "grasps": {}}
    ]
    with pytest.raises(WorldError):
        load_world_dict(doc)


def test_unknown_schema_rejected():
    doc = dict(MINIMAL, schema="other/1")
    with pytest.raises(WorldError):
        load_world_dict(doc)


def test_attribute_matching():
    world = load_shipped_world("scenario1")
    assert world.find_objects("mug", {"color": "black"})
    assert not world.find_objects("mug", {"color": "blue"})


def test_all_object_positions_inside_workspace():
    for name in ("scenario1", "scenario2", "scenario3"):
        world = load_shipped_world(name)
        for obj in world.objects:
            assert contains(world.workspace, obj.position)


def test_roundtrip_through_dict():
    world = load_shipped_world("scenario2")
    again = load_world_dict(world.to_dict())
    assert {o.id for o in again.objects} == {o.id for o in world.objects}
    assert len(again.keepouts) == len(world.keepouts)
