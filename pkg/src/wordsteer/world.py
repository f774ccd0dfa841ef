"""Known environment: objects with grasp poses, obstacles, keep-out catalog.

Everything is loaded from a versioned JSON document and immutable afterwards;
goal poses and obstacle geometry are given, not perceived.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np
from scipy.optimize import linprog

from .geometry import ConvexRegion, contains, region_from_dict, region_to_dict

WORLD_SCHEMA = "wordsteer/world@1"


class WorldError(ValueError):
    pass


@dataclass(frozen=True)
class Pose:
    """End-effector target: position plus the two upright-error angles."""

    position: tuple[float, float, float]
    orientation: tuple[float, float] = (0.0, 0.0)
    label: str = ""

    @property
    def p(self) -> np.ndarray:
        return np.asarray(self.position, dtype=float)

    @property
    def e(self) -> np.ndarray:
        return np.asarray(self.orientation, dtype=float)

    def to_dict(self) -> dict:
        return {
            "position": list(self.position),
            "orientation": list(self.orientation),
            "label": self.label,
        }


@dataclass(frozen=True)
class WorldObject:
    id: str
    name: str
    attributes: dict
    position: tuple[float, float, float]
    grasps: dict[str, Pose] = field(default_factory=dict)

    def matches(self, name: str, attributes: dict | None = None) -> bool:
        if self.name != name:
            return False
        for key, value in (attributes or {}).items():
            if self.attributes.get(key) != value:
                return False
        return True


@dataclass(frozen=True)
class WorldSnapshot:
    objects: tuple[WorldObject, ...]
    obstacles: tuple[ConvexRegion, ...]
    keepouts: tuple[ConvexRegion, ...]
    workspace: ConvexRegion
    named_poses: dict[str, Pose] = field(default_factory=dict)

    def find_objects(self, name: str, attributes: dict | None = None) -> list[WorldObject]:
        return [o for o in self.objects if o.matches(name, attributes)]

    def object_by_id(self, object_id: str) -> WorldObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise WorldError(f"no object {object_id!r}")

    def keepout_by_name(self, name: str) -> ConvexRegion | None:
        for region in self.keepouts:
            if region.name == name:
                return region
        return None

    def to_dict(self) -> dict:
        return {
            "schema": WORLD_SCHEMA,
            "workspace": region_to_dict(self.workspace),
            "objects": [
                {
                    "id": o.id,
                    "name": o.name,
                    "attributes": dict(o.attributes),
                    "position": list(o.position),
                    "grasps": {k: g.to_dict() for k, g in o.grasps.items()},
                }
                for o in self.objects
            ],
            "obstacles": [region_to_dict(r) for r in self.obstacles],
            "keepouts": [region_to_dict(r) for r in self.keepouts],
            "named_poses": {k: p.to_dict() for k, p in self.named_poses.items()},
        }


def _check_bounded_nonempty(region: ConvexRegion, label: str) -> None:
    if region.is_box:
        return
    for axis in range(3):
        for sign in (1.0, -1.0):
            c = np.zeros(3)
            c[axis] = sign
            res = linprog(c, A_ub=region.A, b_ub=region.b,
                          bounds=[(None, None)] * 3, method="highs")
            if res.status == 3:
                raise WorldError(f"{label} region is unbounded")
            if res.status == 2:
                raise WorldError(f"{label} region is empty")


def load_world_dict(doc: dict) -> WorldSnapshot:
    if doc.get("schema") != WORLD_SCHEMA:
        raise WorldError(f"unsupported world schema {doc.get('schema')!r}")
    try:
        workspace = region_from_dict(doc["workspace"])
    except KeyError as err:
        raise WorldError("world document needs a workspace") from err

    objects = []
    for entry in doc.get("objects", []):
        grasps = {}
        for kind, g in entry.get("grasps", {}).items():
            grasps[kind] = Pose(
                tuple(g["position"]),
                tuple(g.get("orientation", (0.0, 0.0))),
                label=f"{entry['id']}:{kind}",
            )
        obj = WorldObject(
            id=entry["id"],
            name=entry["name"],
            attributes=dict(entry.get("attributes", {})),
            position=tuple(entry["position"]),
            grasps=grasps,
        )
        if not contains(workspace, obj.position, tol=1e-9):
            raise WorldError(f"object {obj.id!r} lies outside the workspace")
        objects.append(obj)

    obstacles = []
    for entry in doc.get("obstacles", []):
        region = region_from_dict(entry)
        _check_bounded_nonempty(region, entry.get("id", "obstacle"))
        obstacles.append(region)
    keepouts = []
    for entry in doc.get("keepouts", []):
        region = region_from_dict(entry)
        _check_bounded_nonempty(region, entry.get("id", "keepout"))
        keepouts.append(region)

    named_poses = {
        key: Pose(tuple(p["position"]), tuple(p.get("orientation", (0.0, 0.0))), label=key)
        for key, p in doc.get("named_poses", {}).items()
    }
    return WorldSnapshot(
        objects=tuple(objects),
        obstacles=tuple(obstacles),
        keepouts=tuple(keepouts),
        workspace=workspace,
        named_poses=named_poses,
    )


def load_world(path) -> WorldSnapshot:
    with open(path, encoding="utf-8") as fh:
        return load_world_dict(json.load(fh))


def load_shipped_world(name: str) -> WorldSnapshot:
    text = (
        resources.files("wordsteer.data")
        .joinpath("worlds", f"{name}.json")
        .read_text("utf-8")
    )
    return load_world_dict(json.loads(text))
