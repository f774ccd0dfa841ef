"""Convex regions as halfspace intersections.

Regions are ``{p : n_i . p <= b_i}`` with unit normals. Axis-aligned boxes
are the 6-halfspace special case and keep their interval form for cheap
intersection tests; everything general falls back to a small LP.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

CONTAINS_TOL = 1e-9
UNIT_TOL = 1e-9


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class ConvexRegion:
    normals: tuple[tuple[float, float, float], ...]
    offsets: tuple[float, ...]
    # interval form when the region was built as a box
    box_min: tuple[float, float, float] | None = None
    box_max: tuple[float, float, float] | None = None
    name: str = ""
    _arrays: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if len(self.normals) != len(self.offsets):
            raise GeometryError("normals and offsets length mismatch")
        if not self.normals:
            raise GeometryError("region needs at least one halfspace")
        for n in self.normals:
            norm = float(np.linalg.norm(n))
            if abs(norm - 1.0) > 1e-6:
                raise GeometryError(f"normal {n} is not unit length")

    @property
    def A(self) -> np.ndarray:
        if "A" not in self._arrays:
            self._arrays["A"] = np.asarray(self.normals, dtype=float)
        return self._arrays["A"]

    @property
    def b(self) -> np.ndarray:
        if "b" not in self._arrays:
            self._arrays["b"] = np.asarray(self.offsets, dtype=float)
        return self._arrays["b"]

    @property
    def is_box(self) -> bool:
        return self.box_min is not None

    def without_halfspace(self, index: int) -> "ConvexRegion":
        normals = self.normals[:index] + self.normals[index + 1 :]
        offsets = self.offsets[:index] + self.offsets[index + 1 :]
        return ConvexRegion(normals, offsets, name=self.name)


def box(min_corner, max_corner, name: str = "") -> ConvexRegion:
    lo = np.asarray(min_corner, dtype=float)
    hi = np.asarray(max_corner, dtype=float)
    if lo.shape != (3,) or hi.shape != (3,):
        raise GeometryError("box corners must be 3-vectors")
    if np.any(hi <= lo):
        raise GeometryError(f"degenerate box {min_corner}..{max_corner}")
    normals, offsets = [], []
    for axis in range(3):
        n = [0.0, 0.0, 0.0]
        n[axis] = 1.0
        normals.append(tuple(n))
        offsets.append(float(hi[axis]))
        n = [0.0, 0.0, 0.0]
        n[axis] = -1.0
        normals.append(tuple(n))
        offsets.append(float(-lo[axis]))
    return ConvexRegion(
        tuple(normals), tuple(offsets),
        box_min=tuple(float(v) for v in lo),
        box_max=tuple(float(v) for v in hi),
        name=name,
    )


def from_center_extent(center, extent, name: str = "") -> ConvexRegion:
    c = np.asarray(center, dtype=float)
    e = np.asarray(extent, dtype=float)
    return box(c - e / 2.0, c + e / 2.0, name=name)


def contains(region: ConvexRegion, point, tol: float = CONTAINS_TOL) -> bool:
    p = np.asarray(point, dtype=float)
    return bool(np.all(region.A @ p <= region.b + tol))


def violation(region: ConvexRegion, point) -> float:
    """Largest halfspace violation; <= 0 inside."""
    p = np.asarray(point, dtype=float)
    return float(np.max(region.A @ p - region.b))


def intersect_nonempty(a: ConvexRegion, b: ConvexRegion, tol: float = 1e-9):
    """A point in the closed intersection, or None if disjoint."""
    if a.is_box and b.is_box:
        lo = np.maximum(a.box_min, b.box_min)
        hi = np.minimum(a.box_max, b.box_max)
        if np.any(lo > hi + tol):
            return None
        return tuple(float(v) for v in np.clip((lo + hi) / 2.0, lo, hi))
    # minimize the worst violation t with n.p - t <= b over both regions
    A = np.vstack([a.A, b.A])
    rhs = np.concatenate([a.b, b.b])
    A_ub = np.hstack([A, -np.ones((A.shape[0], 1))])
    c = np.zeros(4)
    c[3] = 1.0
    res = linprog(c, A_ub=A_ub, b_ub=rhs, bounds=[(None, None)] * 4, method="highs")
    if not res.success or res.x[3] > tol:
        return None
    return tuple(float(v) for v in res.x[:3])


def box_overlap_interior(a: ConvexRegion, b: ConvexRegion, margin: float = 1e-6):
    """Shared box of two axis-aligned regions if it has real volume."""
    if not (a.is_box and b.is_box):
        raise GeometryError("interior overlap needs box regions")
    lo = np.maximum(a.box_min, b.box_min)
    hi = np.minimum(a.box_max, b.box_max)
    if np.any(hi - lo < margin):
        return None
    return lo, hi


def region_to_dict(region: ConvexRegion) -> dict:
    d: dict = {"name": region.name}
    if region.is_box:
        d["min"] = list(region.box_min)
        d["max"] = list(region.box_max)
    else:
        d["normals"] = [list(n) for n in region.normals]
        d["offsets"] = list(region.offsets)
    return d


def region_from_dict(d: dict) -> ConvexRegion:
    name = d.get("name", d.get("id", ""))
    if "min" in d:
        return box(d["min"], d["max"], name=name)
    if "center" in d:
        return from_center_extent(d["center"], d["extent"], name=name)
    normals = []
    for n in d["normals"]:
        v = np.asarray(n, dtype=float)
        norm = float(np.linalg.norm(v))
        if norm == 0:
            raise GeometryError("zero normal in region")
        normals.append(tuple(v / norm))
    return ConvexRegion(tuple(normals), tuple(float(o) for o in d["offsets"]), name=name)
