"""Instruction events: goal updates, constraint specs, and cost parameters.

A :class:`ConstraintSpec` is one incremental constraint classified into one
of six kinds; the kind fixes which payload field is set and which part of
the motion problem it may touch (safety -> admissible safety set, manner ->
cost parameters, everything else -> the task corridor).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .world import Pose

KIND_MANNER = "manner"
KIND_TARGET = "target"
KIND_OBJECT = "object"
KIND_ACTION = "action"
KIND_SAFETY = "safety"
KIND_SEQUENTIAL = "sequential"

ALL_KINDS = (
    KIND_MANNER,
    KIND_TARGET,
    KIND_OBJECT,
    KIND_ACTION,
    KIND_SAFETY,
    KIND_SEQUENTIAL,
)

# payload field allowed per kind
_PAYLOAD_FIELDS = {
    KIND_MANNER: ("speed_scale",),
    KIND_TARGET: ("goal_ref",),
    KIND_OBJECT: ("referent_filter",),
    KIND_ACTION: ("action_symbol",),
    KIND_SAFETY: ("orientation_box", "keepout_ref"),
    KIND_SEQUENTIAL: ("ordering",),
}


class EventError(ValueError):
    pass


@dataclass(frozen=True)
class ConstraintSpec:
    kind: str
    speed_scale: float | None = None
    goal_ref: str | None = None
    referent_filter: dict | None = None
    action_symbol: str | None = None
    orientation_box: tuple[float, float] | None = None
    keepout_ref: str | None = None
    ordering: tuple[str, str] | None = None

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise EventError(f"unknown constraint kind {self.kind!r}")
        allowed = _PAYLOAD_FIELDS[self.kind]
        set_fields = [
            name
            for name in (
                "speed_scale", "goal_ref", "referent_filter", "action_symbol",
                "orientation_box", "keepout_ref", "ordering",
            )
            if getattr(self, name) is not None
        ]
        if len(set_fields) != 1 or set_fields[0] not in allowed:
            raise EventError(
                f"{self.kind} constraint must set exactly one of {allowed}, got {set_fields}"
            )
        if self.speed_scale is not None and self.speed_scale <= 0:
            raise EventError("speed_scale must be positive")

    def payload(self) -> tuple[str, object]:
        for name in _PAYLOAD_FIELDS[self.kind]:
            value = getattr(self, name)
            if value is not None:
                return name, value
        raise EventError("constraint has no payload")  # pragma: no cover

    def to_dict(self) -> dict:
        name, value = self.payload()
        if name == "orientation_box":
            value = list(value)
        elif name == "ordering":
            value = list(value)
        return {"kind": self.kind, name: value}

    @classmethod
    def from_dict(cls, d: dict) -> "ConstraintSpec":
        kind = d["kind"]
        kwargs = {}
        for name in _PAYLOAD_FIELDS.get(kind, ()):
            if name in d:
                value = d[name]
                if name in ("orientation_box", "ordering"):
                    value = tuple(value)
                kwargs[name] = value
        return cls(kind=kind, **kwargs)


@dataclass(frozen=True)
class CostParams:
    speed_weight: float = 1.0
    path_weight: float = 1.0
    terminal_weight: float = 1.0

    def __post_init__(self):
        for name in ("speed_weight", "path_weight", "terminal_weight"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise EventError(f"{name} must be finite and positive, got {value}")

    def scaled_speed(self, factor: float, cap: float) -> "CostParams":
        return replace(self, speed_weight=min(self.speed_weight * factor, cap))

    def to_dict(self) -> dict:
        return {
            "speed_weight": self.speed_weight,
            "path_weight": self.path_weight,
            "terminal_weight": self.terminal_weight,
        }


@dataclass(frozen=True)
class ResolvedPlan:
    """Absolute interpretation of a parse: goal sequence plus active limits."""

    goals: tuple[Pose, ...] = ()
    orientation_box: tuple[float, float] | None = None
    keepout_names: tuple[str, ...] = ()
    speed_scale: float = 1.0
    action_symbols: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "goals": [g.to_dict() for g in self.goals],
            "orientation_box": list(self.orientation_box) if self.orientation_box else None,
            "keepouts": list(self.keepout_names),
            "speed_scale": self.speed_scale,
            "actions": list(self.action_symbols),
        }


@dataclass(frozen=True)
class InstructionEvent:
    id: int
    timestamp: float
    goal: Pose | None = None
    constraints: tuple[ConstraintSpec, ...] = ()
    cost_params: CostParams | None = None
    supersedes: int | None = None
    plan: ResolvedPlan = field(default_factory=ResolvedPlan)

    def __post_init__(self):
        if self.goal is None and not self.constraints and self.cost_params is None:
            raise EventError("event must carry a goal, constraints, or cost parameters")
        for spec in self.constraints:
            _check_routing(spec)

    def kinds(self) -> tuple[str, ...]:
        return tuple(spec.kind for spec in self.constraints)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "t": self.timestamp,
            "goal": self.goal.to_dict() if self.goal else None,
            "constraints": [c.to_dict() for c in self.constraints],
            "cost_params": self.cost_params.to_dict() if self.cost_params else None,
            "supersedes": self.supersedes,
            "plan": self.plan.to_dict(),
        }


def _check_routing(spec: ConstraintSpec) -> None:
    """Safety payloads may only describe safe-set inputs, manner only costs."""
    name, _ = spec.payload()
    if spec.kind == KIND_SAFETY:
        assert name in ("orientation_box", "keepout_ref")
    elif spec.kind == KIND_MANNER:
        assert name == "speed_scale"
    else:
        assert name in ("goal_ref", "referent_filter", "action_symbol", "ordering")
