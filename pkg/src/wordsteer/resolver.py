"""Grounds a selected parse into goal poses, constraints, and cost updates.

The resolver walks the instruction clauses of a parse, grounds referents in
the world, classifies every incremental constraint into one of six kinds,
and emits an :class:`InstructionEvent`. A parse that extends a previously
resolved utterance produces a delta event that supersedes the prior one.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .chart import ChartNode
from .events import (
    KIND_ACTION,
    KIND_MANNER,
    KIND_OBJECT,
    KIND_SAFETY,
    KIND_SEQUENTIAL,
    KIND_TARGET,
    ConstraintSpec,
    CostParams,
    InstructionEvent,
    ResolvedPlan,
)
from .semantics import (
    ATTRIBUTE_PREDICATES,
    SITE_CORRECTION,
    Frame,
    Sym,
    action_of,
    flatten_clauses,
)
from .world import Pose, WorldObject, WorldSnapshot

UPRIGHT_BOX = (0.15, 0.15)
SPEED_FACTORS = {"faster": 2.0, "slower": 0.5}
SPEED_WEIGHT_CAP = 3.0
DEFAULT_GRASP = "side"

GRASP_LANDMARKS = ("side", "top", "handle")


class UnresolvedReferentError(ValueError):
    def __init__(self, symbol: str):
        self.symbol = symbol
        super().__init__(f"no world object grounds {symbol!r}")


class UnclassifiableModifierError(ValueError):
    pass


def ground_referent(
    symbol: str,
    world: WorldSnapshot,
    seed: int = 0,
    attributes: dict | None = None,
    side_pick: str | None = None,
) -> str:
    """Unique object id for a referent; ambiguity resolves by seeded choice."""
    candidates = sorted(world.find_objects(symbol, attributes), key=lambda o: o.id)
    if not candidates:
        raise UnresolvedReferentError(symbol)
    if len(candidates) == 1:
        return candidates[0].id
    if side_pick == "right":
        return max(candidates, key=lambda o: o.position[0]).id
    if side_pick == "left":
        return min(candidates, key=lambda o: o.position[0]).id
    return random.Random(seed).choice(candidates).id


@dataclass
class _ClauseOutcome:
    kind: str | None
    description: str


def _grasp_pose(obj: WorldObject, grasp: str) -> Pose:
    if grasp not in obj.grasps:
        raise UnresolvedReferentError(f"{obj.name}:{grasp}")
    return obj.grasps[grasp]


def _named_pose(world: WorldSnapshot, key: str) -> Pose:
    pose = world.named_poses.get(key)
    if pose is None:
        raise UnresolvedReferentError(key)
    return pose


def _referent_parts(value) -> tuple[str, dict, str | None]:
    """(noun, attribute filter, side hint) for a referent expression."""
    if isinstance(value, Sym):
        return value.name, {}, None
    if isinstance(value, Frame):
        if value.pred in ATTRIBUTE_PREDICATES and len(value.args) == 1:
            key, attr = ATTRIBUTE_PREDICATES[value.pred]
            noun, attrs, side = _referent_parts(value.args[0])
            attrs = dict(attrs)
            attrs[key] = attr
            return noun, attrs, side
        if value.pred == "on" and len(value.args) == 2:
            noun, attrs, _ = _referent_parts(value.args[0])
            side = value.args[1].name if isinstance(value.args[1], Sym) else None
            return noun, attrs, side
    raise UnresolvedReferentError(str(value))


class _Interpreter:
    def __init__(self, world: WorldSnapshot, seed: int, prior_plan: ResolvedPlan | None):
        self.world = world
        self.seed = seed
        self.prior_plan = prior_plan
        self.goals: list[Pose] = []
        self.orientation_box: tuple[float, float] | None = None
        self.keepouts: list[str] = []
        self.speed_scale = 1.0
        self.actions: list[str] = []
        self.outcomes: list[_ClauseOutcome] = []
        self.open_modifiers: list[str] = []
        self.constraint_specs: list[ConstraintSpec] = []
        # theme bookkeeping for anaphora ("it", "one")
        self.last_theme: WorldObject | None = None
        self.last_referents: list[tuple[str, WorldObject]] = []

    # --- referent grounding -------------------------------------------------

    def object_for(self, value, side_pick: str | None = None) -> WorldObject:
        noun, attrs, side = _referent_parts(value)
        side_pick = side_pick or side
        if noun == "it":
            if self.last_theme is not None:
                return self.last_theme
            prior = self._prior_theme()
            if prior is not None:
                return prior
            raise UnresolvedReferentError("it")
        if noun == "one":
            base = self.last_referents[-1][1] if self.last_referents else self.last_theme
            if base is None:
                raise UnresolvedReferentError("one")
            noun = base.name
        object_id = ground_referent(noun, self.world, self.seed, attrs, side_pick)
        return self.world.object_by_id(object_id)

    def note_referent(self, slot: str, obj: WorldObject) -> None:
        self.last_referents.append((slot, obj))
        if slot == "theme":
            self.last_theme = obj

    def _prior_theme(self) -> WorldObject | None:
        # anaphora across utterances: first grasp goal of the prior plan
        if self.prior_plan is None:
            return None
        for goal in self.prior_plan.goals:
            object_id = goal.label.split(":")[0]
            try:
                return self.world.object_by_id(object_id)
            except Exception:
                continue
        return None

    # --- clause interpretation ----------------------------------------------

    def run(self, semantics: Frame) -> None:
        clauses = flatten_clauses(semantics)
        ordered = len(clauses) > 1 and isinstance(semantics, Frame) and semantics.pred == "after"
        for index, clause in enumerate(clauses):
            self.clause(clause, first=(index == 0 and len(self.outcomes) == 0))
        if ordered:
            names = [str(_action_name(c)) for c in clauses]
            self.constraint_specs.append(
                ConstraintSpec(KIND_SEQUENTIAL, ordering=(names[0], names[-1]))
            )
            self.outcomes.append(_ClauseOutcome(KIND_SEQUENTIAL, "ordered actions"))

    def clause(self, clause: Frame, first: bool) -> None:
        action = action_of(clause)
        if not isinstance(action, Frame):
            raise UnresolvedReferentError(str(action))
        handler = getattr(self, f"_do_{action.pred}", None)
        if handler is None:
            self.open_modifiers.append(action.pred)
            self.outcomes.append(_ClauseOutcome(None, f"unclassified {action.pred}"))
        else:
            handler(action, first)
        for site, mod in clause.mods:
            self.modifier(site, mod)

    def modifier(self, site: str, mod: Frame) -> None:
        if site == SITE_CORRECTION:
            self.correction(mod)
            return
        if mod.pred in ("by", "from") and len(mod.args) == 2:
            landmark = mod.args[1]
            if isinstance(landmark, Sym) and landmark.name in GRASP_LANDMARKS:
                self.regrasp(landmark.name)
                return
        self.open_modifiers.append(mod.pred)
        self.outcomes.append(_ClauseOutcome(None, f"unclassified {mod.pred}"))

    def regrasp(self, grasp_name: str) -> None:
        # grasp-direction refinement: replace the grasp goal for the theme
        if self.last_theme is None:
            raise UnresolvedReferentError(grasp_name)
        pose = _grasp_pose(self.last_theme, grasp_name)
        for i, goal in enumerate(self.goals):
            if goal.label.startswith(f"{self.last_theme.id}:"):
                self.goals[i] = pose
                break
        else:
            self.goals.insert(0, pose)
        self.constraint_specs.append(ConstraintSpec(KIND_TARGET, goal_ref=pose.label))
        self.outcomes.append(_ClauseOutcome(KIND_TARGET, f"grasp {grasp_name}"))

    def correction(self, mod: Frame) -> None:
        if mod.pred == "refine" and len(mod.args) == 1:
            slot, prior_obj = (
                self.last_referents[-1] if self.last_referents else ("theme", None)
            )
            obj = self.object_for(mod.args[0])
            kind = KIND_TARGET if slot == "destination" else KIND_OBJECT
            if slot == "destination":
                self.goals[-1] = _place_pose(obj)
                spec = ConstraintSpec(KIND_TARGET, goal_ref=self.goals[-1].label)
            else:
                grasp = _grasp_pose(obj, DEFAULT_GRASP)
                replaced = False
                for i, goal in enumerate(self.goals):
                    if prior_obj is not None and goal.label.startswith(f"{prior_obj.id}:"):
                        self.goals[i] = grasp
                        replaced = True
                        break
                if not replaced and self.goals:
                    self.goals[0] = grasp
                elif not self.goals:
                    self.goals.append(grasp)
                self.note_referent("theme", obj)
                spec = ConstraintSpec(KIND_OBJECT, referent_filter={"name": obj.name, **obj.attributes})
            self.constraint_specs.append(spec)
            self.outcomes.append(_ClauseOutcome(kind, f"corrected {slot}"))
            return
        if mod.pred == "replacing":
            new_action = self.actions[-1] if self.actions else "unknown"
            self.constraint_specs.append(ConstraintSpec(KIND_ACTION, action_symbol=new_action))
            self.outcomes.append(_ClauseOutcome(KIND_ACTION, f"redo as {new_action}"))
            return
        self.open_modifiers.append(mod.pred)
        self.outcomes.append(_ClauseOutcome(None, f"unclassified {mod.pred}"))

    # --- action handlers ------------------------------------------------------

    def _grasp_then(self, action: Frame, *extra: Pose) -> None:
        obj = self.object_for(action.args[1])
        self.note_referent("theme", obj)
        self.goals.append(_grasp_pose(obj, DEFAULT_GRASP))
        self.goals.extend(extra)

    def _do_graspObject(self, action: Frame, first: bool) -> None:
        self.actions.append("graspObject")
        self._grasp_then(action)
        self.outcomes.append(_ClauseOutcome(None, "grasp goal"))

    def _do_pickUp(self, action: Frame, first: bool) -> None:
        self.actions.append("pickUp")
        self._grasp_then(action)
        self.outcomes.append(_ClauseOutcome(None, "pick up goal"))

    def _do_putDown(self, action: Frame, first: bool) -> None:
        self.actions.append("putDown")
        obj = self.object_for(action.args[1])
        self.note_referent("theme", obj)
        self.goals.append(Pose(obj.position, (0.0, 0.0), label=f"{obj.id}:place"))
        self.outcomes.append(_ClauseOutcome(None, "put down goal"))

    def _do_passObject(self, action: Frame, first: bool) -> None:
        self.actions.append("passObject")
        self._grasp_then(action, _named_pose(self.world, "receive"))
        self.outcomes.append(_ClauseOutcome(None, "pass goal"))

    def _do_moveObject(self, action: Frame, first: bool) -> None:
        self.actions.append("moveObject")
        self._grasp_then(action, _named_pose(self.world, "receive"))
        self.outcomes.append(_ClauseOutcome(None, "move goal"))

    def _do_handObject(self, action: Frame, first: bool) -> None:
        self.actions.append("handObject")
        self._grasp_then(action, _named_pose(self.world, "handover"))
        self.outcomes.append(_ClauseOutcome(None, "handover goal"))

    def _do_pushObject(self, action: Frame, first: bool) -> None:
        self.actions.append("pushObject")
        obj = self.object_for(action.args[1])
        self.note_referent("theme", obj)
        self.goals.append(_grasp_pose(obj, DEFAULT_GRASP))
        self.outcomes.append(_ClauseOutcome(None, "push goal"))

    def _do_keepState(self, action: Frame, first: bool) -> None:
        state = action.args[2] if len(action.args) > 2 else None
        if isinstance(state, Sym) and state.name == "upright":
            self.orientation_box = UPRIGHT_BOX
            self.constraint_specs.append(
                ConstraintSpec(KIND_SAFETY, orientation_box=UPRIGHT_BOX)
            )
            self.outcomes.append(_ClauseOutcome(KIND_SAFETY, "keep upright"))
        else:
            self.open_modifiers.append("keepState")
            self.outcomes.append(_ClauseOutcome(None, "unclassified keepState"))

    def _do_not(self, action: Frame, first: bool) -> None:
        inner = action.args[0] if action.args else None
        if isinstance(inner, Frame) and inner.pred == "spillObject":
            # prohibited spilling maps to the same upright box
            self.orientation_box = UPRIGHT_BOX
            self.constraint_specs.append(
                ConstraintSpec(KIND_SAFETY, orientation_box=UPRIGHT_BOX)
            )
            self.outcomes.append(_ClauseOutcome(KIND_SAFETY, "no spilling"))
        else:
            name = inner.pred if isinstance(inner, Frame) else str(inner)
            self.open_modifiers.append(f"not({name})")
            self.outcomes.append(_ClauseOutcome(None, f"unclassified not({name})"))

    def _do_avoidRegion(self, action: Frame, first: bool) -> None:
        region_name = _keepout_name(action.args[1] if len(action.args) > 1 else None)
        if region_name is None or self.world.keepout_by_name(region_name) is None:
            raise UnresolvedReferentError(region_name or "avoid target")
        self.keepouts.append(region_name)
        self.constraint_specs.append(ConstraintSpec(KIND_SAFETY, keepout_ref=region_name))
        self.outcomes.append(_ClauseOutcome(KIND_SAFETY, f"avoid {region_name}"))

    def _do_adjustMotion(self, action: Frame, first: bool) -> None:
        manner = action.args[1] if len(action.args) > 1 else None
        factor = SPEED_FACTORS.get(manner.name if isinstance(manner, Sym) else "")
        if factor is None:
            self.open_modifiers.append("adjustMotion")
            self.outcomes.append(_ClauseOutcome(None, "unclassified manner"))
            return
        self.speed_scale *= factor
        self.constraint_specs.append(ConstraintSpec(KIND_MANNER, speed_scale=factor))
        self.outcomes.append(_ClauseOutcome(KIND_MANNER, f"speed x{factor}"))

    def _do_putObject(self, action: Frame, first: bool) -> None:
        self.actions.append("putObject")
        obj = self.object_for(action.args[1])
        self.note_referent("theme", obj)
        self.goals.append(_grasp_pose(obj, DEFAULT_GRASP))
        place = action.args[2] if len(action.args) > 2 else None
        if isinstance(place, Frame) and place.pred == "in" and place.args:
            dest = self.object_for(place.args[0])
            self.note_referent("destination", dest)
            self.goals.append(_place_pose(dest))
        self.outcomes.append(_ClauseOutcome(None, "place goal"))

    def plan(self) -> ResolvedPlan:
        return ResolvedPlan(
            goals=tuple(self.goals),
            orientation_box=self.orientation_box,
            keepout_names=tuple(self.keepouts),
            speed_scale=self.speed_scale,
            action_symbols=tuple(self.actions),
        )


def _place_pose(obj: WorldObject) -> Pose:
    above = (obj.position[0], obj.position[1], obj.position[2] + 0.10)
    return Pose(above, (0.0, 0.0), label=f"{obj.id}:place")


def _action_name(clause: Frame) -> str:
    action = action_of(clause)
    return action.pred if isinstance(action, Frame) else str(action)


def _keepout_name(value) -> str | None:
    # unwraps going(over(x)) / over(x) down to the landmark object name
    while isinstance(value, Frame) and value.args:
        value = value.args[0]
    return value.name if isinstance(value, Sym) else None


def interpret(
    parse: ChartNode,
    world: WorldSnapshot,
    seed: int = 0,
    prior_plan: ResolvedPlan | None = None,
) -> tuple[ResolvedPlan, list[ConstraintSpec], list[_ClauseOutcome], list[str]]:
    interp = _Interpreter(world, seed, prior_plan)
    interp.run(parse.semantics)
    return interp.plan(), interp.constraint_specs, interp.outcomes, interp.open_modifiers


def classify_all(parse: ChartNode, world: WorldSnapshot | None = None, seed: int = 0):
    """(description, kind) for every incremental constraint in the parse."""
    if world is None:
        world = _CLASSIFY_WORLD
    _, _, outcomes, _ = interpret(parse, world, seed)
    return [(o.description, o.kind) for o in outcomes if o.kind is not None]


def classify(parse: ChartNode, world: WorldSnapshot | None = None, seed: int = 0) -> str:
    """Taxonomy kind of the parse's latest incremental constraint."""
    classified = classify_all(parse, world, seed)
    if not classified:
        raise UnclassifiableModifierError("parse carries no classifiable constraint")
    return classified[-1][1]


def resolve(
    parse: ChartNode,
    world: WorldSnapshot,
    prior: InstructionEvent | None = None,
    seed: int = 0,
    timestamp: float = 0.0,
    event_id: int = 1,
) -> InstructionEvent:
    """Event carrying the goal/constraint/cost delta relative to ``prior``."""
    plan, specs, _outcomes, _open = interpret(
        parse, world, seed, prior.plan if prior else None
    )
    prior_plan = prior.plan if prior else ResolvedPlan()

    goal: Pose | None = None
    if plan.goals:
        prior_labels = [g.label for g in prior_plan.goals]
        new_labels = [g.label for g in plan.goals]
        if new_labels != prior_labels:
            for pose in plan.goals:
                if pose.label not in prior_labels:
                    goal = pose
                    break
            else:
                goal = plan.goals[0]

    delta_specs = tuple(
        spec
        for spec in specs
        if prior is None or spec not in prior.constraints or spec.kind == KIND_MANNER
    )

    cost_params = None
    if plan.speed_scale != prior_plan.speed_scale:
        base = CostParams()
        cost_params = base.scaled_speed(plan.speed_scale, SPEED_WEIGHT_CAP)

    if goal is None and not delta_specs and cost_params is None:
        # nothing changed; surface the absolute goal to keep the event valid
        goal = plan.goals[0] if plan.goals else None
        if goal is None:
            raise UnresolvedReferentError("empty instruction")

    return InstructionEvent(
        id=event_id,
        timestamp=timestamp,
        goal=goal,
        constraints=delta_specs,
        cost_params=cost_params,
        supersedes=prior.id if prior else None,
        plan=plan,
    )


def _make_classify_world() -> WorldSnapshot:
    """Synthetic scene so classification can ground the taxonomy examples."""
    from .geometry import box

    def obj(id_, name, attrs, pos):
        grasps = {
            "side": Pose(pos, (0.3, 0.0), label=f"{id_}:side"),
            "top": Pose((pos[0], pos[1], pos[2] + 0.05), (0.0, 0.0), label=f"{id_}:top"),
        }
        return WorldObject(id_, name, attrs, pos, grasps)

    workspace = box((-1.0, -1.0, 0.0), (1.0, 1.0, 1.5), name="workspace")
    return WorldSnapshot(
        objects=(
            obj("mug1", "mug", {"color": "black"}, (0.4, 0.4, 0.3)),
            obj("mug2", "mug", {"color": "blue"}, (0.4, -0.2, 0.3)),
            obj("apple1", "apple", {"color": "red"}, (0.2, 0.3, 0.3)),
            obj("box1", "box", {}, (0.5, -0.3, 0.3)),
            obj("box2", "box", {}, (0.6, 0.3, 0.3)),
            obj("cup1", "cup", {}, (0.3, 0.1, 0.3)),
            obj("screwdriver1", "screwdriver", {}, (0.45, 0.2, 0.3)),
            obj("laptop1", "laptop", {"color": "gray"}, (0.3, -0.1, 0.25)),
        ),
        obstacles=(),
        keepouts=(box((0.2, -0.2, 0.2), (0.4, 0.0, 1.0), name="laptop"),),
        workspace=workspace,
        named_poses={
            "receive": Pose((0.0, -0.6, 0.8), (0.0, 0.0), label="receive"),
            "handover": Pose((0.3, -0.75, 0.5), (0.0, 0.0), label="handover"),
        },
    )


_CLASSIFY_WORLD = _make_classify_world()
