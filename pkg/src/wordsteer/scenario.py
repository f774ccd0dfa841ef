"""Scenario documents: a world, an initial state, and a timed word stream."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .controller import EEState
from .world import WorldSnapshot, load_shipped_world, load_world, load_world_dict

SCENARIO_SCHEMA = "wordsteer/scenario@1"

MODE_ONLINE = "online"
MODE_BASELINE = "offline_baseline"


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    name: str
    world: WorldSnapshot
    initial_state: EEState
    utterance: tuple[tuple[float, str], ...]
    mode: str = MODE_ONLINE
    offline_latency: float = 0.0
    seed: int = 0
    timeout: float = 60.0

    def __post_init__(self):
        if self.mode not in (MODE_ONLINE, MODE_BASELINE):
            raise ScenarioError(f"unknown mode {self.mode!r}")
        times = [t for t, _ in self.utterance]
        if times != sorted(times):
            raise ScenarioError("utterance timestamps must be non-decreasing")
        if self.offline_latency > 0 and self.mode != MODE_BASELINE:
            raise ScenarioError("offline latency only applies to the baseline mode")
        if self.mode == MODE_BASELINE and self.offline_latency <= 0:
            raise ScenarioError("baseline mode needs a positive offline latency")

    def words_until(self, t: float, start_index: int) -> list[tuple[float, str]]:
        out = []
        for wt, word in self.utterance[start_index:]:
            if wt <= t + 1e-9:
                out.append((wt, word))
            else:
                break
        return out


def scenario_from_dict(doc: dict, base_dir: Path | None = None) -> Scenario:
    if doc.get("schema") != SCENARIO_SCHEMA:
        raise ScenarioError(f"unsupported scenario schema {doc.get('schema')!r}")
    world_ref = doc["world"]
    if isinstance(world_ref, dict):
        world = load_world_dict(world_ref)
    else:
        path = Path(world_ref)
        if not path.is_absolute() and base_dir is not None:
            path = base_dir / path
        if path.exists():
            world = load_world(path)
        else:
            world = load_shipped_world(Path(world_ref).stem)
    init = doc.get("initial_state", {})
    state = EEState(
        p=tuple(init.get("position", (0.0, 0.0, 0.5))),
        e=tuple(init.get("orientation", (0.0, 0.0))),
        v=tuple(init.get("velocity", (0.0, 0.0, 0.0))),
        edot=tuple(init.get("orientation_rate", (0.0, 0.0))),
    )
    words = tuple((float(w["t"]), str(w["word"])) for w in doc.get("utterance", []))
    return Scenario(
        name=doc.get("name", "scenario"),
        world=world,
        initial_state=state,
        utterance=words,
        mode=doc.get("mode", MODE_ONLINE),
        offline_latency=float(doc.get("offline_latency", 0.0)),
        seed=int(doc.get("seed", 0)),
        timeout=float(doc.get("timeout", 60.0)),
    )


def load_scenario(ref: str | Path) -> Scenario:
    """Load a scenario by file path or shipped name (e.g. ``scenario1``)."""
    path = Path(ref)
    if path.exists():
        with open(path, encoding="utf-8") as fh:
            return scenario_from_dict(json.load(fh), base_dir=path.parent)
    text = (
        resources.files("wordsteer.data")
        .joinpath("scenarios", f"{ref}.json")
        .read_text("utf-8")
    )
    return scenario_from_dict(json.loads(text))


def shipped_scenarios() -> list[str]:
    root = resources.files("wordsteer.data").joinpath("scenarios")
    return sorted(p.name.removesuffix(".json") for p in root.iterdir() if p.name.endswith(".json"))
