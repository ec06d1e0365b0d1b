"""Task definitions: item rosters, bounds, settling parameters, rule templates.

Tasks load from YAML files. The shipped tasks (taro, shrimp, tempura) live
in the package data directory and can be addressed by name.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from importlib import resources
from pathlib import Path

import yaml

from .rules import MovableRule, RuleTemplate
from .scene import ItemSpec, PlacedItem, PlacementAction, Pose, SceneState, WeightGrid
from .settle import SettleConfig

SHIPPED_TASKS = ("taro", "shrimp", "tempura")


@dataclass(frozen=True)
class ActionBounds:
    """Axis-aligned box constraining placement actions."""

    x: tuple[float, float]
    y: tuple[float, float]
    yaw: tuple[float, float]

    def contains(self, a: PlacementAction) -> bool:
        return (
            self.x[0] <= a.x <= self.x[1]
            and self.y[0] <= a.y <= self.y[1]
            and self.yaw[0] <= a.yaw <= self.yaw[1]
        )

    def clip(self, x: float, y: float, yaw: float) -> tuple[float, float, float]:
        return (
            min(max(x, self.x[0]), self.x[1]),
            min(max(y, self.y[0]), self.y[1]),
            min(max(yaw, self.yaw[0]), self.yaw[1]),
        )


@dataclass(frozen=True)
class TaskDefinition:
    """Everything needed to settle, target, and plan one arrangement task."""

    task_id: str
    plate_radius: float
    items: tuple[ItemSpec, ...]
    fixed_poses: dict[int, Pose]
    action_bounds: ActionBounds
    settle: SettleConfig
    rule: RuleTemplate
    points_per_dim: int = 21

    def __post_init__(self):
        ids = [it.id for it in self.items]
        if ids != list(range(len(ids))):
            raise ValueError("item ids must be contiguous from 0 in placement order")
        for it in self.items:
            if it.fixed and it.id not in self.fixed_poses:
                raise ValueError(f"fixed item {it.id} needs a pose")
            if not it.fixed and it.id in self.fixed_poses:
                raise ValueError(f"movable item {it.id} must not have a fixed pose")

    @cached_property
    def movable_ids(self) -> tuple[int, ...]:
        return tuple(it.id for it in self.items if not it.fixed)

    @property
    def n_w(self) -> int:
        return len(self.movable_ids)

    @cached_property
    def grid(self) -> WeightGrid:
        return WeightGrid(n_dims=self.n_w, points_per_dim=self.points_per_dim)

    def item(self, item_id: int) -> ItemSpec:
        return self.items[item_id]

    @cached_property
    def initial_state(self) -> SceneState:
        placed = tuple(
            PlacedItem(it, self.fixed_poses[it.id]) for it in self.items if it.fixed
        )
        return SceneState(task_id=self.task_id, placed=placed, stage=0)


def _parse_item(raw: dict) -> tuple[ItemSpec, Pose | None]:
    spec = ItemSpec(
        id=int(raw["id"]),
        half_extents=(float(raw["half_extents"][0]), float(raw["half_extents"][1])),
        height=float(raw["height"]),
        mass=float(raw["mass"]),
        fixed=bool(raw.get("fixed", False)),
        name=str(raw.get("name", "")),
    )
    pose = None
    if "pose" in raw:
        pose = Pose(*[float(v) for v in raw["pose"]])
    return spec, pose


def task_from_dict(data: dict) -> TaskDefinition:
    items = []
    fixed_poses = {}
    for raw in data["items"]:
        spec, pose = _parse_item(raw)
        items.append(spec)
        if pose is not None:
            fixed_poses[spec.id] = pose
    items.sort(key=lambda it: it.id)

    settle = SettleConfig(**data.get("settle", {}))
    ab = data["action_bounds"]
    bounds = ActionBounds(
        x=(float(ab["x"][0]), float(ab["x"][1])),
        y=(float(ab["y"][0]), float(ab["y"][1])),
        yaw=(float(ab["yaw"][0]), float(ab["yaw"][1])),
    )

    rule_raw = data["rule"]
    psi_lo, psi_hi = (float(v) for v in rule_raw["psi_range"])
    base = tuple(
        PlacedItem(it, fixed_poses[it.id]) for it in items if it.fixed
    )
    movables = []
    for m in rule_raw["movables"]:
        item_id = int(m["item"])
        movables.append(
            MovableRule(
                item_id=item_id,
                lean_on=int(m["lean_on"]),
                face_angle=float(m.get("face_angle", 0.0)),
                contact_depth=float(m.get("contact_depth", 0.3)),
                tangent_gain=float(m.get("tangent_gain", 0.02)),
                tangent_bias=float(m.get("tangent_bias", 0.0)),
                psi_min=float(m.get("psi_min", psi_lo)),
                psi_max=float(m.get("psi_max", psi_hi)),
            )
        )
    template = RuleTemplate(
        task_id=str(data["task_id"]),
        base=base,
        movable_specs=tuple(it for it in items if not it.fixed),
        movables=tuple(movables),
        predicates=tuple(rule_raw.get("predicates", ())),
    )

    return TaskDefinition(
        task_id=str(data["task_id"]),
        plate_radius=float(data["plate_radius"]),
        items=tuple(items),
        fixed_poses=fixed_poses,
        action_bounds=bounds,
        settle=settle,
        rule=template,
        points_per_dim=int(data.get("grid_points_per_dim", 21)),
    )


def load_task(source: str | Path) -> TaskDefinition:
    """Load a task by shipped name ('taro', 'shrimp', 'tempura') or file path."""
    name = str(source)
    if name in SHIPPED_TASKS:
        text = resources.files("platekit.data").joinpath(f"{name}.yaml").read_text()
    else:
        text = Path(source).read_text()
    return task_from_dict(yaml.safe_load(text))
