"""Rule templates: map preference weights to rule-abiding target arrangements.

Each movable item takes its yaw directly from one weight component and is
posed leaning against a face of its anchor item ("mountain" silhouette):
the yaw also slides the contact point along the anchor face, so position
follows from yaw. Targets are geometric only; nothing here checks whether
the physics can actually realize them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .geometry import mat_mul, mat_to_euler, rot_z, tilt_about, wrap_angle
from .scene import (
    ItemSpec,
    PlacedItem,
    PlacementAction,
    Pose,
    SceneState,
    WeightGrid,
    flatten_state,
)

_FACES = (0.0, 0.5 * math.pi, math.pi, -0.5 * math.pi)


@dataclass(frozen=True)
class MovableRule:
    """How one movable item derives its target pose from its weight."""

    item_id: int
    lean_on: int
    face_angle: float = 0.0  # anchor-frame face normal: 0, +-pi/2 or pi
    contact_depth: float = 0.3  # fraction of the item span overlapping the anchor
    tangent_gain: float = 0.02  # meters of slide along the face per radian of yaw
    tangent_bias: float = 0.0
    psi_min: float = -math.pi / 3
    psi_max: float = math.pi / 3

    def __post_init__(self):
        if not self.psi_min < self.psi_max:
            raise ValueError("psi_min must be below psi_max")
        if not 0.0 < self.contact_depth < 0.5:
            raise ValueError("contact_depth must be in (0, 0.5)")
        if not any(abs(wrap_angle(self.face_angle - f)) < 1e-9 for f in _FACES):
            raise ValueError("face_angle must be one of 0, +-pi/2, pi")

    def psi(self, w: float) -> float:
        return self.psi_min + w * (self.psi_max - self.psi_min)

    @property
    def psi_mid(self) -> float:
        return 0.5 * (self.psi_min + self.psi_max)


@dataclass(frozen=True)
class RuleTemplate:
    """Self-contained rule map for one task."""

    task_id: str
    base: tuple[PlacedItem, ...]
    movable_specs: tuple[ItemSpec, ...]
    movables: tuple[MovableRule, ...]
    predicates: tuple[str, ...] = ()

    def __post_init__(self):
        if len(self.movable_specs) != len(self.movables):
            raise ValueError("one rule entry per movable item required")
        base_ids = {p.spec.id for p in self.base}
        for m in self.movables:
            if m.lean_on not in base_ids:
                raise ValueError(f"lean target {m.lean_on} is not a fixed item")

    @property
    def n_w(self) -> int:
        return len(self.movables)

    def anchor(self, item_id: int) -> PlacedItem:
        for p in self.base:
            if p.spec.id == item_id:
                return p
        raise KeyError(item_id)


def mountain_pose(spec: ItemSpec, anchor: PlacedItem, rule: MovableRule, psi: float) -> Pose:
    """Target lean pose of one movable item for yaw ``psi``.

    The item's intended drop overlaps the anchor face by ``contact_depth``
    of its own span, which fixes the lean angle; yaw slides the contact
    point along the face.
    """
    hx, hy = spec.half_extents
    hh = spec.half_height
    az = anchor.pose.yaw + rule.face_angle
    ux, uy = math.cos(az), math.sin(az)
    tx, ty = -uy, ux

    bx, by = anchor.spec.half_extents
    along_x = abs(math.cos(rule.face_angle)) > 0.5
    e_n = bx if along_x else by

    gamma = wrap_angle(psi - az)
    e_eff = hx * abs(math.cos(gamma)) + hy * abs(math.sin(gamma))
    a = e_eff * (1.0 - 2.0 * rule.contact_depth)
    d_far = a + e_eff
    z_e = anchor.top_z
    if z_e >= d_far:
        raise ValueError(
            f"item {spec.id} cannot span anchor {anchor.spec.id} of height {z_e}"
            f" at contact depth {rule.contact_depth} (reach {d_far})"
        )
    lam = math.asin(z_e / d_far)

    t = rule.tangent_bias + rule.tangent_gain * (psi - rule.psi_mid)
    qx = anchor.pose.x + e_n * ux + t * tx
    qy = anchor.pose.y + e_n * uy + t * ty

    shift = a * math.cos(lam) + hh * math.sin(lam)
    z = z_e - a * math.sin(lam) + hh * math.cos(lam)
    rot = mat_mul(tilt_about(ux, uy, lam), rot_z(psi))
    roll, pitch, yaw = mat_to_euler(rot)
    return Pose(qx + shift * ux, qy + shift * uy, z, roll, pitch, yaw)


def rule_target(w, t: RuleTemplate) -> SceneState:
    """Target arrangement for weight vector ``w``; physically unchecked."""
    w = tuple(float(v) for v in w)
    if len(w) != t.n_w:
        raise ValueError(f"weight dimension {len(w)} != template dimension {t.n_w}")
    if any(not 0.0 <= v <= 1.0 for v in w):
        raise ValueError(f"weight components must lie in [0, 1], got {w}")
    placed = list(t.base)
    for spec, rule, wd in zip(t.movable_specs, t.movables, w):
        pose = mountain_pose(spec, t.anchor(rule.lean_on), rule, rule.psi(wd))
        placed.append(PlacedItem(spec, pose))
    placed.sort(key=lambda p: p.spec.id)
    return SceneState(task_id=t.task_id, placed=tuple(placed), stage=len(t.movables))


def reference_actions(w, t: RuleTemplate) -> list[PlacementAction]:
    """In-plane components of the target poses, in placement order."""
    target = rule_target(w, t)
    by_id = {p.spec.id: p.pose for p in target.placed}
    out = []
    for rule in t.movables:
        pose = by_id[rule.item_id]
        out.append(PlacementAction(pose.x, pose.y, pose.yaw))
    return out


def optimal_drop(w, t: RuleTemplate) -> list[PlacementAction]:
    """Drop actions whose settled result reproduces the targets exactly
    (when the scene is clear of interference): body yaw plus the intended
    pre-tilt center position."""
    out = []
    w = tuple(float(v) for v in w)
    for spec, rule, wd in zip(t.movable_specs, t.movables, w):
        anchor = t.anchor(rule.lean_on)
        psi = rule.psi(wd)
        hx, hy = spec.half_extents
        az = anchor.pose.yaw + rule.face_angle
        ux, uy = math.cos(az), math.sin(az)
        tx, ty = -uy, ux
        bx, by = anchor.spec.half_extents
        e_n = bx if abs(math.cos(rule.face_angle)) > 0.5 else by
        gamma = wrap_angle(psi - az)
        e_eff = hx * abs(math.cos(gamma)) + hy * abs(math.sin(gamma))
        a = e_eff * (1.0 - 2.0 * rule.contact_depth)
        tg = rule.tangent_bias + rule.tangent_gain * (psi - rule.psi_mid)
        out.append(
            PlacementAction(
                anchor.pose.x + e_n * ux + tg * tx + a * ux,
                anchor.pose.y + e_n * uy + tg * ty + a * uy,
                psi,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Validation: injectivity and rule predicates over the whole weight grid.

def _tilt_of(pose: Pose) -> float:
    from .geometry import rotation_matrix

    rot = rotation_matrix(pose.roll, pose.pitch, pose.yaw)
    return math.acos(min(1.0, max(-1.0, rot[2][2])))


def _predicate_leaning(t: RuleTemplate, target: SceneState, tip_angle: float) -> bool:
    for spec, rule in zip(t.movable_specs, t.movables):
        pose = target.pose_of(rule.item_id)
        tilt = _tilt_of(pose)
        if not (0.0 < tilt <= tip_angle and pose.z > spec.half_height):
            return False
    return True


def _predicate_center_below_anchor_top(t: RuleTemplate, target: SceneState, tip_angle: float) -> bool:
    # Mountain silhouette: garnish centers stay at or below the peak they
    # lean on (within half their own thickness).
    for spec, rule in zip(t.movable_specs, t.movables):
        pose = target.pose_of(rule.item_id)
        if pose.z > t.anchor(rule.lean_on).top_z + spec.half_height:
            return False
    return True


def _predicate_front_of_anchor(t: RuleTemplate, target: SceneState, tip_angle: float) -> bool:
    # Each movable sits on the outward side of the face it leans on.
    for rule in t.movables:
        pose = target.pose_of(rule.item_id)
        anchor = t.anchor(rule.lean_on)
        az = anchor.pose.yaw + rule.face_angle
        ux, uy = math.cos(az), math.sin(az)
        rel = (pose.x - anchor.pose.x) * ux + (pose.y - anchor.pose.y) * uy
        if rel <= 0.0:
            return False
    return True


PREDICATES = {
    "leaning": _predicate_leaning,
    "center_below_anchor_top": _predicate_center_below_anchor_top,
    "front_of_anchor": _predicate_front_of_anchor,
}

_MIN_GAP = 1e-9


def grid_targets(t: RuleTemplate, grid: WeightGrid) -> np.ndarray:
    """Flattened targets for every grid point, shape (len(grid), 6 * items)."""
    return np.stack(
        [flatten_state(rule_target(grid.point(i), t)) for i in range(len(grid))]
    )


def min_target_gap(t: RuleTemplate, grid: WeightGrid) -> float:
    """Smallest pairwise distance between flattened grid targets."""
    flats = grid_targets(t, grid)
    tree = cKDTree(flats)
    dists, _ = tree.query(flats, k=2)
    return float(dists[:, 1].min())


def validate_template(
    t: RuleTemplate, grid: WeightGrid, tip_angle: float, plate_radius: float
) -> dict:
    """Check injectivity, geometry, and predicates over the full grid.

    Raises ValueError on the first violation; returns summary stats.
    """
    if grid.n_dims != t.n_w:
        raise ValueError("grid dimension does not match template")

    checks = [(name, PREDICATES[name]) for name in t.predicates]
    for idx in range(len(grid)):
        w = grid.point(idx)
        target = rule_target(w, t)
        for rule in t.movables:
            pose = target.pose_of(rule.item_id)
            if pose.x**2 + pose.y**2 > plate_radius**2:
                raise ValueError(
                    f"target for w={w} places item {rule.item_id} off the plate"
                )
        for name, fn in checks:
            if not fn(t, target, tip_angle):
                raise ValueError(f"predicate '{name}' fails at w={w}")

    gap = min_target_gap(t, grid)
    if gap <= _MIN_GAP:
        raise ValueError(f"rule map not injective on the grid: min gap {gap}")
    return {"grid_points": len(grid), "min_gap": gap}
