"""Quasi-static settling of cuboid placements.

Implements the physically consistent transition: dropping an item at a
reference (x, y, yaw) resolves deterministically into one of three
outcomes: flat on its supports, leaning over the support edge nearest the
unsupported center of mass, or toppled past that edge. No randomness
anywhere; identical inputs give bit-identical states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

from .errors import PlacementError
from .geometry import (
    box_corners,
    clip_convex,
    convex_hull,
    exit_edge,
    mat_mul,
    mat_to_euler,
    obb_penetration_depth,
    point_in_convex,
    polygon_area,
    polygon_centroid,
    rect_corners,
    rot_z,
    rotation_matrix,
    tilt_about,
)
from .scene import ItemSpec, PlacedItem, PlacementAction, Pose, SceneState

if TYPE_CHECKING:  # pragma: no cover
    from .tasks import TaskDefinition

_AREA_EPS = 1e-12
_TOP_TOL = 1e-9
_SLIDE_STEP = 0.002
_MAX_SLIDES = 50


@dataclass(frozen=True)
class SettleConfig:
    """Contact parameters of the settling model.

    clearance is the drop gap above the highest support; friction_hold is
    the fraction of footprint overlap a lean needs to hold instead of
    toppling; tip_angle caps how steep a lean may be.
    """

    clearance: float = 0.002
    penetration_tolerance: float = 1e-4
    tip_angle: float = 1.0
    friction_hold: float = 0.25

    def __post_init__(self):
        if min(self.clearance, self.penetration_tolerance, self.tip_angle, self.friction_hold) <= 0:
            raise ValueError("settle parameters must be positive")
        if self.penetration_tolerance >= self.clearance:
            raise ValueError("penetration_tolerance must be below clearance")


def _support_under(placed, footprint):
    """Highest support height under a footprint and the contacts at it.

    Returns (z_sup, contacts) where contacts are (item, clip, area) triples
    for every overlapping item whose top reaches z_sup.
    """
    overlaps = []
    z_sup = 0.0
    for p in placed:
        clip = clip_convex(footprint, list(p.support_polygon))
        if not clip:
            continue
        area = polygon_area(clip)
        if area <= _AREA_EPS:
            continue
        overlaps.append((p, clip, area))
        if p.top_z > z_sup:
            z_sup = p.top_z
    contacts = [(p, c, a) for (p, c, a) in overlaps if p.top_z >= z_sup - _TOP_TOL]
    return z_sup, contacts


def drop_height(
    s: SceneState, item: ItemSpec, x: float, y: float, yaw: float, config: SettleConfig,
    plate_radius: float,
) -> float:
    """Reference height from which the item is released.

    Highest supporting top surface under the item's footprint, plus half
    the item height, plus the configured clearance.
    """
    if x * x + y * y > plate_radius * plate_radius:
        raise PlacementError(f"drop point ({x:.3f}, {y:.3f}) is off the plate")
    hx, hy = item.half_extents
    footprint = rect_corners(x, y, hx, hy, yaw)
    z_sup, _ = _support_under(s.placed, footprint)
    return z_sup + item.half_height + config.clearance


def _penetration(placed: Iterable[PlacedItem], spec: ItemSpec, pose_tuple, rot) -> float:
    """Worst cuboid overlap depth between a candidate pose and placed items."""
    hx, hy = spec.half_extents
    center = pose_tuple
    ext = (hx, hy, spec.half_height)
    worst = 0.0
    for p in placed:
        phx, phy = p.spec.half_extents
        depth = obb_penetration_depth(
            center,
            rot,
            ext,
            (p.pose.x, p.pose.y, p.pose.z),
            rotation_matrix(p.pose.roll, p.pose.pitch, p.pose.yaw),
            (phx, phy, p.spec.half_height),
        )
        if depth > worst:
            worst = depth
    return worst


def _settle_drop(
    state: SceneState, spec: ItemSpec, action: PlacementAction, config: SettleConfig
) -> Pose:
    hx, hy = spec.half_extents
    hh = spec.half_height
    x, y, yaw = action.x, action.y, action.yaw
    footprint = rect_corners(x, y, hx, hy, yaw)
    z_sup, contacts = _support_under(state.placed, footprint)

    if z_sup <= _TOP_TOL:
        return Pose(x, y, hh, 0.0, 0.0, yaw)

    com_supported = any(point_in_convex(x, y, clip) for _, clip, _ in contacts)
    if com_supported:
        return Pose(x, y, z_sup + hh, 0.0, 0.0, yaw)

    # Unsupported center of mass: find the support edge it violates. The ray
    # from the dominant contact's centroid through the COM stays inside the
    # (convex) item footprint, so it always exits through a supporter edge.
    dominant = max(contacts, key=lambda t: t[2])
    cx, cy = polygon_centroid(dominant[1])
    edge = exit_edge(dominant[1], cx, cy, x, y)
    if edge is None:
        ux, uy = math.cos(yaw), math.sin(yaw)
    else:
        (ax, ay), (bx, by) = edge
        ex, ey = bx - ax, by - ay
        norm = math.hypot(ex, ey)
        if norm < 1e-12:
            ux, uy = math.cos(yaw), math.sin(yaw)
        else:
            # outward normal of a CCW polygon edge
            ux, uy = ey / norm, -ex / norm

    # Pivot line: outermost support point along the fall direction.
    p_u = max(vx * ux + vy * uy for _, clip, _ in contacts for vx, vy in clip)
    com_u = x * ux + y * uy
    far_u = max(vx * ux + vy * uy for vx, vy in footprint)
    d_far = far_u - p_u
    a = com_u - p_u

    fp_area = polygon_area(footprint)
    total_area = sum(t[2] for t in contacts)
    hold = total_area / fp_area >= config.friction_hold
    can_span = a > 0.0 and d_far > 0.0 and z_sup < d_far * math.sin(config.tip_angle)
    if hold and can_span:
        lam = math.asin(z_sup / d_far)
        rot = mat_mul(tilt_about(ux, uy, lam), rot_z(yaw))
        qx = x + (p_u - com_u) * ux
        qy = y + (p_u - com_u) * uy
        shift = a * math.cos(lam) + hh * math.sin(lam)
        cz = z_sup - a * math.sin(lam) + hh * math.cos(lam)
        cand = (qx + shift * ux, qy + shift * uy, cz)
        if _penetration(state.placed, spec, cand, rot) <= config.penetration_tolerance:
            roll, pitch, eyaw = mat_to_euler(rot)
            return Pose(cand[0], cand[1], cand[2], roll, pitch, eyaw)

    return _topple(state, spec, (x, y), (ux, uy), p_u, yaw, config)


def _topple(
    state: SceneState,
    spec: ItemSpec,
    com,
    direction,
    p_u: float,
    yaw: float,
    config: SettleConfig,
) -> Pose:
    """Rotate the box flat over the pivot edge, sliding outward until clear."""
    hx, hy = spec.half_extents
    hh = spec.half_height
    ux, uy = direction
    x0, y0 = com
    rot = mat_mul(tilt_about(ux, uy, 0.5 * math.pi), rot_z(yaw))
    roll, pitch, eyaw = mat_to_euler(rot)

    # Extents of the rotated box along the fall direction and vertically.
    corners0 = box_corners(0.0, 0.0, 0.0, rot, hx, hy, hh)
    e_u = max(c[0] * ux + c[1] * uy for c in corners0)
    e_z = max(c[2] for c in corners0)

    com_u = x0 * ux + y0 * uy
    for i in range(_MAX_SLIDES + 1):
        c_u = p_u + e_u + i * _SLIDE_STEP
        cx = x0 + (c_u - com_u) * ux
        cy = y0 + (c_u - com_u) * uy
        fp = convex_hull([(cx + c[0], cy + c[1]) for c in corners0])
        z_land, _ = _support_under(state.placed, fp)
        cand = (cx, cy, z_land + e_z)
        if _penetration(state.placed, spec, cand, rot) <= config.penetration_tolerance:
            return Pose(cand[0], cand[1], cand[2], roll, pitch, eyaw)

    # Last resort: rest upright on top of whatever is underneath.
    upright_fp = rect_corners(x0, y0, hx, hy, yaw)
    z_sup, _ = _support_under(state.placed, upright_fp)
    return Pose(x0, y0, z_sup + hh, 0.0, 0.0, yaw)


def _recheck_earlier(state: SceneState, config: SettleConfig) -> SceneState:
    """Single relaxation pass: re-settle earlier movables whose support failed.

    Items are only ever added, so support rarely disappears; this guards
    the invariant explicitly and deterministically.
    """
    for idx, p in enumerate(state.placed):
        if p.spec.fixed or not p.pose.upright:
            continue
        hh = p.spec.half_height
        if p.pose.z <= hh + 1e-6:
            continue  # resting on the plate
        others = tuple(q for j, q in enumerate(state.placed) if j != idx)
        hx, hy = p.spec.half_extents
        fp = rect_corners(p.pose.x, p.pose.y, hx, hy, p.pose.yaw)
        z_sup, contacts = _support_under(others, fp)
        supported = abs(z_sup + hh - p.pose.z) <= 1e-6 and any(
            point_in_convex(p.pose.x, p.pose.y, clip) for _, clip, _ in contacts
        )
        if not supported:
            shrunk = SceneState(task_id=state.task_id, placed=others, stage=state.stage)
            act = PlacementAction(p.pose.x, p.pose.y, p.pose.yaw)
            pose = _settle_drop(shrunk, p.spec, act, config)
            state = state.replace_pose(idx, pose)
    return state


def step(s: SceneState, a: PlacementAction, task: "TaskDefinition") -> SceneState:
    """Settle the next movable item under action ``a``."""
    if not a.is_finite():
        raise PlacementError("action components must be finite")
    if not task.action_bounds.contains(a):
        raise PlacementError(f"action {a} outside bounds {task.action_bounds}")
    if a.x * a.x + a.y * a.y > task.plate_radius**2:
        raise PlacementError(f"drop point ({a.x:.3f}, {a.y:.3f}) is off the plate")
    if s.stage >= len(task.movable_ids):
        raise PlacementError("all movable items already placed")
    spec = task.item(task.movable_ids[s.stage])
    pose = _settle_drop(s, spec, a, task.settle)
    out = s.with_item(spec, pose)
    return _recheck_earlier(out, task.settle)


def rollout(alpha: SceneState, actions: Sequence[PlacementAction], task: "TaskDefinition") -> SceneState:
    """Apply ``step`` over the whole action sequence starting from ``alpha``."""
    if len(actions) > len(task.movable_ids) - alpha.stage:
        raise PlacementError("more actions than remaining movable items")
    state = alpha
    for a in actions:
        state = step(state, a, task)
    return state


def batch_rollout(
    alpha: SceneState, action_lists: Sequence[Sequence[PlacementAction]], task: "TaskDefinition"
) -> list[SceneState]:
    """Element-wise ``rollout`` over a batch, order preserved."""
    return [rollout(alpha, u, task) for u in action_lists]


def max_penetration(state: SceneState) -> float:
    """Worst pairwise cuboid overlap depth in a settled state."""
    worst = 0.0
    placed = state.placed
    for i in range(len(placed)):
        p = placed[i]
        hx, hy = p.spec.half_extents
        rot = rotation_matrix(p.pose.roll, p.pose.pitch, p.pose.yaw)
        for j in range(i + 1, len(placed)):
            q = placed[j]
            qhx, qhy = q.spec.half_extents
            depth = obb_penetration_depth(
                (p.pose.x, p.pose.y, p.pose.z),
                rot,
                (hx, hy, p.spec.half_height),
                (q.pose.x, q.pose.y, q.pose.z),
                rotation_matrix(q.pose.roll, q.pose.pitch, q.pose.yaw),
                (qhx, qhy, q.spec.half_height),
            )
            if depth > worst:
                worst = depth
    return worst


def tilt_of(pose: Pose) -> float:
    """Angle between the item's body z-axis and the world vertical."""
    rot = rotation_matrix(pose.roll, pose.pitch, pose.yaw)
    return math.acos(min(1.0, max(-1.0, rot[2][2])))


def support_violations(state: SceneState, config: SettleConfig) -> list[int]:
    """Ids of non-fixed items that are neither on the plate nor supported.

    An item passes if it rests flat on the plate, or its center of mass
    projects inside the union of its supporting contacts, or it leans
    within the configured tip angle with positive contact, or it lies
    toppled on its side.
    """
    bad = []
    for idx, p in enumerate(state.placed):
        if p.spec.fixed:
            continue
        hh = p.spec.half_height
        if p.pose.upright and p.pose.z <= hh + 1e-6:
            continue  # flat on the plate
        tilt = tilt_of(p.pose)
        if tilt >= 0.5 * math.pi - 1e-6:
            continue  # toppled flat onto its side
        others = tuple(q for j, q in enumerate(state.placed) if j != idx)
        fp = list(p.support_polygon)
        z_sup, contacts = _support_under(others, fp)
        if p.pose.upright:
            ok = bool(contacts) and any(
                point_in_convex(p.pose.x, p.pose.y, clip) for _, clip, _ in contacts
            )
        else:
            ok = bool(contacts) and tilt <= config.tip_angle + 1e-9
        if not ok:
            bad.append(p.spec.id)
    return bad


def toppled_items(state: SceneState) -> list[int]:
    """Ids of items lying on their side (tilt at a right angle)."""
    return [
        p.spec.id for p in state.placed if tilt_of(p.pose) >= 0.5 * math.pi - 1e-6
    ]


def dump_state(state: SceneState) -> str:
    """Line-oriented record of a settled scene, one pose per line."""
    lines = [f"# task={state.task_id} stage={state.stage} items={len(state.placed)}"]
    for p in state.placed:
        x, y, z, roll, pitch, yaw = p.pose.as_tuple()
        lines.append(f"{p.spec.id} {x!r} {y!r} {z!r} {roll!r} {pitch!r} {yaw!r}")
    return "\n".join(lines) + "\n"
