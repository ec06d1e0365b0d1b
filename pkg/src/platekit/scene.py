"""Domain types shared by every other module: items, poses, states, weights.

All types are immutable value objects. An arrangement state carries the
ordered roster of items currently on the plate (fixed scenery first,
then movable items in placement order) with one pose per item.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .geometry import box_corners, convex_hull, rect_corners, rotation_matrix, wrap_angle

POSE_DIMS = 6  # (x, y, z, roll, pitch, yaw) per item


@dataclass(frozen=True)
class ItemSpec:
    """A rigid cuboid item. Footprint half extents are (hx, hy) in meters."""

    id: int
    half_extents: tuple[float, float]
    height: float
    mass: float
    fixed: bool = False
    name: str = ""

    def __post_init__(self):
        hx, hy = self.half_extents
        if not (hx > 0 and hy > 0 and self.height > 0 and self.mass > 0):
            raise ValueError(f"item {self.id}: dimensions and mass must be positive")

    @property
    def half_height(self) -> float:
        return 0.5 * self.height


@dataclass(frozen=True)
class Pose:
    """Position of the cuboid center plus roll/pitch/yaw, radians in (-pi, pi]."""

    x: float
    y: float
    z: float
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    def __post_init__(self):
        vals = (self.x, self.y, self.z, self.roll, self.pitch, self.yaw)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("pose components must be finite")
        object.__setattr__(self, "roll", wrap_angle(self.roll))
        object.__setattr__(self, "pitch", wrap_angle(self.pitch))
        object.__setattr__(self, "yaw", wrap_angle(self.yaw))

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.x, self.y, self.z, self.roll, self.pitch, self.yaw)

    @property
    def upright(self) -> bool:
        return self.roll == 0.0 and self.pitch == 0.0


@dataclass(frozen=True)
class PlacementAction:
    """Reference drop position and yaw for the next movable item."""

    x: float
    y: float
    yaw: float

    def is_finite(self) -> bool:
        return all(math.isfinite(v) for v in (self.x, self.y, self.yaw))


@dataclass(frozen=True)
class PlacedItem:
    spec: ItemSpec
    pose: Pose

    @cached_property
    def corners(self) -> list[tuple[float, float, float]]:
        """The 8 world-frame corners of the item's box."""
        hx, hy = self.spec.half_extents
        rot = rotation_matrix(self.pose.roll, self.pose.pitch, self.pose.yaw)
        return box_corners(
            self.pose.x, self.pose.y, self.pose.z, rot, hx, hy, self.spec.half_height
        )

    @cached_property
    def support_polygon(self) -> tuple[tuple[float, float], ...]:
        """CCW footprint used for contact: the box projected onto the plane."""
        if self.pose.upright:
            hx, hy = self.spec.half_extents
            return tuple(rect_corners(self.pose.x, self.pose.y, hx, hy, self.pose.yaw))
        return tuple(convex_hull([(c[0], c[1]) for c in self.corners]))

    @cached_property
    def top_z(self) -> float:
        """Highest point of the box; flat top height for upright items."""
        if self.pose.upright:
            return self.pose.z + self.spec.half_height
        return max(c[2] for c in self.corners)


@dataclass(frozen=True)
class SceneState:
    """Poses of all items currently on the plate, ordered by item id."""

    task_id: str
    placed: tuple[PlacedItem, ...]
    stage: int = 0

    def __post_init__(self):
        ids = [p.spec.id for p in self.placed]
        if ids != sorted(ids) or len(set(ids)) != len(ids):
            raise ValueError("placed items must be ordered by unique id")

    def with_item(self, spec: ItemSpec, pose: Pose) -> "SceneState":
        bump = 0 if spec.fixed else 1
        return SceneState(
            task_id=self.task_id,
            placed=self.placed + (PlacedItem(spec, pose),),
            stage=self.stage + bump,
        )

    def replace_pose(self, index: int, pose: Pose) -> "SceneState":
        items = list(self.placed)
        items[index] = PlacedItem(items[index].spec, pose)
        return SceneState(task_id=self.task_id, placed=tuple(items), stage=self.stage)

    def pose_of(self, item_id: int) -> Pose:
        for p in self.placed:
            if p.spec.id == item_id:
                return p.pose
        raise KeyError(f"item {item_id} not placed")

    def __len__(self) -> int:
        return len(self.placed)


def flatten_state(s: SceneState) -> np.ndarray:
    """Flatten to a 6N vector ordered by item id: (x, y, z, roll, pitch, yaw)."""
    out = np.empty(POSE_DIMS * len(s.placed))
    for i, p in enumerate(s.placed):
        out[POSE_DIMS * i : POSE_DIMS * (i + 1)] = p.pose.as_tuple()
    return out


def unflatten_state(vec: np.ndarray, template: SceneState) -> SceneState:
    """Rebuild a state from a flat vector using ``template``'s item roster."""
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (POSE_DIMS * len(template.placed),):
        raise ValueError(
            f"expected length {POSE_DIMS * len(template.placed)}, got {vec.shape}"
        )
    placed = tuple(
        PlacedItem(p.spec, Pose(*vec[POSE_DIMS * i : POSE_DIMS * (i + 1)]))
        for i, p in enumerate(template.placed)
    )
    return SceneState(task_id=template.task_id, placed=placed, stage=template.stage)


def grid_value(index: int, points_per_dim: int) -> float:
    """Coordinate of grid node ``index`` on a [0, 1] axis."""
    if not 0 <= index < points_per_dim:
        raise IndexError(f"grid index {index} out of range [0, {points_per_dim})")
    return index / (points_per_dim - 1)


def w_distance(a, b) -> float:
    """Euclidean distance between two weight vectors of equal dimension."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"weight dimension mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


@dataclass(frozen=True)
class WeightGrid:
    """Regular discretization of [0, 1]^n, enumerated in row-major order."""

    n_dims: int
    points_per_dim: int = 21

    def __post_init__(self):
        if self.n_dims < 1 or self.points_per_dim < 2:
            raise ValueError("grid needs n_dims >= 1 and points_per_dim >= 2")

    def __len__(self) -> int:
        return self.points_per_dim**self.n_dims

    @property
    def spacing(self) -> float:
        return 1.0 / (self.points_per_dim - 1)

    def point(self, index: int) -> tuple[float, ...]:
        if not 0 <= index < len(self):
            raise IndexError(f"grid index {index} out of range")
        coords = []
        rem = index
        for _ in range(self.n_dims):
            rem, k = divmod(rem, self.points_per_dim)
            coords.append(grid_value(k, self.points_per_dim))
        return tuple(reversed(coords))

    def index_of(self, w) -> int:
        """Index of the grid point nearest to ``w`` (exact for on-grid points)."""
        idx = 0
        for wd in w:
            k = int(round(float(wd) * (self.points_per_dim - 1)))
            k = min(max(k, 0), self.points_per_dim - 1)
            idx = idx * self.points_per_dim + k
        return idx

    @cached_property
    def points(self) -> np.ndarray:
        """All grid points as an array of shape (len(self), n_dims)."""
        axes = [np.linspace(0.0, 1.0, self.points_per_dim)] * self.n_dims
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @cached_property
    def axis(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.points_per_dim)
