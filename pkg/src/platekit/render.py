"""Schematic 2-D projections of settled scenes.

Every item becomes one convex polygon (its box projected to the view
plane) with a fill tag and a painter order; the plate is a disc. The
oblique view applies a fixed affine projection so height is visible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import convex_hull
from .scene import SceneState

VIEWS = ("top", "oblique")

# oblique: viewer in front (+x) and above; depth recedes with -x
_OBLIQUE_DEPTH = 0.35
_PLATE_SEGMENTS = 48


@dataclass(frozen=True)
class DrawPrimitive:
    item_id: int  # -1 for the plate
    fill: str
    vertices: tuple[tuple[float, float], ...]
    z_order: float

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "fill": self.fill,
            "vertices": [[x, y] for x, y in self.vertices],
            "z_order": self.z_order,
        }


@dataclass(frozen=True)
class RenderedScene:
    view: str
    primitives: tuple[DrawPrimitive, ...]
    reference: bool = False

    def to_dict(self) -> dict:
        return {
            "view": self.view,
            "reference": self.reference,
            "primitives": [p.to_dict() for p in self.primitives],
        }


def _project(view: str, x: float, y: float, z: float) -> tuple[float, float]:
    if view == "top":
        return (-y, x)
    # oblique: horizontal axis is -y, vertical mixes height and depth
    return (-y, z + _OBLIQUE_DEPTH * x)


def _plate_primitive(view: str, radius: float) -> DrawPrimitive:
    pts = []
    for k in range(_PLATE_SEGMENTS):
        a = 2 * math.pi * k / _PLATE_SEGMENTS
        pts.append(_project(view, radius * math.cos(a), radius * math.sin(a), 0.0))
    return DrawPrimitive(
        item_id=-1, fill="plate", vertices=tuple(convex_hull(pts)), z_order=-1e9
    )


def render(
    s: SceneState, view: str = "top", plate_radius: float = 0.12, reference: bool = False
) -> RenderedScene:
    """Deterministic draw primitives for a settled scene."""
    if view not in VIEWS:
        raise ValueError(f"unknown view {view!r}")
    prims = [_plate_primitive(view, plate_radius)]
    for p in s.placed:
        projected = [_project(view, *c) for c in p.corners]
        hull = convex_hull(projected)
        base_z = min(c[2] for c in p.corners)
        fill = p.spec.name or f"item{p.spec.id}"
        prims.append(
            DrawPrimitive(
                item_id=p.spec.id,
                fill=fill,
                vertices=tuple(hull),
                z_order=base_z + 1e-6 * p.spec.id,
            )
        )
    prims.sort(key=lambda d: d.z_order)
    return RenderedScene(view=view, primitives=tuple(prims), reference=reference)
