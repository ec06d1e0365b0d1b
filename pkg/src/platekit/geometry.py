"""Low-level geometry for cuboid footprints and contact checks.

The settling surrogate calls these inside planner rollouts, so everything
here works on plain float tuples (no array allocation per call). Polygons
are CCW-ordered vertex lists; rotation matrices are 3x3 nested tuples in
row-major order.
"""
from __future__ import annotations

import math

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    r = math.fmod(a + math.pi, TWO_PI)
    if r <= 0.0:
        r += TWO_PI
    return r - math.pi


# ---------------------------------------------------------------------------
# 2-D polygons

def rect_corners(cx: float, cy: float, hx: float, hy: float, yaw: float):
    """CCW corners of a rectangle centered at (cx, cy) rotated by yaw."""
    c, s = math.cos(yaw), math.sin(yaw)
    ax, ay = c * hx, s * hx
    bx, by = -s * hy, c * hy
    return [
        (cx + ax + bx, cy + ay + by),
        (cx - ax + bx, cy - ay + by),
        (cx - ax - bx, cy - ay - by),
        (cx + ax - bx, cy + ay - by),
    ]


def polygon_area(poly) -> float:
    """Shoelace area; positive for CCW order."""
    n = len(poly)
    if n < 3:
        return 0.0
    acc = 0.0
    x0, y0 = poly[-1]
    for x1, y1 in poly:
        acc += x0 * y1 - x1 * y0
        x0, y0 = x1, y1
    return 0.5 * acc


def polygon_centroid(poly):
    """Area centroid; falls back to vertex mean for degenerate polygons."""
    n = len(poly)
    a = 0.0
    cx = 0.0
    cy = 0.0
    x0, y0 = poly[-1]
    for x1, y1 in poly:
        w = x0 * y1 - x1 * y0
        a += w
        cx += (x0 + x1) * w
        cy += (y0 + y1) * w
        x0, y0 = x1, y1
    if abs(a) < 1e-18:
        return (sum(p[0] for p in poly) / n, sum(p[1] for p in poly) / n)
    return (cx / (3.0 * a), cy / (3.0 * a))


def clip_convex(subject, clipper):
    """Sutherland-Hodgman clip of a convex polygon by a CCW convex clipper.

    Returns the (possibly empty) intersection polygon.
    """
    output = subject
    ex0, ey0 = clipper[-1]
    for ex1, ey1 in clipper:
        if not output:
            return []
        # inside = left of directed edge (ex0,ey0)->(ex1,ey1), CCW clipper
        dx, dy = ex1 - ex0, ey1 - ey0
        inp = output
        output = []
        px, py = inp[-1]
        pcross = dx * (py - ey0) - dy * (px - ex0)
        pin = pcross >= 0.0
        for qx, qy in inp:
            qcross = dx * (qy - ey0) - dy * (qx - ex0)
            qin = qcross >= 0.0
            if qin:
                if not pin:
                    t = pcross / (pcross - qcross)
                    output.append((px + t * (qx - px), py + t * (qy - py)))
                output.append((qx, qy))
            elif pin:
                t = pcross / (pcross - qcross)
                output.append((px + t * (qx - px), py + t * (qy - py)))
            px, py, pcross, pin = qx, qy, qcross, qin
        ex0, ey0 = ex1, ey1
    return output


def point_in_convex(px: float, py: float, poly, tol: float = 1e-12) -> bool:
    """True if (px, py) lies inside or on a CCW convex polygon."""
    x0, y0 = poly[-1]
    for x1, y1 in poly:
        if (x1 - x0) * (py - y0) - (y1 - y0) * (px - x0) < -tol:
            return False
        x0, y0 = x1, y1
    return True


def poly_extent_along(poly, ux: float, uy: float):
    """(min, max) of vertex projections onto direction (ux, uy)."""
    lo = hi = poly[0][0] * ux + poly[0][1] * uy
    for x, y in poly:
        d = x * ux + y * uy
        if d < lo:
            lo = d
        elif d > hi:
            hi = d
    return lo, hi


def exit_edge(poly, sx: float, sy: float, tx: float, ty: float):
    """Edge of a CCW convex polygon crossed by the ray from (sx,sy) to (tx,ty).

    Returns ((ax, ay), (bx, by)) or None when the ray never leaves the
    polygon (degenerate direction).
    """
    dx, dy = tx - sx, ty - sy
    best_t = math.inf
    best = None
    x0, y0 = poly[-1]
    for x1, y1 in poly:
        ex, ey = x1 - x0, y1 - y0
        denom = dx * ey - dy * ex
        if abs(denom) > 1e-18:
            # solve start + t*dir = p0 + s_edge*edge
            t = ((x0 - sx) * ey - (y0 - sy) * ex) / denom
            s_edge = ((x0 - sx) * dy - (y0 - sy) * dx) / denom
            if t > 1e-12 and -1e-9 <= s_edge <= 1.0 + 1e-9 and t < best_t:
                best_t = t
                best = ((x0, y0), (x1, y1))
        x0, y0 = x1, y1
    return best


def convex_hull(points):
    """Andrew monotone chain; returns CCW hull without repeated endpoint."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return list(pts)

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2:
                ox, oy = out[-2]
                ax, ay = out[-1]
                if (ax - ox) * (p[1] - oy) - (ay - oy) * (p[0] - ox) <= 0.0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


# ---------------------------------------------------------------------------
# 3-D rotations (row-major 3x3 tuples)

IDENTITY3 = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


def rot_z(yaw: float):
    c, s = math.cos(yaw), math.sin(yaw)
    return ((c, -s, 0.0), (s, c, 0.0), (0.0, 0.0, 1.0))


def rotation_matrix(roll: float, pitch: float, yaw: float):
    """World-from-body rotation, composed as Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return (
        (cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr),
        (sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr),
        (-sp, cp * sr, cp * cr),
    )


def tilt_about(ux: float, uy: float, angle: float):
    """Rotation tilting the world z-axis toward horizontal direction (ux, uy).

    Rodrigues rotation about the horizontal axis z x u by ``angle``; maps
    z to z*cos + u*sin.
    """
    c, s = math.cos(angle), math.sin(angle)
    # axis a = (-uy, ux, 0), unit because |u| = 1
    ax, ay = -uy, ux
    omc = 1.0 - c
    return (
        (c + ax * ax * omc, ax * ay * omc, ay * s),
        (ax * ay * omc, c + ay * ay * omc, -ax * s),
        (-ay * s, ax * s, c),
    )


def mat_mul(a, b):
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3))
        for i in range(3)
    )


def mat_to_euler(r) -> tuple[float, float, float]:
    """Extract (roll, pitch, yaw) with R = Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    sp = -r[2][0]
    sp = min(1.0, max(-1.0, sp))
    pitch = math.asin(sp)
    if abs(sp) > 1.0 - 1e-12:
        # gimbal: fold the free rotation into yaw
        yaw = math.atan2(-r[0][1], r[1][1])
        roll = 0.0
    else:
        roll = math.atan2(r[2][1], r[2][2])
        yaw = math.atan2(r[1][0], r[0][0])
    return roll, pitch, yaw


def box_corners(cx, cy, cz, rot, hx, hy, hz):
    """The 8 world-frame corners of an oriented box as (x, y, z) tuples."""
    out = []
    for sx in (-hx, hx):
        for sy in (-hy, hy):
            for sz in (-hz, hz):
                out.append(
                    (
                        cx + rot[0][0] * sx + rot[0][1] * sy + rot[0][2] * sz,
                        cy + rot[1][0] * sx + rot[1][1] * sy + rot[1][2] * sz,
                        cz + rot[2][0] * sx + rot[2][1] * sy + rot[2][2] * sz,
                    )
                )
    return out


def obb_penetration_depth(c1, r1, e1, c2, r2, e2) -> float:
    """Penetration depth between two oriented boxes via separating axes.

    Returns 0.0 when separated (or exactly touching), else the smallest
    translation distance that separates them. Rotations are row-major
    tuples whose COLUMNS are the box axes.
    """
    dx = c2[0] - c1[0]
    dy = c2[1] - c1[1]
    dz = c2[2] - c1[2]
    axes = []
    for m in (r1, r2):
        axes.append((m[0][0], m[1][0], m[2][0]))
        axes.append((m[0][1], m[1][1], m[2][1]))
        axes.append((m[0][2], m[1][2], m[2][2]))
    base = list(axes)
    for i in range(3):
        a = base[i]
        for j in range(3, 6):
            b = base[j]
            cxp = (
                a[1] * b[2] - a[2] * b[1],
                a[2] * b[0] - a[0] * b[2],
                a[0] * b[1] - a[1] * b[0],
            )
            norm = math.sqrt(cxp[0] ** 2 + cxp[1] ** 2 + cxp[2] ** 2)
            if norm > 1e-9:
                axes.append((cxp[0] / norm, cxp[1] / norm, cxp[2] / norm))
    depth = math.inf
    for ax, ay, az in axes:
        ra = (
            e1[0] * abs(ax * r1[0][0] + ay * r1[1][0] + az * r1[2][0])
            + e1[1] * abs(ax * r1[0][1] + ay * r1[1][1] + az * r1[2][1])
            + e1[2] * abs(ax * r1[0][2] + ay * r1[1][2] + az * r1[2][2])
        )
        rb = (
            e2[0] * abs(ax * r2[0][0] + ay * r2[1][0] + az * r2[2][0])
            + e2[1] * abs(ax * r2[0][1] + ay * r2[1][1] + az * r2[2][1])
            + e2[2] * abs(ax * r2[0][2] + ay * r2[1][2] + az * r2[2][2])
        )
        overlap = ra + rb - abs(ax * dx + ay * dy + az * dz)
        if overlap <= 1e-12:
            return 0.0
        if overlap < depth:
            depth = overlap
    return depth
