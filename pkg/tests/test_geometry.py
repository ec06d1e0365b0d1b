import math

import numpy as np
import pytest
from shapely.geometry import Polygon

from platekit.geometry import (
    box_corners,
    clip_convex,
    convex_hull,
    exit_edge,
    mat_mul,
    mat_to_euler,
    obb_penetration_depth,
    point_in_convex,
    poly_extent_along,
    polygon_area,
    polygon_centroid,
    rect_corners,
    rot_z,
    rotation_matrix,
    tilt_about,
    wrap_angle,
)


def random_rect(rng):
    return rect_corners(
        rng.uniform(-0.1, 0.1),
        rng.uniform(-0.1, 0.1),
        rng.uniform(0.005, 0.06),
        rng.uniform(0.005, 0.06),
        rng.uniform(-math.pi, math.pi),
    )


def test_wrap_angle_range_and_fixed_points():
    assert wrap_angle(0.0) == 0.0
    assert wrap_angle(math.pi) == pytest.approx(math.pi)
    assert wrap_angle(-math.pi) == pytest.approx(math.pi)
    assert wrap_angle(3 * math.pi) == pytest.approx(math.pi)
    for a in np.linspace(-20, 20, 401):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-12)
        assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-12)


def test_rect_corners_ccw_and_area():
    poly = rect_corners(0.02, -0.01, 0.03, 0.01, 0.7)
    assert polygon_area(poly) == pytest.approx(4 * 0.03 * 0.01)
    assert polygon_area(poly) > 0  # CCW


def test_clip_matches_shapely_on_random_rect_pairs():
    rng = np.random.default_rng(7)
    for _ in range(300):
        a = random_rect(rng)
        b = random_rect(rng)
        ours = clip_convex(a, b)
        area = polygon_area(ours) if len(ours) >= 3 else 0.0
        ref = Polygon(a).intersection(Polygon(b)).area
        assert area == pytest.approx(ref, abs=1e-12)


def test_clip_centroid_matches_shapely():
    rng = np.random.default_rng(11)
    checked = 0
    while checked < 50:
        a = random_rect(rng)
        b = random_rect(rng)
        ours = clip_convex(a, b)
        if len(ours) < 3 or polygon_area(ours) < 1e-6:
            continue
        cx, cy = polygon_centroid(ours)
        ref = Polygon(a).intersection(Polygon(b)).centroid
        assert cx == pytest.approx(ref.x, abs=1e-9)
        assert cy == pytest.approx(ref.y, abs=1e-9)
        checked += 1


def test_point_in_convex_against_shapely():
    rng = np.random.default_rng(3)
    for _ in range(200):
        poly = random_rect(rng)
        px, py = rng.uniform(-0.15, 0.15, 2)
        ref = Polygon(poly).buffer(1e-9).contains
        from shapely.geometry import Point

        assert point_in_convex(px, py, poly) == Polygon(poly).buffer(1e-9).contains(
            Point(px, py)
        )


def test_convex_hull_matches_shapely():
    rng = np.random.default_rng(5)
    for _ in range(100):
        pts = rng.uniform(-1, 1, (12, 2))
        ours = convex_hull([tuple(p) for p in pts])
        from shapely.geometry import MultiPoint

        ref = MultiPoint([tuple(p) for p in pts]).convex_hull
        assert polygon_area(ours) == pytest.approx(ref.area, abs=1e-12)


def test_poly_extent_along():
    poly = rect_corners(0.0, 0.0, 0.02, 0.01, 0.0)
    lo, hi = poly_extent_along(poly, 1.0, 0.0)
    assert (lo, hi) == pytest.approx((-0.02, 0.02))
    lo, hi = poly_extent_along(poly, 0.0, 1.0)
    assert (lo, hi) == pytest.approx((-0.01, 0.01))


def test_exit_edge_finds_crossed_edge():
    poly = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    edge = exit_edge(poly, 0.5, 0.5, 2.0, 0.5)  # exits right edge
    assert edge == ((1.0, 0.0), (1.0, 1.0))
    edge = exit_edge(poly, 0.5, 0.5, 0.5, -3.0)  # exits bottom edge
    assert edge == ((0.0, 0.0), (1.0, 0.0))


def test_rotation_matrix_orthonormal_and_euler_roundtrip():
    rng = np.random.default_rng(13)
    for _ in range(300):
        roll, pitch, yaw = rng.uniform(-math.pi, math.pi, 3)
        pitch = float(np.clip(pitch, -1.5, 1.5))
        r = rotation_matrix(roll, pitch, yaw)
        m = np.array(r)
        assert np.allclose(m @ m.T, np.eye(3), atol=1e-12)
        assert np.linalg.det(m) == pytest.approx(1.0)
        r2, p2, y2 = mat_to_euler(r)
        m2 = np.array(rotation_matrix(r2, p2, y2))
        assert np.allclose(m, m2, atol=1e-9)


def test_tilt_about_maps_z_toward_direction():
    rng = np.random.default_rng(17)
    for _ in range(100):
        az = rng.uniform(-math.pi, math.pi)
        ang = rng.uniform(0, 1.5)
        ux, uy = math.cos(az), math.sin(az)
        r = tilt_about(ux, uy, ang)
        z_new = (r[0][2], r[1][2], r[2][2])
        expect = (ux * math.sin(ang), uy * math.sin(ang), math.cos(ang))
        assert z_new == pytest.approx(expect, abs=1e-12)


def test_mat_mul_matches_numpy():
    rng = np.random.default_rng(19)
    a = rotation_matrix(*rng.uniform(-1, 1, 3))
    b = rotation_matrix(*rng.uniform(-1, 1, 3))
    ours = np.array(mat_mul(a, b))
    ref = np.array(a) @ np.array(b)
    assert np.allclose(ours, ref, atol=1e-15)


def _corner_oracle_depth(c1, r1, e1, c2, r2, e2):
    """Sampled lower-bound oracle: boxes overlap iff some sampled point of
    box2 lies inside box1 (dense sampling)."""
    m1 = np.array(r1)
    m2 = np.array(r2)
    g = np.linspace(-1, 1, 9)
    pts = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
    world = np.array(c2) + (pts * np.array(e2)) @ m2.T
    local = (world - np.array(c1)) @ m1
    inside = np.all(np.abs(local) <= np.array(e1) + 1e-12, axis=1)
    return bool(inside.any())


def test_obb_penetration_sign_matches_sampling_oracle():
    rng = np.random.default_rng(23)
    agree_pos = agree_zero = 0
    for _ in range(300):
        c1 = rng.uniform(-0.05, 0.05, 3)
        c2 = rng.uniform(-0.05, 0.05, 3)
        e1 = rng.uniform(0.01, 0.04, 3)
        e2 = rng.uniform(0.01, 0.04, 3)
        r1 = rotation_matrix(*rng.uniform(-1, 1, 3))
        r2 = rotation_matrix(*rng.uniform(-1, 1, 3))
        depth = obb_penetration_depth(tuple(c1), r1, tuple(e1), tuple(c2), r2, tuple(e2))
        overlap = _corner_oracle_depth(c1, r1, e1, c2, r2, e2) or _corner_oracle_depth(
            c2, r2, e2, c1, r1, e1
        )
        if overlap:
            # sampled interior point found: SAT must report penetration
            assert depth > 0
            agree_pos += 1
        else:
            agree_zero += 1
    assert agree_pos > 30 and agree_zero > 30


def test_obb_depth_known_axis_aligned_values():
    r = rotation_matrix(0, 0, 0)
    # touching along z exactly
    assert obb_penetration_depth((0, 0, 0), r, (1, 1, 1), (0, 0, 2), r, (1, 1, 1)) == 0.0
    # 0.25 overlap along z
    d = obb_penetration_depth((0, 0, 0), r, (1, 1, 1), (0, 0, 1.75), r, (1, 1, 1))
    assert d == pytest.approx(0.25)
    # separated
    assert obb_penetration_depth((0, 0, 0), r, (1, 1, 1), (3, 0, 0), r, (1, 1, 1)) == 0.0


def test_box_corners_axis_aligned():
    r = rotation_matrix(0, 0, 0)
    corners = box_corners(1.0, 2.0, 3.0, r, 0.1, 0.2, 0.3)
    arr = np.array(corners)
    assert arr.shape == (8, 3)
    assert arr[:, 0].min() == pytest.approx(0.9)
    assert arr[:, 2].max() == pytest.approx(3.3)
