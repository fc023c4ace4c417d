import math

import numpy as np
import pytest

from spir_teleop.geometry import (
    NEAR_PLANE,
    CameraIntrinsics,
    CameraMount,
    CameraPose,
    Pose2D,
    ground_from_pixel,
    normalize_angle,
    project_point,
    project_polyline,
)


def make_camera(x=0.0, y=0.0, heading=0.0, forward=0.0, height=0.0, pitch=0.0):
    return CameraPose.from_pose(Pose2D(x, y, heading), CameraMount(forward, height, pitch))


def oracle_project(camera, intr, point):
    """Independent oracle: homogeneous 3x4 matrix product K [R | -R c]."""
    f = intr.focal_px
    K = np.array([[f, 0.0, intr.cx], [0.0, f, intr.cy], [0.0, 0.0, 1.0]])
    Rt = np.hstack([camera.rotation, (-camera.rotation @ camera.position).reshape(3, 1)])
    ph = K @ Rt @ np.append(np.asarray(point, dtype=float), 1.0)
    return ph[:2] / ph[2]


def test_normalize_angle_range():
    for a in [-10.0, -math.pi, math.pi, 3 * math.pi, 0.0, 7.1]:
        w = normalize_angle(a)
        assert -math.pi < w <= math.pi
        assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-12)
        assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-12)


def test_optical_axis_projects_to_center():
    cam = make_camera(height=1.5)
    intr = CameraIntrinsics(math.radians(60.0))
    for depth in (0.5, 3.0, 120.0):
        px = project_point(cam, intr, (depth, 0.0, 1.5))
        assert px == (intr.cx, intr.cy)


def test_vertical_fov_boundary_hits_top_edge():
    # 90 deg vertical FOV, square image: a point one depth-unit above the
    # axis lands exactly on the top edge row.
    cam = make_camera()
    intr = CameraIntrinsics(math.radians(90.0), width=480, height=480)
    d = 7.0
    px = project_point(cam, intr, (d, 0.0, d * math.tan(math.radians(45.0))))
    assert px is not None
    assert px[1] == pytest.approx(0.0, abs=1e-9)


def test_behind_camera_reports_none():
    cam = make_camera()
    intr = CameraIntrinsics(math.radians(60.0))
    assert project_point(cam, intr, (-1.0, 0.0, 0.0)) is None
    assert project_point(cam, intr, (0.0, 5.0, 0.0)) is None  # zero depth


def test_projection_matches_matrix_oracle():
    rng = np.random.default_rng(42)
    intr = CameraIntrinsics(math.radians(55.0), 640, 480)
    for _ in range(300):
        cam = make_camera(
            x=rng.uniform(-50, 50),
            y=rng.uniform(-50, 50),
            heading=rng.uniform(-math.pi, math.pi),
            forward=rng.uniform(-1, 1),
            height=rng.uniform(0.2, 3.0),
            pitch=rng.uniform(-0.4, 0.4),
        )
        # Sample in the camera frame (positive depth, bounded view angle)
        # and map to world, so the pixel magnitudes stay well conditioned.
        depth = rng.uniform(0.5, 80.0)
        pc = np.array([rng.uniform(-2, 2) * depth, rng.uniform(-2, 2) * depth, depth])
        point = cam.rotation.T @ pc + cam.position
        px = project_point(cam, intr, point)
        expected = oracle_project(cam, intr, point)
        assert px is not None
        assert abs(px[0] - expected[0]) < 1e-9
        assert abs(px[1] - expected[1]) < 1e-9


def test_polyline_fully_behind_camera_is_empty():
    cam = make_camera(height=1.2)
    intr = CameraIntrinsics(math.radians(60.0))
    line = np.array([[-5.0, -1.0], [-5.0, 1.0], [-8.0, 0.0]])
    assert len(project_polyline(cam, intr, line)) == 0


def test_straight_centerline_projects_collinear():
    cam = make_camera(height=1.4, pitch=0.1)
    intr = CameraIntrinsics(math.radians(60.0))
    line = np.array([[2.0, 0.7], [10.0, 0.7], [30.0, 0.7], [80.0, 0.7]])
    segs = project_polyline(cam, intr, line)
    pts = [segs[0][0]] + [s[1] for s in segs]
    (x0, y0), (x1, y1) = pts[0], pts[-1]
    nx, ny = y1 - y0, x0 - x1
    norm = math.hypot(nx, ny)
    for (px, py) in pts:
        dist = abs(nx * (px - x0) + ny * (py - y0)) / norm
        assert dist < 0.5


def test_near_plane_clip_exact_depth():
    cam = make_camera(height=1.2)
    intr = CameraIntrinsics(math.radians(60.0))
    # Segment from behind the camera to ahead of it: the clipped endpoint
    # must sit exactly at NEAR_PLANE depth. Analytic crossing oracle:
    a = np.array([-2.0, 0.3, 0.0])
    b = np.array([6.0, 0.3, 0.0])
    t = (NEAR_PLANE - (-2.0)) / (6.0 - (-2.0))  # camera at origin facing +x: depth == world x
    crossing = a + t * (b - a)
    segs = project_polyline(cam, intr, np.array([a, b]))
    assert len(segs) == 1
    expected = project_point(cam, intr, crossing)
    got = segs[0][0]
    assert got[0] == pytest.approx(expected[0], abs=1e-9)
    assert got[1] == pytest.approx(expected[1], abs=1e-9)


def test_ground_round_trip():
    rng = np.random.default_rng(7)
    intr = CameraIntrinsics(math.radians(60.0))
    for _ in range(200):
        cam = make_camera(
            x=rng.uniform(-20, 20),
            y=rng.uniform(-20, 20),
            heading=rng.uniform(-math.pi, math.pi),
            forward=0.5,
            height=rng.uniform(0.8, 2.5),
            pitch=rng.uniform(0.02, 0.3),
        )
        gx = rng.uniform(2.0, 40.0)
        gy = rng.uniform(-5.0, 5.0)
        # Place the ground point ahead of the camera in its own frame.
        wx, wy = Pose2D(cam.position[0], cam.position[1], math.atan2(cam.rotation[2, 1], cam.rotation[2, 0])).transform_point(gx, gy)
        px = project_point(cam, intr, (wx, wy, 0.0))
        if px is None:
            continue
        back = ground_from_pixel(cam, intr, px)
        assert back is not None
        assert math.hypot(back[0] - wx, back[1] - wy) < 1e-6


def test_zoom_preserves_ray_direction():
    # Cameras differing only in vertical FOV see each ground point along the
    # same ray: pixel offsets from the principal point scale by the tan ratio.
    cam = make_camera(height=1.2, pitch=0.05)
    fov1, fov2 = math.radians(60.0), math.radians(33.0)
    i1 = CameraIntrinsics(fov1)
    i2 = CameraIntrinsics(fov2)
    ratio = math.tan(fov1 / 2.0) / math.tan(fov2 / 2.0)
    rng = np.random.default_rng(3)
    for _ in range(100):
        p = (rng.uniform(3, 50), rng.uniform(-6, 6), 0.0)
        a = project_point(cam, i1, p)
        b = project_point(cam, i2, p)
        assert a is not None and b is not None
        assert (b[0] - i2.cx) == pytest.approx((a[0] - i1.cx) * ratio, rel=1e-12, abs=1e-9)
        assert (b[1] - i2.cy) == pytest.approx((a[1] - i1.cy) * ratio, rel=1e-12, abs=1e-9)
