"""Synthetic course scene and its software renderer.

The scene is a flat-ground world: colored ground polygons (grass, road
surface), painted ground polylines (center/edge lines) and vertical quads for
landmark posts.  Rendering is deterministic; painter's order is ground
polygons, then ground lines, then landmarks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import raster
from .course import Course
from .geometry import NEAR_PLANE, CameraIntrinsics, CameraPose, project_polyline
from .raster import Color

SKY = (168, 200, 230)
GRASS = (88, 148, 92)
ROAD = (92, 92, 98)
CENTERLINE = (250, 250, 250)
EDGE_LINE = (230, 230, 210)
POST_A = (200, 60, 50)
POST_B = (240, 240, 240)


@dataclass
class SceneModel:
    """Flat-ground primitives; all ground geometry lies in the z=0 plane."""

    background: Color = SKY
    ground_polygons: list[tuple[np.ndarray, Color]] = field(default_factory=list)
    ground_lines: list[tuple[np.ndarray, Color, int]] = field(default_factory=list)
    landmarks: list[tuple[np.ndarray, Color]] = field(default_factory=list)  # (4,3) vertical quads


def _clip_polygon_near(pc: np.ndarray, near: float = NEAR_PLANE) -> np.ndarray:
    """Sutherland-Hodgman clip of a camera-frame polygon against z >= near."""
    out: list[np.ndarray] = []
    n = len(pc)
    for i in range(n):
        cur, nxt = pc[i], pc[(i + 1) % n]
        cin, nin = cur[2] >= near, nxt[2] >= near
        if cin:
            out.append(cur)
        if cin != nin:
            t = (near - cur[2]) / (nxt[2] - cur[2])
            p = cur + t * (nxt - cur)
            p[2] = near
            out.append(p)
    return np.array(out) if len(out) >= 3 else np.empty((0, 3))


def _fill_camera_polygon(frame: np.ndarray, intr: CameraIntrinsics, pc: np.ndarray, color: Color) -> None:
    pc = _clip_polygon_near(pc)
    if len(pc) < 3:
        return
    f = intr.focal_px
    px = np.empty((len(pc), 2))
    px[:, 0] = intr.cx + f * pc[:, 0] / pc[:, 2]
    px[:, 1] = intr.cy + f * pc[:, 1] / pc[:, 2]
    h, w = frame.shape[:2]
    if px[:, 0].max() < 0 or px[:, 0].min() > w or px[:, 1].max() < 0 or px[:, 1].min() > h:
        return
    raster.fill_polygon(frame, px, color)


def _fill_polygons(frame, camera, intr, polygons) -> None:
    """Transform all polygons in one pass, then clip/fill the visible ones."""
    if not polygons:
        return
    verts3 = []
    for verts, _ in polygons:
        v = np.asarray(verts, dtype=float)
        verts3.append(np.hstack([v, np.zeros((len(v), 1))]) if v.shape[1] == 2 else v)
    counts = np.array([len(v) for v in verts3])
    pc_all = camera.to_camera(np.concatenate(verts3))
    start = 0
    for (verts, color), n in zip(polygons, counts):
        pc = pc_all[start : start + n]
        start += n
        if pc[:, 2].max() < NEAR_PLANE:
            continue
        _fill_camera_polygon(frame, intr, pc, color)


def render_scene(camera: CameraPose, intr: CameraIntrinsics, scene: SceneModel) -> np.ndarray:
    """Render the scene to an RGB frame.  Pure: same inputs, identical bytes."""
    frame = raster.new_frame(intr.width, intr.height, scene.background)
    _fill_polygons(frame, camera, intr, scene.ground_polygons)
    for verts, color, thickness in scene.ground_lines:
        segs = project_polyline(camera, intr, verts)
        raster.draw_segments(frame, segs, color, thickness)
    _fill_polygons(frame, camera, intr, scene.landmarks)
    return frame


def _offset_polyline(center: np.ndarray, offset: float) -> np.ndarray:
    """Offset a closed polyline laterally (positive = left of travel)."""
    a = center
    b = np.roll(center, -1, axis=0)
    d = b - a
    t = d / np.maximum(np.linalg.norm(d, axis=1, keepdims=True), 1e-12)
    # Vertex normal: average of adjacent segment normals.
    n_seg = np.stack([-t[:, 1], t[:, 0]], axis=1)
    n_prev = np.roll(n_seg, 1, axis=0)
    n_avg = n_seg + n_prev
    n_avg /= np.maximum(np.linalg.norm(n_avg, axis=1, keepdims=True), 1e-12)
    return center + offset * n_avg


def scene_from_course(course: Course, post_spacing: float = 20.0) -> SceneModel:
    """Build the render scene for a course: grass, road band, lines, posts."""
    scene = SceneModel()
    center = course.centerline
    hw = course.road_half_width

    lo = center.min(axis=0) - 40.0
    hi = center.max(axis=0) + 40.0
    grass = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
    scene.ground_polygons.append((grass, GRASS))

    left = _offset_polyline(center, hw)
    right = _offset_polyline(center, -hw)
    nseg = len(center)
    for i in range(nseg):
        j = (i + 1) % nseg
        quad = np.array([left[i], left[j], right[j], right[i]])
        scene.ground_polygons.append((quad, ROAD))

    closed = np.vstack([center, center[:1]])
    scene.ground_lines.append((closed, CENTERLINE, 2))
    for side in (hw - 0.35, -(hw - 0.35)):
        edge = _offset_polyline(center, side)
        scene.ground_lines.append((np.vstack([edge, edge[:1]]), EDGE_LINE, 1))

    total = course.length()
    n_posts = max(4, int(total // post_spacing))
    for k in range(n_posts):
        s = k * total / n_posts
        px, py = course.point_at_station(s)
        qx, qy = course.point_at_station(s + 0.5)
        tx, ty = qx - px, qy - py
        norm = math.hypot(tx, ty)
        tx, ty = tx / norm, ty / norm
        # Outward is to the right of travel for a counterclockwise loop.
        ox, oy = ty, -tx
        bx, by = px + (hw + 1.2) * ox, py + (hw + 1.2) * oy
        color = POST_A if k % 2 == 0 else POST_B
        half_w, height = 0.15, 1.6
        for ux, uy in ((tx, ty), (ox, oy)):  # crossed quads, visible all around
            quad = np.array(
                [
                    [bx - half_w * ux, by - half_w * uy, 0.0],
                    [bx + half_w * ux, by + half_w * uy, 0.0],
                    [bx + half_w * ux, by + half_w * uy, height],
                    [bx - half_w * ux, by - half_w * uy, height],
                ]
            )
            scene.landmarks.append((quad, color))
    return scene
