"""Planar pose algebra, pinhole camera model and ground-plane projection.

Conventions:
  * World frame: x/y on the ground plane, z up, angles CCW from +x.
  * Camera frame: x right, y down, z forward (looking direction).
  * Pixel frame: u right, v down, (0, 0) at the top-left image corner;
    continuous coordinates, so the image spans [0, width] x [0, height]
    and the principal point sits at (width/2, height/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Segments are clipped against this depth before projection so that geometry
# passing under/behind the camera never produces unbounded pixels.
NEAR_PLANE = 0.1


def normalize_angle(a: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = math.remainder(a, math.tau)
    if r <= -math.pi:
        r += math.tau
    return r


@dataclass(frozen=True)
class Pose2D:
    """Planar pose: position in meters, heading CCW from +x in radians."""

    x: float
    y: float
    heading: float

    def __post_init__(self):
        object.__setattr__(self, "heading", normalize_angle(self.heading))

    def transform_point(self, px: float, py: float) -> tuple[float, float]:
        """Map a point from this pose's local frame to the world frame."""
        c, s = math.cos(self.heading), math.sin(self.heading)
        return (self.x + c * px - s * py, self.y + s * px + c * py)

    def distance_to(self, other: "Pose2D") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class CameraMount:
    """Rigid transform from the vehicle pose (rear axle, ground) to the camera.

    The camera sits `forward` meters ahead of the pose origin at `height`
    meters above the ground and pitches `pitch` radians downward from level.
    """

    forward: float = 0.5
    height: float = 1.2
    pitch: float = 0.0


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics parameterized by vertical field of view.

    Square pixels: the horizontal FOV follows from the aspect ratio.
    """

    vertical_fov: float
    width: int = 640
    height: int = 480

    def __post_init__(self):
        if not (0.0 < self.vertical_fov < math.pi):
            raise ValueError(f"vertical_fov out of range: {self.vertical_fov}")
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")

    @property
    def focal_px(self) -> float:
        return (self.height / 2.0) / math.tan(self.vertical_fov / 2.0)

    @property
    def cx(self) -> float:
        return self.width / 2.0

    @property
    def cy(self) -> float:
        return self.height / 2.0

    @property
    def horizontal_fov(self) -> float:
        return 2.0 * math.atan((self.width / self.height) * math.tan(self.vertical_fov / 2.0))


@dataclass(frozen=True)
class CameraPose:
    """Camera position and world->camera rotation (rows: right, down, forward)."""

    position: np.ndarray
    rotation: np.ndarray = field(repr=False)

    @staticmethod
    def from_pose(pose: Pose2D, mount: CameraMount) -> "CameraPose":
        cx, cy = pose.transform_point(mount.forward, 0.0)
        pos = np.array([cx, cy, mount.height], dtype=float)
        ch, sh = math.cos(pose.heading), math.sin(pose.heading)
        cp, sp = math.cos(mount.pitch), math.sin(mount.pitch)
        fwd = np.array([ch * cp, sh * cp, -sp])
        right = np.array([sh, -ch, 0.0])
        down = np.cross(fwd, right)
        rot = np.stack([right, down, fwd])
        return CameraPose(pos, rot)

    def to_camera(self, points: np.ndarray) -> np.ndarray:
        """Transform world points (N,3) into the camera frame."""
        return (np.atleast_2d(points) - self.position) @ self.rotation.T


def project_point(camera: CameraPose, intr: CameraIntrinsics, world_point) -> tuple[float, float] | None:
    """Project one world point to continuous pixel coordinates.

    Returns None for points at non-positive depth in the camera frame.
    """
    pc = camera.to_camera(np.asarray(world_point, dtype=float))[0]
    if pc[2] <= 0.0:
        return None
    f = intr.focal_px
    return (intr.cx + f * pc[0] / pc[2], intr.cy + f * pc[1] / pc[2])


def project_points(camera: CameraPose, intr: CameraIntrinsics, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized projection of (N,3) world points.

    Returns (pixels (N,2), valid (N,) bool); pixels of invalid rows are NaN.
    """
    pc = camera.to_camera(points)
    z = pc[:, 2]
    valid = z > 0.0
    f = intr.focal_px
    px = np.full((len(pc), 2), np.nan)
    zs = np.where(valid, z, 1.0)
    px[:, 0] = intr.cx + f * pc[:, 0] / zs
    px[:, 1] = intr.cy + f * pc[:, 1] / zs
    px[~valid] = np.nan
    return px, valid


def clip_segments_near(pc0: np.ndarray, pc1: np.ndarray, near: float = NEAR_PLANE) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Clip camera-frame segments against the z = near plane.

    Takes endpoint arrays (N,3); returns (clipped p0, clipped p1, keep mask).
    A crossing endpoint is moved exactly onto depth `near`.
    """
    z0, z1 = pc0[:, 2], pc1[:, 2]
    keep = (z0 >= near) | (z1 >= near)
    a = pc0.copy()
    b = pc1.copy()
    cross0 = keep & (z0 < near)
    cross1 = keep & (z1 < near)
    if np.any(cross0):
        t = (near - z0[cross0]) / (z1[cross0] - z0[cross0])
        a[cross0] = pc0[cross0] + (pc1[cross0] - pc0[cross0]) * t[:, None]
        a[cross0, 2] = near
    if np.any(cross1):
        t = (near - z1[cross1]) / (z0[cross1] - z1[cross1])
        b[cross1] = pc1[cross1] + (pc0[cross1] - pc1[cross1]) * t[:, None]
        b[cross1, 2] = near
    return a[keep], b[keep], keep


def project_polyline(camera: CameraPose, intr: CameraIntrinsics, vertices: np.ndarray) -> np.ndarray:
    """Project a world polyline to pixel segments, near-plane clipped.

    `vertices` is (N,2) ground points (z=0) or (N,3).  Returns an (M,2,2)
    array of [[u0,v0],[u1,v1]] segments; no output pixel comes from a point
    behind the camera.
    """
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or len(v) < 2:
        return np.empty((0, 2, 2))
    if v.shape[1] == 2:
        v = np.hstack([v, np.zeros((len(v), 1))])
    pc = camera.to_camera(v)
    a, b, _ = clip_segments_near(pc[:-1], pc[1:])
    f = intr.focal_px
    out = np.empty((len(a), 2, 2))
    out[:, 0, 0] = intr.cx + f * a[:, 0] / a[:, 2]
    out[:, 0, 1] = intr.cy + f * a[:, 1] / a[:, 2]
    out[:, 1, 0] = intr.cx + f * b[:, 0] / b[:, 2]
    out[:, 1, 1] = intr.cy + f * b[:, 1] / b[:, 2]
    return out


def ground_from_pixel(camera: CameraPose, intr: CameraIntrinsics, pixel) -> tuple[float, float] | None:
    """Back-project a pixel onto the z=0 ground plane.

    Returns None when the viewing ray does not hit the ground in front of
    the camera.
    """
    u, v = pixel
    f = intr.focal_px
    d_cam = np.array([(u - intr.cx) / f, (v - intr.cy) / f, 1.0])
    d_world = camera.rotation.T @ d_cam
    if abs(d_world[2]) < 1e-12:
        return None
    t = -camera.position[2] / d_world[2]
    if t <= 0.0:
        return None
    p = camera.position + t * d_world
    return (p[0], p[1])
