"""Past-image display synthesis: record store, background selection, zoom, overlays.

The display pipeline keeps a bounded buffer of (frame, capture pose) records,
selects one as the active background, and re-draws the vehicle's CG wireframe
at its (delayed) current pose on top of it.  The zoom pass narrows the
displayed field of view so that the wireframe's apparent height stays a fixed
fraction of the image regardless of how far the vehicle has driven from the
background's viewpoint; the overlay pass adds the steering geometry lines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import cv2
import numpy as np

from . import raster
from .geometry import CameraIntrinsics, CameraMount, CameraPose, Pose2D, project_point, project_polyline
from .vehicle import VehicleParams, body_corners, cg_wireframe

CG_COLOR = (255, 0, 255)
AXLE_LINE_COLOR = (255, 70, 60)
TRAJECTORY_COLOR = (60, 220, 255)

# Below this steering magnitude the predictive trajectories degrade to
# straight segments; chosen so the arc/straight gap projects under one pixel.
DELTA_EPS = math.radians(0.05)
DEFAULT_HORIZON = 8.0
AXLE_LINE_MARGIN = 1.0


class NoRecordsError(RuntimeError):
    """Raised when composition is requested with an empty record buffer."""


class DegenerateDistanceError(ValueError):
    """Raised when the viewpoint-to-vehicle distance is too small to zoom."""


@dataclass(frozen=True)
class PastImageRecord:
    record_id: int
    frame: np.ndarray = field(repr=False)
    capture_pose: Pose2D
    capture_camera: CameraPose = field(repr=False)
    capture_fov: float = math.radians(60.0)
    capture_time: float = 0.0


class RecordBuffer:
    """Bounded FIFO of past image records, ordered by capture time."""

    def __init__(self, capacity: int = 24):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self.records: list[PastImageRecord] = []
        self._next_id = 0

    def __len__(self) -> int:
        return len(self.records)

    def store(self, frame: np.ndarray, pose: Pose2D, time: float, camera: CameraPose, fov: float, active_id: int | None = None) -> PastImageRecord:
        """Append a record; evict the oldest non-active record over capacity."""
        rec = PastImageRecord(self._next_id, frame, pose, camera, fov, time)
        self._next_id += 1
        self.records.append(rec)
        if len(self.records) > self.capacity:
            for i, r in enumerate(self.records):
                if r.record_id != active_id:
                    del self.records[i]
                    break
        return rec

    def most_recent(self) -> PastImageRecord:
        if not self.records:
            raise NoRecordsError("record buffer is empty")
        return self.records[-1]


@dataclass
class BackgroundState:
    """Active background record plus the switch policy parameters."""

    switch_threshold: float = 9.5  # switch when the vehicle is farther than this
    min_distance: float = 6.5  # do not adopt records closer than this
    active: PastImageRecord | None = None
    last_switch_time: float = 0.0
    switch_count: int = 0

    def __post_init__(self):
        if not self.min_distance < self.switch_threshold:
            raise ValueError("min_distance must be below switch_threshold")


def robot_visible_in_record(record: PastImageRecord, robot_pose: Pose2D) -> bool:
    """True when the robot's ground point projects inside the record's image."""
    h, w = record.frame.shape[:2]
    intr = CameraIntrinsics(record.capture_fov, w, h)
    px = project_point(record.capture_camera, intr, (robot_pose.x, robot_pose.y, 0.0))
    if px is None:
        return False
    return 0.0 <= px[0] < w and 0.0 <= px[1] < h


def select_background(bg: BackgroundState, buffer: RecordBuffer, robot_pose: Pose2D, now: float = 0.0) -> BackgroundState:
    """Keep the active record until the robot is beyond the switch threshold,
    then adopt the most recent record that is at least `min_distance` away and
    still frames the robot; fall back to the most recent record otherwise.
    """
    if len(buffer) == 0:
        raise NoRecordsError("record buffer is empty")
    if bg.active is not None:
        d = robot_pose.distance_to(bg.active.capture_pose)
        if d <= bg.switch_threshold:
            return bg
    chosen = None
    for rec in reversed(buffer.records):
        if robot_pose.distance_to(rec.capture_pose) >= bg.min_distance and robot_visible_in_record(rec, robot_pose):
            chosen = rec
            break
    if chosen is None:
        chosen = buffer.most_recent()
    if bg.active is None or chosen.record_id != bg.active.record_id:
        bg.active = chosen
        bg.last_switch_time = now
        bg.switch_count += 1
    return bg


@dataclass
class ZoomState:
    """Vertical-FOV zoom law state.

    With the vehicle a distance d from the background viewpoint, the vertical
    FOV extent at that distance is H = 2 d tan(theta/2); the law picks theta
    so that body_height / H equals the constant target ratio k, clamped at
    the capture FOV (the stored image cannot be widened).
    """

    body_height: float = 1.2
    ratio: float = 0.2
    capture_fov: float = math.radians(60.0)
    min_distance: float = 3.25  # degenerate-distance floor (half the selection floor)
    d: float = 0.0
    theta: float = math.radians(60.0)
    fov_extent: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise ValueError("ratio k must be in (0, 1)")
        if self.body_height <= 0:
            raise ValueError("body_height must be positive")


def zoom_fov(z: ZoomState, d: float) -> float:
    """Apply the zoom law at distance d; updates and returns theta."""
    if d <= z.min_distance:
        raise DegenerateDistanceError(f"distance {d:.3f} m at or under the {z.min_distance:.3f} m floor")
    theta = 2.0 * math.atan(z.body_height / (2.0 * d * z.ratio))
    theta = min(theta, z.capture_fov)
    z.d = d
    z.theta = theta
    z.fov_extent = 2.0 * d * math.tan(theta / 2.0)
    return theta


@dataclass(frozen=True)
class OverlaySet:
    """Steering-geometry overlays in world coordinates (ground plane)."""

    axle_line: np.ndarray  # (2,2) segment through the front axle
    trajectories: tuple[np.ndarray, np.ndarray]  # left/right wheel paths (N,2)
    icr: tuple[float, float] | None  # instantaneous center of rotation
    steering: float
    horizon: float


def build_overlays(
    steering: float,
    params: VehicleParams,
    pose: Pose2D,
    horizon: float = DEFAULT_HORIZON,
    motion_sign: float = 1.0,
    delta_eps: float = DELTA_EPS,
    samples: int = 40,
) -> OverlaySet:
    """Compute the front-axle extension line and predictive wheel trajectories.

    Geometry is built in the vehicle frame (origin at the rear axle, +x
    forward, +y left) and transformed by `pose`.  For |steering| >= delta_eps
    the trajectories are arcs about the ICR at (0, wheelbase/tan(steering));
    below it they degrade to straight segments.
    """
    L = params.wheelbase
    half_track = params.track_width / 2.0
    sign = 1.0 if motion_sign >= 0 else -1.0

    c, s_h = math.cos(pose.heading), math.sin(pose.heading)

    def to_world(pts: np.ndarray) -> np.ndarray:
        out = np.empty_like(pts)
        out[:, 0] = pose.x + c * pts[:, 0] - s_h * pts[:, 1]
        out[:, 1] = pose.y + s_h * pts[:, 0] + c * pts[:, 1]
        return out

    if abs(steering) < delta_eps:
        axle = np.array([(L, -(half_track + AXLE_LINE_MARGIN)), (L, half_track + AXLE_LINE_MARGIN)])
        ts = np.linspace(0.0, sign * horizon, samples)
        trajs = []
        for y in (half_track, -half_track):
            pts = np.stack([ts, np.full_like(ts, y)], axis=1)
            trajs.append(to_world(pts))
        return OverlaySet(to_world(axle), (trajs[0], trajs[1]), None, steering, horizon)

    icr_y = L / math.tan(steering)
    u = (-math.sin(steering), math.cos(steering))
    t_icr = L / math.sin(steering)  # parameter of the ICR along the axle line
    s = 1.0 if t_icr >= 0 else -1.0
    p0 = (L - s * AXLE_LINE_MARGIN * u[0], -s * AXLE_LINE_MARGIN * u[1])
    t1 = t_icr + s * AXLE_LINE_MARGIN
    p1 = (L + t1 * u[0], t1 * u[1])

    sweep_sign = sign * (1.0 if steering > 0 else -1.0)
    trajs = []
    for wy in (half_track, -half_track):
        r = abs(icr_y - wy)
        phi0 = math.atan2(wy - icr_y, 0.0)
        phis = phi0 + np.linspace(0.0, sweep_sign * horizon / r, samples)
        pts = np.stack([r * np.cos(phis), icr_y + r * np.sin(phis)], axis=1)
        trajs.append(to_world(pts))
    icr_world = pose.transform_point(0.0, icr_y)
    return OverlaySet(to_world(np.array([p0, p1])), (trajs[0], trajs[1]), icr_world, steering, horizon)


def viewpoint_distance(record: PastImageRecord, pose: Pose2D, params: VehicleParams) -> float:
    """Zoom-law distance d: depth of the nearest CG-box floor corner in the
    background's camera frame (the FOV cross-section that frames the vehicle).
    """
    corners = body_corners(pose, params)
    pts = np.hstack([corners, np.zeros((4, 1))])
    depths = record.capture_camera.to_camera(pts)[:, 2]
    return float(depths.min())


def zoom_sub_fraction(theta: float, capture_fov: float) -> float:
    return math.tan(theta / 2.0) / math.tan(capture_fov / 2.0)


def extract_zoom_window(frame: np.ndarray, theta: float, capture_fov: float) -> np.ndarray:
    """Resample the centered sub-window corresponding to FOV `theta` out of
    `capture_fov` back to full resolution (bilinear, scale about the
    principal point).  theta == capture_fov returns an identical copy.
    """
    s = zoom_sub_fraction(theta, capture_fov)
    if s >= 1.0 - 1e-12:
        return frame.copy()
    h, w = frame.shape[:2]
    cx, cy = w / 2.0, h / 2.0
    m = np.array([[s, 0.0, cx * (1.0 - s)], [0.0, s, cy * (1.0 - s)]])
    return cv2.warpAffine(frame, m, (w, h), flags=cv2.INTER_LINEAR | cv2.WARP_INVERSE_MAP)


def _draw_world_segments(frame, camera, intr, segments_world, color, thickness):
    parts = [project_polyline(camera, intr, seg) for seg in segments_world]
    px_segments = np.concatenate(parts) if parts else np.empty((0, 2, 2))
    raster.draw_segments(frame, px_segments, color, thickness)
    return px_segments


def compose_frame(
    bg: BackgroundState,
    zoom: ZoomState | None,
    delayed_pose: Pose2D,
    intr: CameraIntrinsics,
    params: VehicleParams,
    overlays: OverlaySet | None = None,
) -> tuple[np.ndarray, dict]:
    """Compose one display frame on the active background.

    Applies the zoom law (when `zoom` is given), extracts/rescales the
    background sub-window, then projects the CG wireframe at the delayed pose
    and, last, the overlay set.  Returns (frame, diagnostics).
    """
    if bg.active is None:
        raise NoRecordsError("no active background record")
    record = bg.active
    d = viewpoint_distance(record, delayed_pose, params)
    if zoom is not None:
        try:
            theta = zoom_fov(zoom, d)
        except DegenerateDistanceError:
            theta = zoom.capture_fov  # too close to zoom; show the full capture
    else:
        theta = record.capture_fov

    frame = extract_zoom_window(record.frame, theta, record.capture_fov)
    draw_intr = CameraIntrinsics(theta, intr.width, intr.height)
    camera = record.capture_camera

    edges = cg_wireframe(delayed_pose, params)
    cg_px = _draw_world_segments(frame, camera, draw_intr, edges, CG_COLOR, 2)

    if overlays is not None:
        traj3 = [np.asarray(t) for t in overlays.trajectories]
        _draw_world_segments(frame, camera, draw_intr, [overlays.axle_line], AXLE_LINE_COLOR, 2)
        _draw_world_segments(frame, camera, draw_intr, traj3, TRAJECTORY_COLOR, 2)

    # Projected (pre-rounding) vertical extent of the wireframe, for diagnostics.
    if len(cg_px):
        cg_vmin = float(cg_px[:, :, 1].min())
        cg_vmax = float(cg_px[:, :, 1].max())
    else:
        cg_vmin = cg_vmax = float("nan")

    diag = {
        "record_id": record.record_id,
        "d": d,
        "theta": theta,
        "sub_fraction": zoom_sub_fraction(theta, record.capture_fov),
        "switch_count": bg.switch_count,
        "cg_vmin": cg_vmin,
        "cg_vmax": cg_vmax,
    }
    return frame, diag


def frontcam_frame(latest_frame: np.ndarray | None) -> np.ndarray:
    """Pass the latest delivered camera frame through unmodified."""
    if latest_frame is None:
        raise NoRecordsError("no frames delivered yet")
    return latest_frame


def camera_for_pose(pose: Pose2D, mount: CameraMount) -> CameraPose:
    return CameraPose.from_pose(pose, mount)
