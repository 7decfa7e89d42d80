"""Sensor poses over time and the pinhole camera model."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .config import MotionSpec, SensorSpec
from .constants import NEAR_M
from .prng import Stream
from .transforms import Transform

log = logging.getLogger(__name__)

_AXES = ("pitch", "yaw", "roll")


@dataclass(frozen=True)
class CameraIntrinsics:
    width: int
    height: int
    focal: float
    cx: float
    cy: float

    def matrix(self) -> np.ndarray:
        return np.array([[self.focal, 0.0, self.cx], [0.0, self.focal, self.cy], [0.0, 0.0, 1.0]])


def intrinsics(spec: SensorSpec) -> CameraIntrinsics:
    return intrinsics_for(spec.image_size_x, spec.image_size_y, spec.fov)


def intrinsics_for(width: int, height: int, fov: float = 90.0) -> CameraIntrinsics:
    if not 0.0 < fov < 180.0:
        raise ValueError(f"fov must lie in (0, 180), got {fov}")
    if fov > 170.0:
        log.warning("fov %.3f is nearly degenerate", fov)
    focal = width / (2.0 * math.tan(math.radians(fov) / 2.0))
    return CameraIntrinsics(int(width), int(height), focal, width / 2.0, height / 2.0)


def triangle_wave(frame: int, period: int) -> float:
    """Unit triangle wave: 0 at 0, +1 at P/4, 0 at P/2, -1 at 3P/4."""
    phase = (frame % period) / period
    if phase < 0.25:
        return 4.0 * phase
    if phase < 0.75:
        return 2.0 - 4.0 * phase
    return 4.0 * phase - 4.0


@dataclass(frozen=True)
class SensorTrack:
    base: Transform
    sensor_index: int = 0
    attach_to: str | None = None
    motion: MotionSpec | None = None
    seed: int = 0

    @classmethod
    def from_spec(cls, spec: SensorSpec, sensor_index: int, seed: int) -> "SensorTrack":
        return cls(spec.transform, sensor_index, spec.attach_to, spec.motion, seed)

    @property
    def jitter_stream(self) -> Stream:
        return Stream(self.seed, f"jitter/{self.sensor_index}")

    def jitter_offsets(self, frame: int) -> tuple[np.ndarray, np.ndarray]:
        """Per-axis uniform offsets (location metres, rotation degrees) for one frame."""
        jit = self.motion.jitter
        u = self.jitter_stream.uniform(np.arange(6, dtype=np.uint64) + np.uint64(6 * frame), -1.0, 1.0)
        return u[:3] * np.array(jit.location_range), u[3:] * np.array(jit.rotation_range)


def pose_at(track: SensorTrack, frame: int, scene=None, fps: int | None = None) -> Transform:
    """Sensor pose at ``frame``.

    Offsets apply in a fixed order: linear, rotation sweep, jitter. For an
    attached sensor they modify the local mount transform, so jitter lives
    in the host's frame, and the result is composed with the host pose.
    """
    loc = np.array(track.base.location)
    rot = np.array(track.base.rotation)
    m = track.motion
    if m is not None:
        if m.linear is not None:
            rate = fps if fps is not None else scene.fps
            start = loc.copy()
            delta = np.array(m.linear.destination.location) - start
            length = float(np.linalg.norm(delta))
            travelled = min(frame * (m.linear.speed / rate), length)
            if length > 0:
                loc = start + delta * (travelled / length)
        if m.rotation is not None:
            rot = rot.copy()
            rot[_AXES.index(m.rotation.axis)] += m.rotation.amplitude * triangle_wave(frame, m.rotation.period)
        if m.jitter is not None:
            dloc, drot = track.jitter_offsets(frame)
            loc = loc + dloc
            rot = rot + drot
    local = Transform(tuple(loc), tuple(rot))
    if track.attach_to is None:
        return local
    if scene is None:
        raise ValueError("attached sensors need the scene to locate their host")
    host = scene.actor_by_role(track.attach_to).transform
    return host.compose(local)


def world_to_camera(points, pose: Transform) -> np.ndarray:
    """Rows of camera-space coordinates (forward, right, up)."""
    pts = np.asarray(points, dtype=np.float64)
    return (pts - pose.translation()) @ pose.matrix()


def camera_to_pixel(cam: np.ndarray, K: CameraIntrinsics) -> tuple[np.ndarray, np.ndarray]:
    x, y, z = cam[..., 0], cam[..., 1], cam[..., 2]
    return K.cx + K.focal * (y / x), K.cy - K.focal * (z / x)


def project(point_world, pose: Transform, K: CameraIntrinsics, near: float = NEAR_M):
    """Pixel coordinates and planar depth of a world point, or ``None`` behind the near plane."""
    cam = world_to_camera(np.asarray(point_world, dtype=np.float64)[None, :], pose)[0]
    if not cam[0] > near:
        return None
    u, v = camera_to_pixel(cam, K)
    return float(u), float(v), float(cam[0])
