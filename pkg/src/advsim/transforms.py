"""Rigid transforms in the x-forward, y-right, z-up convention.

Rotations are (pitch, yaw, roll) in degrees and compose as
``R = Rz(yaw) @ Ry(pitch) @ Rx(roll)``. Positive yaw turns +x toward +y,
positive pitch lifts +x toward +z, positive roll turns +y toward +z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def normalize_angle(deg: float) -> float:
    """Map an angle to (-180, 180]."""
    a = math.fmod(float(deg), 360.0)
    if a <= -180.0:
        a += 360.0
    elif a > 180.0:
        a -= 360.0
    return a + 0.0  # drop negative zero


def rotation_matrix(pitch: float, yaw: float, roll: float) -> np.ndarray:
    p, y, r = np.radians([pitch, yaw, roll])
    cp, sp = math.cos(p), math.sin(p)
    cy, sy = math.cos(y), math.sin(y)
    cr, sr = math.cos(r), math.sin(r)
    rz = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    ry = np.array([[cp, 0.0, -sp], [0.0, 1.0, 0.0], [sp, 0.0, cp]])
    rx = np.array([[1.0, 0.0, 0.0], [0.0, cr, -sr], [0.0, sr, cr]])
    return rz @ ry @ rx


def matrix_to_rotation(m: np.ndarray) -> tuple[float, float, float]:
    """Inverse of :func:`rotation_matrix`, returning (pitch, yaw, roll)."""
    sp = float(np.clip(m[2, 0], -1.0, 1.0))
    pitch = math.degrees(math.asin(sp))
    if abs(sp) < 1.0 - 1e-12:
        yaw = math.degrees(math.atan2(m[1, 0], m[0, 0]))
        roll = math.degrees(math.atan2(m[2, 1], m[2, 2]))
    else:  # gimbal lock: fold roll into yaw
        yaw = math.degrees(math.atan2(-m[0, 1], m[1, 1]))
        roll = 0.0
    return normalize_angle(pitch), normalize_angle(yaw), normalize_angle(roll)


@dataclass(frozen=True)
class Transform:
    location: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rotation: tuple[float, float, float] = field(default=(0.0, 0.0, 0.0))  # pitch, yaw, roll

    def __post_init__(self):
        loc = tuple(float(v) for v in self.location)
        rot = tuple(normalize_angle(v) for v in self.rotation)
        if len(loc) != 3 or len(rot) != 3:
            raise ValueError("location and rotation need three components")
        if not all(math.isfinite(v) for v in loc + rot):
            raise ValueError(f"non-finite transform component: {loc} {rot}")
        object.__setattr__(self, "location", loc)
        object.__setattr__(self, "rotation", rot)

    @property
    def pitch(self) -> float:
        return self.rotation[0]

    @property
    def yaw(self) -> float:
        return self.rotation[1]

    @property
    def roll(self) -> float:
        return self.rotation[2]

    def matrix(self) -> np.ndarray:
        return rotation_matrix(*self.rotation)

    def translation(self) -> np.ndarray:
        return np.array(self.location, dtype=np.float64)

    def apply(self, points) -> np.ndarray:
        """Map local points (..., 3) to the parent frame."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.matrix().T + self.translation()

    def compose(self, local: "Transform") -> "Transform":
        """``self ∘ local``: the pose of a child given in this frame."""
        r = self.matrix()
        loc = r @ local.translation() + self.translation()
        rot = matrix_to_rotation(r @ local.matrix())
        return Transform(tuple(loc), rot)

    def to_dict(self) -> dict:
        x, y, z = self.location
        p, yw, r = self.rotation
        return {"location": {"x": x, "y": y, "z": z}, "rotation": {"pitch": p, "yaw": yw, "roll": r}}
