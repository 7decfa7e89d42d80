"""Three ways to put an adversarial patch into a frame.

* :func:`composite_digital` pastes the patch after rendering; no lighting,
  shadow or fog reaches it.
* :func:`composite_color_corrected` pastes it after mapping its colours
  through a per-channel affine transform measured on the green placeholder.
* :func:`render_streamed` textures the placeholder and renders the scene, so
  the patch is shaded, shadowed and fogged like every other surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import PLACEHOLDER_GREEN
from .renderer import render
from .renderer.render import FrameBundle
from .scene import Scene, set_patch_texture
from .sensor_rig import project


class PatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PatchPlacement:
    placeholder_id: int
    corners: np.ndarray  # (4, 2) pixel coords: top-left, top-right, bottom-right, bottom-left
    homography: np.ndarray  # (3, 3) maps patch uv to pixel coords

    def uv_to_pixel(self, uv) -> np.ndarray:
        uv = np.asarray(uv, dtype=np.float64)
        h = np.concatenate([uv, np.ones(uv.shape[:-1] + (1,))], axis=-1) @ self.homography.T
        return h[..., :2] / h[..., 2:]


UNIT_SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def homography_from_points(src, dst) -> np.ndarray:
    """Direct linear transform for four (or more) point correspondences."""
    src = np.asarray(src, dtype=np.float64)
    dst = np.asarray(dst, dtype=np.float64)
    rows = []
    for (x, y), (u, v) in zip(src, dst):
        rows.append([x, y, 1, 0, 0, 0, -u * x, -u * y, -u])
        rows.append([0, 0, 0, x, y, 1, -v * x, -v * y, -v])
    _, _, vt = np.linalg.svd(np.array(rows))
    h = vt[-1].reshape(3, 3)
    return h / h[2, 2]


def locate_placeholder(frame: FrameBundle, scene: Scene, placeholder_id: int, min_pixels: int = 4) -> PatchPlacement:
    return locate_in_instances(frame.instance_id, scene, placeholder_id, frame.pose, frame.intrinsics, min_pixels)


def locate_in_instances(instance_id, scene: Scene, placeholder_id: int, pose, K, min_pixels: int = 4) -> PatchPlacement:
    """Placeholder corners in pixel space, given the instance plane they were rendered into."""
    ph = scene.placeholder(placeholder_id)
    visible = int(np.count_nonzero(np.asarray(instance_id) == placeholder_id))
    if visible < min_pixels:
        raise PatchError(f"placeholder {placeholder_id} is occluded or off-screen ({visible} px visible)")
    corners = []
    for p in ph.corners:
        proj = project(p, pose, K)
        if proj is None:
            raise PatchError(f"placeholder {placeholder_id} has a corner behind the camera")
        corners.append(proj[:2])
    corners = np.array(corners)
    return PatchPlacement(placeholder_id, corners, homography_from_points(UNIT_SQUARE, corners))


def quad_mask(shape, corners) -> np.ndarray:
    """Pixels whose centres lie inside (or on) a convex quad."""
    h, w = shape[:2]
    ys, xs = np.mgrid[0:h, 0:w]
    px, py = xs + 0.5, ys + 0.5
    c = np.asarray(corners, dtype=np.float64)
    signs = []
    for i in range(4):
        ax, ay = c[i]
        bx, by = c[(i + 1) % 4]
        signs.append((bx - ax) * (py - ay) - (by - ay) * (px - ax))
    s = np.stack(signs)
    return np.all(s >= 0, axis=0) | np.all(s <= 0, axis=0)


def sample_bilinear(image, u, v) -> np.ndarray:
    """Bilinear clamp-to-edge sampling at uv in [0, 1]^2 (same convention as the renderer)."""
    img = np.asarray(image, dtype=np.float64)
    th, tw = img.shape[:2]
    x = np.asarray(u) * tw - 0.5
    y = np.asarray(v) * th - 0.5
    xf, yf = np.floor(x), np.floor(y)
    fx, fy = (x - xf)[..., None], (y - yf)[..., None]
    xa = np.clip(xf.astype(np.int64), 0, tw - 1)
    xb = np.clip(xf.astype(np.int64) + 1, 0, tw - 1)
    ya = np.clip(yf.astype(np.int64), 0, th - 1)
    yb = np.clip(yf.astype(np.int64) + 1, 0, th - 1)
    top = img[ya, xa] + (img[ya, xb] - img[ya, xa]) * fx
    bot = img[yb, xa] + (img[yb, xb] - img[yb, xa]) * fx
    return top + (bot - top) * fy


def _quantize(x) -> np.ndarray:
    return np.floor(np.clip(x, 0.0, 255.0) + 0.5).astype(np.uint8)


def _paste(frame_rgb, patch_float, placement: PatchPlacement) -> np.ndarray:
    out = np.array(frame_rgb, dtype=np.uint8, copy=True)
    inside = quad_mask(out.shape, placement.corners)
    rows, cols = np.nonzero(inside)
    if rows.size == 0:
        return out
    inv = np.linalg.inv(placement.homography)
    pts = np.stack([cols + 0.5, rows + 0.5, np.ones(rows.size)], axis=1) @ inv.T
    u, v = pts[:, 0] / pts[:, 2], pts[:, 1] / pts[:, 2]
    out[rows, cols] = _quantize(sample_bilinear(patch_float, u, v))
    return out


def composite_digital(frame_rgb, patch, placement: PatchPlacement) -> np.ndarray:
    return _paste(frame_rgb, np.asarray(patch, dtype=np.float64), placement)


@dataclass(frozen=True)
class ColorTransform:
    gain: tuple[float, float, float] = (1.0, 1.0, 1.0)
    offset: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not np.all(np.isfinite(self.gain + self.offset)):
            raise ValueError("color transform must be finite")
        if min(self.gain) < 0:
            raise ValueError("gains must be >= 0")

    def apply(self, image) -> np.ndarray:
        return np.asarray(image, dtype=np.float64) * np.array(self.gain) + np.array(self.offset)

    @property
    def is_identity(self) -> bool:
        return self.gain == (1.0, 1.0, 1.0) and self.offset == (0.0, 0.0, 0.0)


def estimate_color_transform(frame_rgb, mask, reference=PLACEHOLDER_GREEN, min_pixels: int = 50) -> ColorTransform:
    """Fit ``observed = gain * reference + offset`` per channel over the placeholder pixels.

    A constant reference cannot separate gain from offset, so channels with a
    nonzero reference get a gain-only fit. Channels where the reference is 0
    get an offset-only fit (their mean observation, i.e. additive light such
    as fog) and borrow the mean gain of the nonzero channels.
    """
    m = np.asarray(mask, dtype=bool)
    n = int(np.count_nonzero(m))
    if n < min_pixels:
        raise PatchError(f"placeholder mask has {n} px, need at least {min_pixels}")
    obs = np.asarray(frame_rgb, dtype=np.float64)[m].mean(axis=0)
    ref = np.asarray(reference, dtype=np.float64)
    lit = ref > 0
    if not lit.any():
        raise PatchError("reference colour is black")
    gains = obs[lit] / ref[lit]
    if np.all(gains == 0):
        raise PatchError("placeholder observation is all black")
    shared = float(gains.mean())
    gain = np.where(lit, 0.0, shared)
    gain[lit] = gains
    offset = np.where(lit, 0.0, obs)
    return ColorTransform(tuple(float(g) for g in gain), tuple(float(b) for b in offset))


def composite_color_corrected(frame_rgb, patch, placement: PatchPlacement, transform: ColorTransform) -> np.ndarray:
    return _paste(frame_rgb, transform.apply(patch), placement)


def render_streamed(scene: Scene, placeholder_id: int, patch, pose, K, light, **render_kw) -> FrameBundle:
    """Stream ``patch`` onto the placeholder and render the scene."""
    return render(set_patch_texture(scene, placeholder_id, patch), pose, K, light, **render_kw)


def patch_region_distance(image, reference, region) -> float:
    """Mean absolute per-channel difference over ``region``, in 8-bit units."""
    r = np.asarray(region, dtype=bool)
    if not r.any():
        raise PatchError("empty patch region")
    a = np.asarray(image, dtype=np.float64)[r]
    b = np.asarray(reference, dtype=np.float64)[r]
    return float(np.abs(a - b).mean())
