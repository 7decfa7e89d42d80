from __future__ import annotations

import numpy as np

from .. import constants as C
from ..prng import Stream

_SAMPLE_STEP = 0.25


def rain_coverage(height: int, width: int, precipitation: float, stream: Stream) -> np.ndarray:
    """Per-pixel streak coverage in [0, 1] for one frame.

    Each 100x100 tile receives round(precipitation * 3) streaks. A streak is
    sampled every quarter pixel and splatted bilinearly, which anti-aliases it.
    """
    per_tile = int(np.floor(precipitation * C.RAIN_STREAKS_PER_PERCENT + 0.5))
    cov = np.zeros(height * width)
    if per_tile <= 0:
        return cov.reshape(height, width)
    tile = C.RAIN_TILE_PX
    ty, tx = np.meshgrid(np.arange(-(-height // tile)), np.arange(-(-width // tile)), indexing="ij")
    origins = np.stack([tx.ravel() * tile, ty.ravel() * tile], axis=1).astype(np.float64)
    n = origins.shape[0] * per_tile
    u = stream.uniform(np.arange(4 * n, dtype=np.uint64)).reshape(n, 4)
    base = np.repeat(origins, per_tile, axis=0)
    x0 = base[:, 0] + u[:, 0] * tile
    y0 = base[:, 1] + u[:, 1] * tile
    lo, hi = C.RAIN_STREAK_LENGTH_PX
    length = lo + (hi - lo) * u[:, 2]
    slant = C.RAIN_STREAK_SLANT * (0.5 + u[:, 3])
    norm = np.sqrt(1.0 + slant**2)
    dx, dy = slant / norm, 1.0 / norm

    steps = np.arange(0.0, hi + _SAMPLE_STEP, _SAMPLE_STEP)
    t = steps[None, :]
    keep = t <= length[:, None]
    px = (x0[:, None] + t * dx[:, None])[keep] - 0.5
    py = (y0[:, None] + t * dy[:, None])[keep] - 0.5
    ix, iy = np.floor(px).astype(np.int64), np.floor(py).astype(np.int64)
    fx, fy = px - ix, py - iy
    for ox, oy, wgt in ((0, 0, (1 - fx) * (1 - fy)), (1, 0, fx * (1 - fy)), (0, 1, (1 - fx) * fy), (1, 1, fx * fy)):
        cx, cy = ix + ox, iy + oy
        ok = (cx >= 0) & (cx < width) & (cy >= 0) & (cy < height)
        cov += np.bincount(cy[ok] * width + cx[ok], weights=wgt[ok] * _SAMPLE_STEP, minlength=height * width)
    return np.minimum(cov, 1.0).reshape(height, width)


def apply_rain(rgb: np.ndarray, coverage: np.ndarray) -> np.ndarray:
    alpha = (C.RAIN_ALPHA * coverage)[..., None]
    return rgb * (1.0 - alpha) + np.array(C.RAIN_COLOR) * alpha
