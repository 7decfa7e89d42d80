"""Depth and instance image encodings."""

from __future__ import annotations

import logging
from collections import Counter

import numpy as np

from ..constants import FAR_M

log = logging.getLogger(__name__)

DEPTH_LEVELS = (1 << 24) - 1
DEPTH_STEP_M = FAR_M / DEPTH_LEVELS


def encode_depth(depth_m, counter: Counter | None = None) -> np.ndarray:
    """24-bit depth code as (..., 3) uint8 with R the least significant byte.

    Values outside [0, 1000] m are clamped; the number clamped is added to
    ``counter["depth_clamped"]`` when a counter is given.
    """
    d = np.asarray(depth_m, dtype=np.float64)
    clipped = np.clip(d, 0.0, FAR_M)
    n_bad = int(np.count_nonzero(clipped != d))  # NaN compares unequal, so it is counted too
    if n_bad:
        log.warning("clamped %d depth values to [0, %g] m", n_bad, FAR_M)
        if counter is not None:
            counter["depth_clamped"] += n_bad
    clipped = np.nan_to_num(clipped, nan=FAR_M)
    v = np.floor(clipped / FAR_M * DEPTH_LEVELS + 0.5).astype(np.uint32)
    return np.stack([v & 0xFF, (v >> 8) & 0xFF, v >> 16], axis=-1).astype(np.uint8)


def decode_depth(rgb) -> np.ndarray:
    c = np.asarray(rgb).astype(np.uint32)
    v = c[..., 0] | (c[..., 1] << 8) | (c[..., 2] << 16)
    return v.astype(np.float64) * (FAR_M / DEPTH_LEVELS)


def encode_depth_mm(depth_m) -> np.ndarray:
    """Lossless-to-the-millimetre 16-bit depth; saturates at 65.535 m."""
    mm = np.floor(np.asarray(depth_m, dtype=np.float64) * 1000.0 + 0.5)
    return np.clip(mm, 0, 0xFFFF).astype(np.uint16)


def encode_instance(semantic_class, instance_id) -> np.ndarray:
    cls = np.asarray(semantic_class).astype(np.uint16)
    ids = np.asarray(instance_id).astype(np.uint16)
    return np.stack([cls, ids & 0xFF, ids >> 8], axis=-1).astype(np.uint8)


def decode_instance(rgb) -> tuple[np.ndarray, np.ndarray]:
    c = np.asarray(rgb)
    return c[..., 0].astype(np.uint8), c[..., 1].astype(np.uint16) | (c[..., 2].astype(np.uint16) << 8)
