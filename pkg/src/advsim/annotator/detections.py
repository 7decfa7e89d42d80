from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .rle import RLE, rle_encode

DEFAULT_MIN_PIXELS = 10


@dataclass(frozen=True)
class Detection:
    frame_index: int
    sensor_index: int
    track_id: int
    class_id: int
    bbox: tuple[int, int, int, int]  # x, y, w, h in pixels
    area: int
    mask: RLE


def detections_from_instance(
    instance_id,
    semantic=None,
    min_pixels: int = DEFAULT_MIN_PIXELS,
    frame_index: int = 0,
    sensor_index: int = 0,
) -> list[Detection]:
    """One detection per visible instance with at least ``min_pixels`` pixels, sorted by track id.

    Boxes are the tight hull of the visible (z-buffer winning) pixels.
    """
    ids = np.asarray(instance_id)
    if ids.ndim != 2:
        raise ValueError("instance plane must be 2-D")
    sem = np.zeros(ids.shape, np.uint8) if semantic is None else np.asarray(semantic)
    counts = np.bincount(ids.ravel().astype(np.int64))
    slices = ndimage.find_objects(ids.astype(np.int64))
    out = []
    for track, sl in enumerate(slices, start=1):
        if sl is None or counts[track] < min_pixels:
            continue
        rows, cols = sl
        full = np.zeros(ids.shape, bool)
        full[sl] = ids[sl] == track
        class_id = int(sem[sl][ids[sl] == track][0])
        bbox = (int(cols.start), int(rows.start), int(cols.stop - cols.start), int(rows.stop - rows.start))
        out.append(Detection(frame_index, sensor_index, track, class_id, bbox, int(counts[track]), rle_encode(full)))
    return out
