"""MOTS text lines and 16-bit PNG id maps (pixel = class * 1000 + instance)."""

from __future__ import annotations

import numpy as np

from .detections import Detection

MAX_CLASS = 64
MAX_INSTANCE = 1000


class MOTSError(ValueError):
    pass


def mots_id(class_id, instance_id):
    c = np.asarray(class_id, dtype=np.int64)
    i = np.asarray(instance_id, dtype=np.int64)
    if np.any(i >= MAX_INSTANCE):
        bad = sorted(set(np.atleast_1d(i[i >= MAX_INSTANCE]).tolist()))
        raise MOTSError(f"instance id(s) {bad} >= {MAX_INSTANCE} cannot be encoded")
    if np.any(c >= MAX_CLASS):
        bad = sorted(set(np.atleast_1d(c[c >= MAX_CLASS]).tolist()))
        raise MOTSError(f"class id(s) {bad} >= {MAX_CLASS} cannot be encoded")
    if np.any(c < 0) or np.any(i < 0):
        raise MOTSError("negative ids cannot be encoded")
    return c * MAX_INSTANCE + i


def split_mots_id(value):
    v = np.asarray(value, dtype=np.int64)
    return v // MAX_INSTANCE, v % MAX_INSTANCE


def export_mots_text(detections: list[Detection]) -> list[str]:
    lines = []
    for d in sorted(detections, key=lambda d: (d.frame_index, d.track_id)):
        h, w = d.mask.size
        lines.append(f"{d.frame_index} {int(mots_id(d.class_id, d.track_id))} {d.class_id} {h} {w} {d.mask.counts}")
    return lines


def parse_mots_line(line: str) -> tuple[int, int, int, int, int, str]:
    f, tid, cls, h, w, rle = line.split()
    return int(f), int(tid), int(cls), int(h), int(w), rle


def export_mots_png(instance_id, semantic) -> np.ndarray:
    ids = np.asarray(instance_id, dtype=np.int64)
    out = mots_id(np.where(ids > 0, semantic, 0), ids)
    return np.where(ids > 0, out, 0).astype(np.uint16)
