"""Heuristic patch defenses: background ablation and physical-constraint masks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


class DefenseError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class BackgroundModel:
    median: np.ndarray  # (h, w, 3) float64
    window: int
    tolerance: int = 8  # 8-bit units, max-channel distance


@dataclass(frozen=True, eq=False)
class MaskReport:
    mask: np.ndarray
    coverage: float
    overlap: float | None = None  # fraction of ground-truth pixels covered

    @classmethod
    def of(cls, mask, gt=None) -> "MaskReport":
        m = np.asarray(mask, dtype=bool)
        overlap = None
        if gt is not None:
            g = np.asarray(gt, dtype=bool)
            overlap = float(np.count_nonzero(m & g) / g.sum()) if g.any() else 0.0
        return cls(m, float(m.mean()), overlap)


def build_background(frames, tolerance: int = 8, chunk_rows: int = 64) -> BackgroundModel:
    """Per-pixel, per-channel median of at least three frames."""
    stack = np.asarray(frames)
    if stack.ndim != 4 or stack.shape[0] < 3:
        raise DefenseError("need at least 3 frames of shape (h, w, 3)")
    median = np.empty(stack.shape[1:], np.float64)
    # row chunks keep the float copy small for long windows
    for r0 in range(0, stack.shape[1], chunk_rows):
        median[r0:r0 + chunk_rows] = np.median(stack[:, r0:r0 + chunk_rows].astype(np.float64), axis=0)
    return BackgroundModel(median, stack.shape[0], tolerance)


def ablate(frame_rgb, model: BackgroundModel) -> tuple[np.ndarray, np.ndarray]:
    """Zero every pixel within ``model.tolerance`` of the background (max-channel distance)."""
    f = np.asarray(frame_rgb)
    if f.shape != model.median.shape:
        raise DefenseError(f"frame shape {f.shape} does not match background {model.median.shape}")
    dist = np.abs(f.astype(np.float64) - model.median).max(axis=-1)
    mask = dist <= model.tolerance
    out = f.copy()
    out[mask] = 0
    return out, mask


def ablation_rate(frames, patch_masks, model: BackgroundModel | None = None) -> float:
    """Fraction of ground-truth patch pixels removed, pooled over all frames."""
    frames = list(frames)
    model = model or build_background(frames)
    hit = total = 0
    for f, gt in zip(frames, patch_masks):
        _, mask = ablate(f, model)
        g = np.asarray(gt, dtype=bool)
        hit += int(np.count_nonzero(mask & g))
        total += int(g.sum())
    if total == 0:
        raise DefenseError("no ground-truth patch pixels")
    return hit / total


# -- physical-constraint masks ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ColorStats:
    """Joint quantized RGB histogram of benign pixels and the rarity threshold derived from it."""

    frequency: np.ndarray  # (bins**3,) fraction of benign pixels per bin
    bins: int
    threshold: float


def _bin_index(rgb, bins: int) -> np.ndarray:
    q = (np.asarray(rgb).astype(np.int64) * bins) // 256
    return (q[..., 0] * bins + q[..., 1]) * bins + q[..., 2]


def color_stats(frames, bins: int = 16, percentile: float = 0.5, exclude=None) -> ColorStats:
    """Histogram benign frames; ``percentile`` is in percent of benign pixels.

    ``exclude`` optionally lists per-frame boolean masks of pixels to leave out.
    """
    frames = list(frames)
    if not frames:
        raise DefenseError("empty statistics: no benign frames")
    idx = []
    for i, f in enumerate(frames):
        b = _bin_index(f, bins)
        if exclude is not None:
            b = b[~np.asarray(exclude[i], dtype=bool)]
        idx.append(b.ravel())
    idx = np.concatenate(idx)
    if idx.size == 0:
        raise DefenseError("empty statistics: no benign pixels")
    freq = np.bincount(idx, minlength=bins**3) / idx.size
    threshold = float(np.percentile(freq[idx], percentile))
    return ColorStats(freq, bins, threshold)


def anomalous_color_mask(frame_rgb, stats: ColorStats, gt=None) -> MaskReport:
    """Pixels whose colour bin is rarer in benign data than the stats threshold."""
    if stats.frequency.sum() == 0:
        raise DefenseError("empty statistics")
    freq = stats.frequency[_bin_index(frame_rgb, stats.bins)]
    return MaskReport.of(freq < stats.threshold, gt)


LAPLACIAN = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])


def luminance(frame_rgb) -> np.ndarray:
    f = np.asarray(frame_rgb, dtype=np.float64) / 255.0
    return f @ np.array([0.299, 0.587, 0.114])


def high_frequency_mask(frame_rgb, threshold: float = 24 / 255, gt=None) -> MaskReport:
    """|3x3 Laplacian of luminance| above ``threshold``, dilated by one pixel."""
    lap = ndimage.convolve(luminance(frame_rgb), LAPLACIAN, mode="nearest")
    mask = np.abs(lap) > threshold
    mask = ndimage.binary_dilation(mask, structure=np.ones((3, 3), bool))
    return MaskReport.of(mask, gt)


def hue_saturation_mask(frame_rgb, s_min: float = 0.7, v_min: float = 0.5, gt=None) -> MaskReport:
    f = np.asarray(frame_rgb, dtype=np.float64) / 255.0
    value = f.max(axis=-1)
    chroma = value - f.min(axis=-1)
    saturation = np.divide(chroma, value, out=np.zeros_like(value), where=value > 0)
    return MaskReport.of((saturation >= s_min) & (value >= v_min), gt)


def localization_score(mask, patch_gt_mask) -> tuple[float, float, float]:
    """(precision, recall, IoU) of a predicted mask against the patch ground truth."""
    m = np.asarray(mask, dtype=bool)
    g = np.asarray(patch_gt_mask, dtype=bool)
    inter = int(np.count_nonzero(m & g))
    union = int(np.count_nonzero(m | g))
    precision = inter / m.sum() if m.any() else 0.0
    recall = inter / g.sum() if g.any() else 0.0
    iou = inter / union if union else 0.0
    return float(precision), float(recall), float(iou)
