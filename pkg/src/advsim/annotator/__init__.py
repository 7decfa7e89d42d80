"""Detections from instance planes and their kwcoco / MOTS exports."""

from .detections import DEFAULT_MIN_PIXELS, Detection, detections_from_instance
from .kwcoco import RunMetadata, VideoInfo, export_kwcoco
from .mots import MOTSError, export_mots_png, export_mots_text, mots_id, parse_mots_line, split_mots_id
from .rle import RLE, RLEError, rle_decode, rle_encode

__all__ = [
    "DEFAULT_MIN_PIXELS",
    "Detection",
    "MOTSError",
    "RLE",
    "RLEError",
    "RunMetadata",
    "VideoInfo",
    "detections_from_instance",
    "export_kwcoco",
    "export_mots_png",
    "export_mots_text",
    "mots_id",
    "parse_mots_line",
    "rle_decode",
    "rle_encode",
    "split_mots_id",
]
