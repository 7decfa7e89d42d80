"""kwcoco export: COCO plus ``videos`` and per-image ``video_id``/``frame_index``.

Emitted keys (the whole schema this module promises):

* ``info``: ``{"generator", "version"}`` plus caller metadata
* ``videos``: ``id``, ``name``, ``width``, ``height``, ``sensor_index``
* ``images``: ``id``, ``file_name``, ``video_id``, ``frame_index``, ``width``, ``height``
* ``categories``: ``id``, ``name``
* ``annotations``: ``id``, ``image_id``, ``category_id``, ``track_id``,
  ``bbox`` [x, y, w, h], ``segmentation`` {size, counts}, ``area``, ``iscrowd`` (always 0)
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..assets import CLASS_NAMES
from .detections import Detection


@dataclass(frozen=True)
class VideoInfo:
    sensor_index: int
    name: str
    width: int
    height: int
    frame_files: tuple[str, ...] = ()  # file_name per frame index


@dataclass
class RunMetadata:
    videos: list[VideoInfo]
    info: dict = field(default_factory=dict)
    categories: dict[int, str] = field(default_factory=lambda: dict(CLASS_NAMES))


def export_kwcoco(detections: list[Detection], meta: RunMetadata) -> dict:
    videos = sorted(meta.videos, key=lambda v: v.sensor_index)
    cat_ids = sorted(c for c in meta.categories if c != 0)
    cat_map = {c: i + 1 for i, c in enumerate(cat_ids)}
    doc = {
        "info": {"generator": "advsim", **meta.info},
        "videos": [],
        "images": [],
        "categories": [{"id": cat_map[c], "name": meta.categories[c]} for c in cat_ids],
        "annotations": [],
    }
    image_ids = {}
    for vid, v in enumerate(videos, start=1):
        doc["videos"].append(
            {"id": vid, "name": v.name, "width": v.width, "height": v.height, "sensor_index": v.sensor_index}
        )
        for frame, fname in enumerate(v.frame_files):
            image_id = len(doc["images"]) + 1
            image_ids[(v.sensor_index, frame)] = image_id
            doc["images"].append(
                {
                    "id": image_id,
                    "file_name": fname,
                    "video_id": vid,
                    "frame_index": frame,
                    "width": v.width,
                    "height": v.height,
                }
            )
    for det in sorted(detections, key=lambda d: (d.sensor_index, d.frame_index, d.track_id)):
        key = (det.sensor_index, det.frame_index)
        if key not in image_ids:
            raise KeyError(f"detection for sensor {det.sensor_index} frame {det.frame_index} has no image")
        if det.class_id not in cat_map:
            raise KeyError(f"unknown category {det.class_id}")
        doc["annotations"].append(
            {
                "id": len(doc["annotations"]) + 1,
                "image_id": image_ids[key],
                "category_id": cat_map[det.class_id],
                "track_id": det.track_id,
                "bbox": list(det.bbox),
                "segmentation": det.mask.to_json(),
                "area": det.area,
                "iscrowd": 0,
            }
        )
    return doc
