import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from advsim.annotator import (
    MOTSError,
    RunMetadata,
    VideoInfo,
    detections_from_instance,
    export_kwcoco,
    export_mots_png,
    export_mots_text,
    mots_id,
    parse_mots_line,
    rle_decode,
    split_mots_id,
)


def _plane():
    ids = np.zeros((20, 30), np.uint16)
    sem = np.zeros((20, 30), np.uint8)
    ids[2:8, 3:9] = 1
    sem[2:8, 3:9] = 4
    ids[10:12, 20:28] = 7  # 16 px
    sem[10:12, 20:28] = 20
    ids[15, 0:5] = 3  # 5 px, below the default minimum
    sem[15, 0:5] = 4
    return ids, sem


def test_detections_boxes_masks_and_filtering():
    ids, sem = _plane()
    dets = detections_from_instance(ids, sem, frame_index=4, sensor_index=2)
    assert [d.track_id for d in dets] == [1, 7]
    d1, d7 = dets
    assert d1.bbox == (3, 2, 6, 6) and d1.area == 36 and d1.class_id == 4
    assert d7.bbox == (20, 10, 8, 2) and d7.area == 16 and d7.class_id == 20
    assert (d1.frame_index, d1.sensor_index) == (4, 2)
    assert np.array_equal(rle_decode(d1.mask), ids == 1)
    assert [d.track_id for d in detections_from_instance(ids, sem, min_pixels=1)] == [1, 3, 7]


def test_box_is_hull_of_visible_pixels_only():
    ids = np.zeros((10, 10), np.uint16)
    ids[2:8, 2:8] = 5
    ids[2:8, 5:8] = 9  # occluder covers the right half
    d = {x.track_id: x for x in detections_from_instance(ids, min_pixels=1)}
    assert d[5].bbox == (2, 2, 3, 6) and d[5].area == 18


def test_kwcoco_schema():
    ids, sem = _plane()
    dets = detections_from_instance(ids, sem)
    videos = [VideoInfo(0, "0_rgb", 30, 20, ("0_rgb/frame_000000.png", "0_rgb/frame_000001.png"))]
    doc = export_kwcoco(dets, RunMetadata(videos))
    assert set(doc) == {"info", "videos", "images", "categories", "annotations"}
    assert doc["videos"] == [{"id": 1, "name": "0_rgb", "width": 30, "height": 20, "sensor_index": 0}]
    assert [im["frame_index"] for im in doc["images"]] == [0, 1]
    cats = {c["id"]: c["name"] for c in doc["categories"]}
    ann = doc["annotations"][0]
    assert cats[ann["category_id"]] == "pedestrian"
    assert ann["bbox"] == [3, 2, 6, 6] and ann["area"] == 36 and ann["iscrowd"] == 0 and ann["track_id"] == 1
    assert ann["segmentation"]["size"] == [20, 30]
    json.dumps(doc)
    with pytest.raises(KeyError):
        export_kwcoco(dets, RunMetadata([]))


@given(st.integers(0, 63), st.integers(0, 999))
def test_mots_id_round_trip(c, i):
    v = mots_id(c, i)
    assert v == c * 1000 + i
    assert tuple(int(x) for x in split_mots_id(v)) == (c, i)


def test_mots_id_rejects_out_of_range():
    with pytest.raises(MOTSError):
        mots_id(4, 1000)
    with pytest.raises(MOTSError):
        mots_id(64, 1)
    with pytest.raises(MOTSError):
        mots_id(np.array([1, 2]), np.array([5, 1200]))


def test_mots_text_and_png():
    ids, sem = _plane()
    dets = detections_from_instance(ids, sem, frame_index=3)
    lines = export_mots_text(dets)
    f, tid, cls, h, w, rle = parse_mots_line(lines[0])
    assert (f, tid, cls, h, w) == (3, 4001, 4, 20, 30)
    assert rle == dets[0].mask.counts
    png = export_mots_png(ids, sem)
    assert png.dtype == np.uint16
    assert png[3, 4] == 4001 and png[10, 21] == 20007 and png[0, 0] == 0
