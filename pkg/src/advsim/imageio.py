"""PNG read/write with content hashing."""

from __future__ import annotations

import hashlib
import io
from pathlib import Path

import numpy as np
from PIL import Image

PNG_COMPRESS_LEVEL = 1


def png_bytes(array) -> bytes:
    a = np.asarray(array)
    if a.dtype == np.uint16:
        if a.ndim != 2:
            raise ValueError("16-bit PNGs must be single channel")
        img = Image.fromarray(np.ascontiguousarray(a))  # infers I;16
    else:
        img = Image.fromarray(np.ascontiguousarray(a, dtype=np.uint8))
    buf = io.BytesIO()
    img.save(buf, format="PNG", compress_level=PNG_COMPRESS_LEVEL)
    return buf.getvalue()


def write_png(path, array) -> str:
    """Write ``array`` as PNG and return the sha256 of the written bytes."""
    data = png_bytes(array)
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def write_bytes(path, data: bytes) -> str:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def read_png(path) -> np.ndarray:
    with Image.open(path) as img:
        if img.mode in ("I;16", "I;16B", "I"):
            return np.asarray(img, dtype=np.uint16)
        return np.asarray(img.convert("RGB"), dtype=np.uint8)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
