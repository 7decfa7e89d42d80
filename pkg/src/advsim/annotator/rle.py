"""COCO compressed run-length encoding of binary masks.

Runs are counted in column-major order, alternating background and
foreground and starting with background. Serialisation follows the COCO
mask API: from the fourth run on, each value is stored as the difference to
the run two places earlier, then written as little-endian 5-bit groups with
a continuation bit (0x20) and sign bit (0x10) in the last group, each group
offset by ASCII 48.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class RLEError(ValueError):
    pass


@dataclass(frozen=True)
class RLE:
    size: tuple[int, int]  # (height, width)
    counts: str

    def to_json(self) -> dict:
        return {"size": [int(self.size[0]), int(self.size[1])], "counts": self.counts}

    @classmethod
    def from_json(cls, obj) -> "RLE":
        return cls((int(obj["size"][0]), int(obj["size"][1])), obj["counts"])


def mask_to_runs(mask) -> np.ndarray:
    m = np.asarray(mask, dtype=bool)
    flat = m.ravel(order="F")
    if flat.size == 0:
        return np.zeros(1, np.int64)
    change = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], change, [flat.size]))
    runs = np.diff(bounds)
    if flat[0]:
        runs = np.concatenate(([0], runs))
    return runs.astype(np.int64)


def runs_to_mask(runs, size) -> np.ndarray:
    h, w = size
    runs = np.asarray(runs, dtype=np.int64)
    if np.any(runs < 0) or runs.sum() != h * w:
        raise RLEError(f"runs sum to {int(runs.sum())}, expected {h * w}")
    values = np.arange(len(runs)) % 2 == 1
    return np.repeat(values, runs).reshape((w, h)).T.copy()


def runs_to_string(runs) -> str:
    out = []
    cnts = [int(c) for c in runs]
    for i, x in enumerate(cnts):
        if i > 2:
            x -= cnts[i - 2]
        more = True
        while more:
            c = x & 0x1F
            x >>= 5
            more = (x != -1) if (c & 0x10) else (x != 0)
            if more:
                c |= 0x20
            out.append(chr(c + 48))
    return "".join(out)


def string_to_runs(s: str) -> list[int]:
    cnts: list[int] = []
    p, n = 0, len(s)
    while p < n:
        x, k, more = 0, 0, True
        while more:
            if p >= n:
                raise RLEError("truncated RLE string")
            c = ord(s[p]) - 48
            if not 0 <= c < 64:
                raise RLEError(f"invalid RLE character {s[p]!r} at {p}")
            x |= (c & 0x1F) << (5 * k)
            more = bool(c & 0x20)
            p += 1
            k += 1
            if not more and (c & 0x10):
                x |= -1 << (5 * k)
        if len(cnts) > 2:
            x += cnts[-2]
        cnts.append(x)
    return cnts


def rle_encode(mask) -> RLE:
    m = np.asarray(mask)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise RLEError(f"mask must be 2-D with H, W >= 1, got shape {m.shape}")
    return RLE((m.shape[0], m.shape[1]), runs_to_string(mask_to_runs(m)))


def rle_decode(rle: RLE) -> np.ndarray:
    return runs_to_mask(string_to_runs(rle.counts), rle.size)


def rle_area(rle: RLE) -> int:
    return int(sum(string_to_runs(rle.counts)[1::2]))
