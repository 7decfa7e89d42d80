"""Slow, independent reference implementations used only by the tests."""

from __future__ import annotations

import numpy as np


def pixel_rays(pose, K):
    """World-space ray directions through every pixel centre, scaled so forward = 1."""
    v, u = np.mgrid[0:K.height, 0:K.width] + 0.5
    cam = np.stack([np.ones_like(u), (u - K.cx) / K.focal, -(v - K.cy) / K.focal], axis=-1)
    return cam @ pose.matrix().T


def ray_cast(meshes, pose, K, far=1000.0):
    """Nearest hit per pixel by brute force: (planar depth, instance id, mesh index, triangle normal)."""
    dirs = pixel_rays(pose, K).reshape(-1, 3)
    origin = pose.translation()
    n = dirs.shape[0]
    best = np.full(n, np.inf)
    inst = np.zeros(n, np.int64)
    owner = np.full(n, -1)
    normal = np.zeros((n, 3))
    for mi, m in enumerate(meshes):
        for tri in m.triangles:
            e1, e2 = tri[1] - tri[0], tri[2] - tri[0]
            p = np.cross(dirs, e2)
            det = p @ e1
            ok = np.abs(det) > 1e-14
            inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
            s = origin - tri[0]
            a = (p @ s) * inv
            q = np.cross(s, e1)
            b = (dirs @ q) * inv
            t = (q @ e2) * inv
            hit = ok & (a >= 0) & (b >= 0) & (a + b <= 1) & (t > 0.05) & (t < far) & (t < best)
            best[hit] = t[hit]
            inst[hit] = m.instance_id
            owner[hit] = mi
            nrm = np.cross(e1, e2)
            normal[hit] = nrm / np.linalg.norm(nrm)
    shape = (K.height, K.width)
    return best.reshape(shape), inst.reshape(shape), owner.reshape(shape), normal.reshape(shape + (3,))


def brute_force_runs(mask):
    """Column-major alternating run lengths starting with zeros, counted one pixel at a time."""
    flat = [bool(mask[r][c]) for c in range(len(mask[0])) for r in range(len(mask))] if len(mask) else []
    runs, current, count = [], False, 0
    for px in flat:
        if px == current:
            count += 1
        else:
            runs.append(count)
            current, count = px, 1
    runs.append(count)
    return runs


def reference_rle_string(runs):
    """COCO-style compressed counts: delta-code from the fourth count on, 5-bit groups + ASCII 48."""
    out = []
    for i, x in enumerate(runs):
        if i > 2:
            x -= runs[i - 2]
        more = True
        while more:
            c = x & 0x1F
            x >>= 5
            more = not ((c & 0x10) == 0 and x == 0) and not ((c & 0x10) != 0 and x == -1)
            if more:
                c |= 0x20
            out.append(chr(c + 48))
    return "".join(out)
