"""Numba kernels: z-buffered triangle rasterization, shading and shadow rays.

Both passes take a row range ``[y0, y1)`` and touch only those rows, so any
partition of the image into row blocks produces identical bytes.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# pixel centres sit at (col + 0.5, row + 0.5); screen y grows downward


@njit(cache=True, nogil=True)
def _edge(ax, ay, bx, by, px, py):
    return (bx - ax) * (py - ay) - (by - ay) * (px - ax)


@njit(cache=True, nogil=True)
def _owns(ax, ay, bx, by):
    # tie-break for pixel centres exactly on an edge: of two triangles sharing
    # an edge (traversed in opposite directions) exactly one owns it
    dy = by - ay
    return dy > 0.0 or (dy == 0.0 and bx - ax < 0.0)


@njit(cache=True, nogil=True)
def rasterize_rows(sx, sy, inv_z, uv_z, far, y0, y1, zbuf, tri_buf, uv_buf):
    """Rasterize screen triangles into rows [y0, y1).

    sx, sy, inv_z: (n, 3); uv_z: (n, 3, 2) holding uv / depth per vertex.
    zbuf (planar depth), tri_buf (winning triangle, -1 for none) and uv_buf
    (perspective-correct uv) are written in place.
    """
    width = zbuf.shape[1]
    n = sx.shape[0]
    for t in range(n):
        x0, x1, x2 = sx[t, 0], sx[t, 1], sx[t, 2]
        yy0, yy1, yy2 = sy[t, 0], sy[t, 1], sy[t, 2]
        i0, i1, i2 = 0, 1, 2
        area = _edge(x0, yy0, x1, yy1, x2, yy2)
        if area == 0.0 or not math.isfinite(area):
            continue
        if area < 0.0:
            x1, x2 = x2, x1
            yy1, yy2 = yy2, yy1
            i1, i2 = 2, 1
            area = -area
        own0 = _owns(x1, yy1, x2, yy2)
        own1 = _owns(x2, yy2, x0, yy0)
        own2 = _owns(x0, yy0, x1, yy1)
        rmin = max(y0, int(math.floor(min(yy0, min(yy1, yy2)) - 0.5)))
        rmax = min(y1 - 1, int(math.ceil(max(yy0, max(yy1, yy2)) - 0.5)))
        cmin = max(0, int(math.floor(min(x0, min(x1, x2)) - 0.5)))
        cmax = min(width - 1, int(math.ceil(max(x0, max(x1, x2)) - 0.5)))
        iz0, iz1, iz2 = inv_z[t, i0], inv_z[t, i1], inv_z[t, i2]
        for r in range(rmin, rmax + 1):
            py = r + 0.5
            for c in range(cmin, cmax + 1):
                px = c + 0.5
                w0 = _edge(x1, yy1, x2, yy2, px, py)
                if w0 < 0.0 or (w0 == 0.0 and not own0):
                    continue
                w1 = _edge(x2, yy2, x0, yy0, px, py)
                if w1 < 0.0 or (w1 == 0.0 and not own1):
                    continue
                w2 = _edge(x0, yy0, x1, yy1, px, py)
                if w2 < 0.0 or (w2 == 0.0 and not own2):
                    continue
                b0 = w0 / area
                b1 = w1 / area
                b2 = w2 / area
                iz = b0 * iz0 + b1 * iz1 + b2 * iz2
                if iz <= 0.0:
                    continue
                depth = 1.0 / iz
                if depth >= far or depth >= zbuf[r, c]:
                    continue
                zbuf[r, c] = depth
                tri_buf[r, c] = t
                for k in range(2):
                    uv_buf[r, c, k] = (b0 * uv_z[t, i0, k] + b1 * uv_z[t, i1, k] + b2 * uv_z[t, i2, k]) * depth


@njit(cache=True, nogil=True)
def _ray_hits_triangle(ox, oy, oz, dx, dy, dz, tri):
    # Moller-Trumbore, any hit with t > 0
    e1x = tri[1, 0] - tri[0, 0]
    e1y = tri[1, 1] - tri[0, 1]
    e1z = tri[1, 2] - tri[0, 2]
    e2x = tri[2, 0] - tri[0, 0]
    e2y = tri[2, 1] - tri[0, 1]
    e2z = tri[2, 2] - tri[0, 2]
    px = dy * e2z - dz * e2y
    py = dz * e2x - dx * e2z
    pz = dx * e2y - dy * e2x
    det = e1x * px + e1y * py + e1z * pz
    if abs(det) < 1e-14:
        return False
    inv = 1.0 / det
    tx = ox - tri[0, 0]
    ty = oy - tri[0, 1]
    tz = oz - tri[0, 2]
    u = (tx * px + ty * py + tz * pz) * inv
    if u < 0.0 or u > 1.0:
        return False
    qx = ty * e1z - tz * e1y
    qy = tz * e1x - tx * e1z
    qz = tx * e1y - ty * e1x
    v = (dx * qx + dy * qy + dz * qz) * inv
    if v < 0.0 or u + v > 1.0:
        return False
    t = (e2x * qx + e2y * qy + e2z * qz) * inv
    return t > 1e-9


@njit(cache=True, nogil=True)
def _ray_hits_box(ox, oy, oz, dx, dy, dz, lo, hi):
    tmin = 0.0
    tmax = 1e300
    o = (ox, oy, oz)
    d = (dx, dy, dz)
    for k in range(3):
        if d[k] == 0.0:
            if o[k] < lo[k] or o[k] > hi[k]:
                return False
        else:
            ta = (lo[k] - o[k]) / d[k]
            tb = (hi[k] - o[k]) / d[k]
            if ta > tb:
                ta, tb = tb, ta
            if ta > tmin:
                tmin = ta
            if tb < tmax:
                tmax = tb
            if tmin > tmax:
                return False
    return True


@njit(cache=True, nogil=True)
def occluded(ox, oy, oz, dx, dy, dz, tris, obj_start, obj_end, obj_lo, obj_hi):
    """True if the ray hits any triangle; objects are culled by bounding box first."""
    for o in range(obj_start.shape[0]):
        if not _ray_hits_box(ox, oy, oz, dx, dy, dz, obj_lo[o], obj_hi[o]):
            continue
        for t in range(obj_start[o], obj_end[o]):
            if _ray_hits_triangle(ox, oy, oz, dx, dy, dz, tris[t]):
                return True
    return False


@njit(cache=True, nogil=True)
def sample_bilinear(tex, offset, tw, th, u, v, out):
    """Bilinear, clamp-to-edge sample of a texture stored flat at ``offset``."""
    x = u * tw - 0.5
    y = v * th - 0.5
    xf = math.floor(x)
    yf = math.floor(y)
    fx = x - xf
    fy = y - yf
    xa = min(max(int(xf), 0), tw - 1)
    xb = min(max(int(xf) + 1, 0), tw - 1)
    ya = min(max(int(yf), 0), th - 1)
    yb = min(max(int(yf) + 1, 0), th - 1)
    for k in range(3):
        c00 = tex[offset + (ya * tw + xa) * 3 + k]
        c01 = tex[offset + (ya * tw + xb) * 3 + k]
        c10 = tex[offset + (yb * tw + xa) * 3 + k]
        c11 = tex[offset + (yb * tw + xb) * 3 + k]
        top = c00 + (c01 - c00) * fx
        bot = c10 + (c11 - c10) * fx
        out[k] = top + (bot - top) * fy


@njit(cache=True, nogil=True)
def shade_rows(
    y0, y1, zbuf, tri_buf, uv_buf,
    tri_src, tri_obj, tri_normal,
    obj_albedo, obj_tex_offset, obj_tex_w, obj_tex_h, tex,
    world_tris, obj_start, obj_end, obj_lo, obj_hi,
    cam_r, cam_t, focal, cx, cy,
    sun, ambient, diffuse, fog_color, fog_beta, fog_start, sky_rgb,
    shadow_eps, shadows_on, out_rgb, out_obj,
):
    width = zbuf.shape[1]
    alb = np.empty(3)
    for r in range(y0, y1):
        for c in range(width):
            t = tri_buf[r, c]
            if t < 0:
                out_obj[r, c] = -1
                for k in range(3):
                    out_rgb[r, c, k] = sky_rgb[k]
                continue
            src = tri_src[t]
            o = tri_obj[src]
            out_obj[r, c] = o
            if obj_tex_offset[o] >= 0:
                sample_bilinear(tex, obj_tex_offset[o], obj_tex_w[o], obj_tex_h[o],
                                uv_buf[r, c, 0], uv_buf[r, c, 1], alb)
            else:
                for k in range(3):
                    alb[k] = obj_albedo[o, k]
            d = zbuf[r, c]
            # camera-space point (forward, right, up) -> world
            qx = d
            qy = (c + 0.5 - cx) * d / focal
            qz = -(r + 0.5 - cy) * d / focal
            px = cam_r[0, 0] * qx + cam_r[0, 1] * qy + cam_r[0, 2] * qz + cam_t[0]
            py = cam_r[1, 0] * qx + cam_r[1, 1] * qy + cam_r[1, 2] * qz + cam_t[1]
            pz = cam_r[2, 0] * qx + cam_r[2, 1] * qy + cam_r[2, 2] * qz + cam_t[2]
            nx, ny, nz = tri_normal[src, 0], tri_normal[src, 1], tri_normal[src, 2]
            if nx * (cam_t[0] - px) + ny * (cam_t[1] - py) + nz * (cam_t[2] - pz) < 0.0:
                nx, ny, nz = -nx, -ny, -nz
            ndl = nx * sun[0] + ny * sun[1] + nz * sun[2]
            light = ambient
            if diffuse > 0.0 and ndl > 0.0:
                lit = True
                if shadows_on:
                    lit = not occluded(px + shadow_eps * sun[0], py + shadow_eps * sun[1],
                                       pz + shadow_eps * sun[2], sun[0], sun[1], sun[2],
                                       world_tris, obj_start, obj_end, obj_lo, obj_hi)
                if lit:
                    light += diffuse * ndl
            w = 1.0 - math.exp(-fog_beta * max(0.0, d - fog_start))
            for k in range(3):
                out_rgb[r, c, k] = alb[k] * light * (1.0 - w) + fog_color[k] * w


@njit(cache=True, nogil=True)
def quantize(img):
    h, w, _ = img.shape
    out = np.empty((h, w, 3), np.uint8)
    for r in range(h):
        for c in range(w):
            for k in range(3):
                v = img[r, c, k]
                if v < 0.0:
                    v = 0.0
                elif v > 255.0:
                    v = 255.0
                out[r, c, k] = np.uint8(math.floor(v + 0.5))
    return out
