from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import constants as C
from ..prng import Stream
from ..sensor_rig import CameraIntrinsics, world_to_camera
from ..transforms import Transform
from . import raster
from .codecs import encode_depth, encode_depth_mm, encode_instance
from .light import LightModel
from .rain import apply_rain, rain_coverage


@dataclass(eq=False)
class FrameBundle:
    rgb: np.ndarray  # (h, w, 3) uint8
    depth_m: np.ndarray  # (h, w) float64, FAR_M where nothing was hit
    semantic: np.ndarray  # (h, w) uint8
    instance_id: np.ndarray  # (h, w) uint16, 0 = background
    frame_index: int
    sensor_index: int
    pose: Transform
    intrinsics: CameraIntrinsics

    @property
    def shape(self) -> tuple[int, int]:
        return self.depth_m.shape

    def depth_rgb(self) -> np.ndarray:
        return encode_depth(self.depth_m)

    def depth_mm(self) -> np.ndarray:
        return encode_depth_mm(self.depth_m)

    def instance_rgb(self) -> np.ndarray:
        return encode_instance(self.semantic, self.instance_id)


@dataclass
class _Geometry:
    world_tris: np.ndarray
    tri_uv: np.ndarray
    tri_obj: np.ndarray
    tri_normal: np.ndarray
    obj_start: np.ndarray
    obj_end: np.ndarray
    obj_lo: np.ndarray
    obj_hi: np.ndarray
    obj_albedo: np.ndarray
    obj_tex_offset: np.ndarray
    obj_tex_w: np.ndarray
    obj_tex_h: np.ndarray
    obj_class: np.ndarray
    obj_instance: np.ndarray
    tex: np.ndarray


def _gather(meshes, light: LightModel, ground_ids=frozenset()) -> _Geometry:
    tris, uvs, owner = [], [], []
    n_obj = len(meshes)
    obj_start = np.zeros(n_obj, np.int64)
    obj_end = np.zeros(n_obj, np.int64)
    obj_lo = np.zeros((n_obj, 3))
    obj_hi = np.zeros((n_obj, 3))
    obj_albedo = np.zeros((n_obj, 3))
    obj_tex_offset = np.full(n_obj, -1, np.int64)
    obj_tex_w = np.zeros(n_obj, np.int64)
    obj_tex_h = np.zeros(n_obj, np.int64)
    obj_class = np.zeros(n_obj, np.uint8)
    obj_instance = np.zeros(n_obj, np.uint16)
    textures, tex_len = [], 0
    count = 0
    for o, m in enumerate(meshes):
        obj_start[o] = count
        count += len(m.triangles)
        obj_end[o] = count
        tris.append(m.triangles)
        uvs.append(m.uvs)
        owner.append(np.full(len(m.triangles), o, np.int64))
        obj_lo[o], obj_hi[o] = m.bounds()
        scale = light.ground_albedo_scale if m.instance_id in ground_ids else 1.0
        obj_albedo[o] = np.asarray(m.albedo, dtype=np.float64) * scale
        if m.texture is not None:
            t = np.ascontiguousarray(m.texture, dtype=np.float64)
            obj_tex_offset[o] = tex_len
            obj_tex_h[o], obj_tex_w[o] = t.shape[:2]
            textures.append(t.ravel())
            tex_len += t.size
        obj_class[o] = m.semantic_class
        obj_instance[o] = m.instance_id
    world = np.concatenate(tris) if tris else np.zeros((0, 3, 3))
    e1 = world[:, 1] - world[:, 0]
    e2 = world[:, 2] - world[:, 0]
    normal = np.cross(e1, e2)
    length = np.linalg.norm(normal, axis=1, keepdims=True)
    normal = np.divide(normal, length, out=np.zeros_like(normal), where=length > 0)
    return _Geometry(
        world_tris=np.ascontiguousarray(world),
        tri_uv=np.concatenate(uvs) if uvs else np.zeros((0, 3, 2)),
        tri_obj=np.concatenate(owner) if owner else np.zeros(0, np.int64),
        tri_normal=normal,
        obj_start=obj_start,
        obj_end=obj_end,
        obj_lo=obj_lo,
        obj_hi=obj_hi,
        obj_albedo=obj_albedo,
        obj_tex_offset=obj_tex_offset,
        obj_tex_w=obj_tex_w,
        obj_tex_h=obj_tex_h,
        obj_class=obj_class,
        obj_instance=obj_instance,
        tex=np.concatenate(textures) if textures else np.zeros(1),
    )


def _clip_near(cam, uv, near):
    """Sutherland-Hodgman clip of one camera-space triangle against x >= near."""
    out_p, out_uv = [], []
    for i in range(3):
        j = (i + 1) % 3
        a, b = cam[i], cam[j]
        ina, inb = a[0] >= near, b[0] >= near
        if ina:
            out_p.append(a)
            out_uv.append(uv[i])
        if ina != inb:
            s = (near - a[0]) / (b[0] - a[0])
            p = a + s * (b - a)
            p[0] = near
            out_p.append(p)
            out_uv.append(uv[i] + s * (uv[j] - uv[i]))
    return [
        (np.stack([out_p[0], out_p[k], out_p[k + 1]]), np.stack([out_uv[0], out_uv[k], out_uv[k + 1]]))
        for k in range(1, len(out_p) - 1)
    ]


def screen_triangles(world_tris, tri_uv, pose: Transform, K: CameraIntrinsics, near: float = C.NEAR_M):
    """Camera-space transform, near clipping and projection.

    Returns (sx, sy, inv_z, uv_z, src) where ``src`` maps each screen
    triangle back to its world triangle.
    """
    n = len(world_tris)
    cam = world_to_camera(world_tris.reshape(-1, 3), pose).reshape(n, 3, 3)
    front = cam[:, :, 0] >= near
    whole = front.all(axis=1)
    cams, uvs, src = [cam[whole]], [tri_uv[whole]], [np.nonzero(whole)[0]]
    for t in np.nonzero(front.any(axis=1) & ~whole)[0]:
        for c, u in _clip_near(cam[t], tri_uv[t], near):
            cams.append(c[None])
            uvs.append(u[None])
            src.append(np.array([t]))
    cam = np.concatenate(cams)
    uv = np.concatenate(uvs)
    x = cam[:, :, 0]
    sx = K.cx + K.focal * (cam[:, :, 1] / x)
    sy = K.cy - K.focal * (cam[:, :, 2] / x)
    inv_z = 1.0 / x
    uv_z = uv * inv_z[:, :, None]
    return (np.ascontiguousarray(sx), np.ascontiguousarray(sy), np.ascontiguousarray(inv_z),
            np.ascontiguousarray(uv_z), np.concatenate(src).astype(np.int64))


def _row_blocks(height: int, blocks: int):
    blocks = max(1, min(int(blocks), height))
    edges = [height * i // blocks for i in range(blocks + 1)]
    return list(zip(edges[:-1], edges[1:]))


def render(
    scene,
    pose: Transform,
    K: CameraIntrinsics,
    light: LightModel,
    rain_stream: Stream | None = None,
    *,
    sensor_index: int = 0,
    row_blocks: int = 1,
    workers: int = 1,
    shadows: bool = True,
) -> FrameBundle:
    """Rasterize ``scene`` from ``pose`` into an aligned RGB/depth/instance bundle.

    One z-buffer pass decides every plane, so instance ids, depth edges and
    RGB silhouettes coincide exactly. The depth test is strict, so on an
    exact tie the object drawn first keeps the pixel (``Scene.meshes`` order:
    actors, placeholders, statics). Rain touches RGB only. The result is
    byte-identical for any ``row_blocks``/``workers`` split.
    """
    h, w = K.height, K.width
    g = _gather(scene.meshes(), light, getattr(scene, "ground_ids", frozenset()))
    sx, sy, inv_z, uv_z, src = screen_triangles(g.world_tris, g.tri_uv, pose, K)

    zbuf = np.full((h, w), C.FAR_M)
    tri_buf = np.full((h, w), -1, np.int64)
    uv_buf = np.zeros((h, w, 2))
    rgb = np.zeros((h, w, 3))
    obj_buf = np.full((h, w), -1, np.int64)
    sky = light.sky_pixel()

    def work(rows):
        y0, y1 = rows
        raster.rasterize_rows(sx, sy, inv_z, uv_z, C.FAR_M, y0, y1, zbuf, tri_buf, uv_buf)
        raster.shade_rows(
            y0, y1, zbuf, tri_buf, uv_buf,
            src, g.tri_obj, g.tri_normal,
            g.obj_albedo, g.obj_tex_offset, g.obj_tex_w, g.obj_tex_h, g.tex,
            g.world_tris, g.obj_start, g.obj_end, g.obj_lo, g.obj_hi,
            pose.matrix(), pose.translation(), K.focal, K.cx, K.cy,
            np.array(light.sun_dir), light.ambient, light.diffuse,
            np.array(light.fog_color), light.fog_beta, light.fog_start, sky,
            C.SHADOW_EPS_M, shadows, rgb, obj_buf,
        )

    blocks = _row_blocks(h, row_blocks)
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, blocks))
    else:
        for b in blocks:
            work(b)

    if light.precipitation > 0:
        stream = rain_stream if rain_stream is not None else scene.stream("rain")
        rgb = apply_rain(rgb, rain_coverage(h, w, light.precipitation, stream.child(scene.frame_index)))

    hit = obj_buf >= 0
    semantic = np.zeros((h, w), np.uint8)
    instance = np.zeros((h, w), np.uint16)
    semantic[hit] = g.obj_class[obj_buf[hit]]
    instance[hit] = g.obj_instance[obj_buf[hit]]
    return FrameBundle(
        rgb=raster.quantize(rgb),
        depth_m=zbuf,
        semantic=semantic,
        instance_id=instance,
        frame_index=scene.frame_index,
        sensor_index=sensor_index,
        pose=pose,
        intrinsics=K,
    )


def shadow(scene, surface_point, sun_dir, eps: float = C.SHADOW_EPS_M) -> int:
    """1 if the surface point sees the sun, 0 if any triangle blocks the ray."""
    g = _gather(scene.meshes(), LightModel((0, 0, 1), 0, 0, (0, 0, 0), 0, 0, (0, 0, 0)))
    d = np.asarray(sun_dir, dtype=np.float64)
    d = d / np.linalg.norm(d)
    p = np.asarray(surface_point, dtype=np.float64) + eps * d
    hit = raster.occluded(p[0], p[1], p[2], d[0], d[1], d[2], g.world_tris, g.obj_start, g.obj_end, g.obj_lo, g.obj_hi)
    return 0 if hit else 1
