"""World state: static meshes, walking actors and patch placeholders."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import assets as A
from .config import ScenarioConfig
from .constants import PLACEHOLDER_GREEN
from .prng import Stream
from .transforms import Transform


ARRIVAL_TOLERANCE_M = 1e-9  # absorbs rounding when the path is a whole number of steps


class SceneError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Mesh:
    triangles: np.ndarray  # (n, 3, 3) world metres
    uvs: np.ndarray  # (n, 3, 2)
    albedo: tuple[float, float, float]
    semantic_class: int
    instance_id: int
    name: str = ""
    texture: np.ndarray | None = None  # (h, w, 3) uint8
    obstacle: bool = True

    def __post_init__(self):
        if self.instance_id < 1:
            raise SceneError(f"instance id must be >= 1, got {self.instance_id}")
        if not np.all(np.isfinite(self.triangles)):
            raise SceneError(f"mesh {self.name!r} has non-finite vertices")

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        pts = self.triangles.reshape(-1, 3)
        return pts.min(axis=0), pts.max(axis=0)


@dataclass(frozen=True)
class Actor:
    instance_id: int
    blueprint_name: str
    asset: A.ActorAsset
    spawn: Transform
    speed: float
    fps: int
    role_name: str = ""
    destination: tuple[float, float, float] | None = None
    steps: int = 0
    arrived: bool = False

    @property
    def step_length(self) -> float:
        return self.speed / self.fps

    def _path(self):
        start = np.array(self.spawn.location)
        delta = np.array(self.destination) - start
        return start, delta, float(np.linalg.norm(delta))

    def distance_travelled(self) -> float:
        if self.destination is None:
            return 0.0
        _, _, length = self._path()
        return length if self.arrived else self.steps * self.speed / self.fps

    @property
    def location(self) -> tuple[float, float, float]:
        if self.destination is None:
            return self.spawn.location
        if self.arrived:
            return tuple(float(v) for v in self.destination)
        start, delta, length = self._path()
        return tuple(float(v) for v in start + delta * (self.steps * self.speed / self.fps / length))

    @property
    def transform(self) -> Transform:
        pitch, yaw, roll = self.spawn.rotation
        if self.destination is not None:
            _, delta, _ = self._path()
            if delta[0] or delta[1]:
                yaw = math.degrees(math.atan2(delta[1], delta[0]))
        return Transform(self.location, (pitch, yaw, roll))

    def advanced(self) -> "Actor":
        if self.destination is None or self.arrived:
            return self
        _, _, length = self._path()
        remaining = length - self.steps * self.speed / self.fps
        if remaining <= self.step_length + ARRIVAL_TOLERANCE_M:
            return replace(self, steps=self.steps + 1, arrived=True)
        return replace(self, steps=self.steps + 1)

    def mesh(self) -> Mesh:
        local, uvs = A.box_triangles(self.asset.size)
        world = self.transform.apply(local.reshape(-1, 3)).reshape(local.shape)
        return Mesh(world, uvs, self.asset.albedo, self.asset.semantic_class, self.instance_id, self.role_name)


@dataclass(frozen=True, eq=False)
class PatchPlaceholder:
    """Chroma-green quad; corners ordered top-left, top-right, bottom-right, bottom-left seen from its front."""

    instance_id: int
    name: str
    corners: np.ndarray  # (4, 3)
    texture: np.ndarray | None = None
    default_albedo: tuple[float, float, float] = tuple(float(c) for c in PLACEHOLDER_GREEN)
    semantic_class: int = A.PATCH

    @classmethod
    def from_transform(cls, instance_id, name, transform: Transform, width, height):
        hw, hh = width / 2.0, height / 2.0
        # front faces local +x; a viewer in front sees local -y on their right
        local = np.array([[0.0, hw, hh], [0.0, -hw, hh], [0.0, -hw, -hh], [0.0, hw, -hh]])
        return cls(instance_id, name, transform.apply(local))

    def mesh(self) -> Mesh:
        tris, uvs = A.quad_triangles(self.corners)
        return Mesh(tris, uvs, self.default_albedo, self.semantic_class, self.instance_id, self.name,
                    texture=self.texture, obstacle=False)


@dataclass(frozen=True, eq=False)
class Scene:
    layout: str
    seed: int
    fps: int
    statics: tuple[Mesh, ...]
    actors: tuple[Actor, ...] = ()
    placeholders: tuple[PatchPlaceholder, ...] = ()
    frame_index: int = 0
    ground_ids: frozenset = field(default=frozenset())

    def stream(self, name: str) -> Stream:
        return Stream(self.seed, name)

    def meshes(self) -> list[Mesh]:
        """All geometry at the current frame, ordered actors, placeholders, statics."""
        return [a.mesh() for a in self.actors] + [p.mesh() for p in self.placeholders] + list(self.statics)

    def actor_by_role(self, role_name: str) -> Actor:
        for a in self.actors:
            if a.role_name == role_name:
                return a
        raise SceneError(f"no actor with role_name {role_name!r}")

    def placeholder(self, placeholder_id: int) -> PatchPlaceholder:
        for p in self.placeholders:
            if p.instance_id == placeholder_id:
                return p
        raise SceneError(f"unknown placeholder id {placeholder_id}")

    def instance_classes(self) -> dict[int, int]:
        return {m.instance_id: m.semantic_class for m in self.meshes()}

    def only(self, keep_ids) -> "Scene":
        """Copy containing only the objects whose instance id is in ``keep_ids``."""
        keep = set(keep_ids)
        return replace(
            self,
            statics=tuple(m for m in self.statics if m.instance_id in keep),
            actors=tuple(a for a in self.actors if a.instance_id in keep),
            placeholders=tuple(p for p in self.placeholders if p.instance_id in keep),
        )


def _boxes_overlap(lo1, hi1, lo2, hi2) -> bool:
    return bool(np.all(lo1 < hi2) and np.all(lo2 < hi1))


def build_scene(config: ScenarioConfig, assets: A.AssetLibrary | None = None, load_texture=None) -> Scene:
    """Instantiate the scenario world at frame 0.

    Instance ids are dense from 1: actors in spawn order, then patch
    placeholders, then static layout parts. Wildcard blueprints pick an asset
    from the ``assets`` stream, one draw per actor index.
    """
    assets = assets or A.AssetLibrary()
    try:
        parts = A.resolve_layout(config.sim.townmap)
    except KeyError as exc:
        raise SceneError(str(exc)) from None

    chooser = Stream(config.sim.seed, "assets")
    actors = []
    for i, spec in enumerate(config.actors):
        matches = assets.match(spec.blueprint_name)
        if not matches:
            raise SceneError(f"actor {i}: no asset matches {spec.blueprint_name!r}")
        asset = matches[int(chooser.integers(i, len(matches)))]
        dest = spec.destination.location if spec.destination is not None else None
        actors.append(
            Actor(
                instance_id=len(actors) + 1,
                blueprint_name=asset.name,
                asset=asset,
                spawn=spec.spawn,
                speed=spec.speed,
                fps=config.sim.fps,
                role_name=spec.role_name,
                destination=dest,
            )
        )

    next_id = len(actors) + 1
    placeholders = []
    for p in config.patches:
        ph = PatchPlaceholder.from_transform(next_id, p.name, p.transform, p.width, p.height)
        if p.texture is not None and load_texture is not None:
            ph = replace(ph, texture=load_texture(p.texture))
        placeholders.append(ph)
        next_id += 1

    statics = []
    for part in parts:
        statics.append(Mesh(part.triangles, part.uvs, part.albedo, part.semantic_class, next_id, part.name,
                            obstacle=part.obstacle))
        next_id += 1
    if next_id > 0xFFFF:
        raise SceneError("more than 65535 instances")

    for i, actor in enumerate(actors):
        lo, hi = actor.mesh().bounds()
        for m in statics:
            if m.obstacle and _boxes_overlap(lo, hi, *m.bounds()):
                raise SceneError(f"actor {i} ({actor.role_name or actor.blueprint_name}) spawns inside {m.name!r}")

    ground = frozenset(m.instance_id for m in statics if m.semantic_class == A.GROUND)
    return Scene(
        layout=config.sim.townmap,
        seed=config.sim.seed,
        fps=config.sim.fps,
        statics=tuple(statics),
        actors=tuple(actors),
        placeholders=tuple(placeholders),
        ground_ids=ground,
    )


def step(scene: Scene) -> Scene:
    """Advance one fixed timestep: each walker moves ``speed / fps`` toward its destination."""
    return replace(scene, actors=tuple(a.advanced() for a in scene.actors), frame_index=scene.frame_index + 1)


def set_patch_texture(scene: Scene, placeholder_id: int, texture) -> Scene:
    """Stream a texture onto a placeholder; geometry and ids stay unchanged."""
    scene.placeholder(placeholder_id)
    tex = np.asarray(texture)
    if tex.ndim != 3 or tex.shape[2] != 3 or tex.shape[0] < 1 or tex.shape[1] < 1:
        raise SceneError(f"texture must be (h, w, 3) with h, w >= 1, got {tex.shape}")
    tex = np.ascontiguousarray(tex, dtype=np.uint8)
    placeholders = tuple(
        replace(p, texture=tex) if p.instance_id == placeholder_id else p for p in scene.placeholders
    )
    return replace(scene, placeholders=placeholders)
