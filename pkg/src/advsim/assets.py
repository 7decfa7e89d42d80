"""Built-in geometry: town layouts and the actor asset library."""

from __future__ import annotations

import fnmatch
from dataclasses import dataclass

import numpy as np

# semantic classes (values < 64 so MOTS ids stay unambiguous)
UNLABELED = 0
GROUND = 1
BUILDING = 2
WALL = 3
PEDESTRIAN = 4
PROP = 5
VEHICLE = 10
PATCH = 20

CLASS_NAMES = {
    UNLABELED: "unlabeled",
    GROUND: "ground",
    BUILDING: "building",
    WALL: "wall",
    PEDESTRIAN: "pedestrian",
    PROP: "prop",
    VEHICLE: "vehicle",
    PATCH: "patch",
}

WALKER_SIZE = (0.4, 0.5, 1.8)  # depth (x), width (y), height (z)

_BOX_FACES = (
    # corner indices, listed counter-clockwise seen from outside
    (0, 1, 3, 2),  # -x
    (4, 6, 7, 5),  # +x
    (0, 4, 5, 1),  # -y
    (2, 3, 7, 6),  # +y
    (0, 2, 6, 4),  # -z
    (1, 5, 7, 3),  # +z
)
_QUAD_UV = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def quad_triangles(corners) -> tuple[np.ndarray, np.ndarray]:
    """Split a quad (4, 3) into two triangles with UVs spanning [0, 1]^2."""
    c = np.asarray(corners, dtype=np.float64)
    tris = np.stack([c[[0, 1, 2]], c[[0, 2, 3]]])
    uvs = np.stack([_QUAD_UV[[0, 1, 2]], _QUAD_UV[[0, 2, 3]]])
    return tris, uvs


def box_triangles(size, center=(0.0, 0.0, 0.0)) -> tuple[np.ndarray, np.ndarray]:
    """Axis-aligned box as 12 triangles."""
    sx, sy, sz = (s / 2.0 for s in size)
    cx, cy, cz = center
    corners = np.array(
        [[cx + i * sx, cy + j * sy, cz + k * sz] for i in (-1, 1) for j in (-1, 1) for k in (-1, 1)]
    )
    tris, uvs = [], []
    for face in _BOX_FACES:
        t, u = quad_triangles(corners[list(face)])
        tris.append(t)
        uvs.append(u)
    return np.concatenate(tris), np.concatenate(uvs)


@dataclass(frozen=True)
class StaticPart:
    name: str
    triangles: np.ndarray
    uvs: np.ndarray
    albedo: tuple[float, float, float]
    semantic_class: int
    obstacle: bool = True


def _box(name, lo, hi, albedo, cls):
    lo, hi = np.array(lo, float), np.array(hi, float)
    tris, uvs = box_triangles(hi - lo, (lo + hi) / 2.0)
    return StaticPart(name, tris, uvs, albedo, cls)


def _ground(center, half, albedo=(128.0, 126.0, 120.0)):
    cx, cy = center
    corners = [
        (cx - half, cy - half, 0.0),
        (cx + half, cy - half, 0.0),
        (cx + half, cy + half, 0.0),
        (cx - half, cy + half, 0.0),
    ]
    tris, uvs = quad_triangles(corners)
    return StaticPart("ground", tris, uvs, albedo, GROUND, obstacle=False)


def plaza() -> list[StaticPart]:
    """Open square with a few pillars, a kiosk and a distant building."""
    return [
        _ground((-91.0, 160.0), 300.0),
        _box("pillar_a", (-80.3, 147.7, 0.0), (-79.7, 148.3, 3.0), (190.0, 185.0, 170.0), PROP),
        _box("pillar_b", (-80.3, 171.7, 0.0), (-79.7, 172.3, 3.0), (190.0, 185.0, 170.0), PROP),
        _box("pillar_c", (-68.3, 159.7, 0.0), (-67.7, 160.3, 3.0), (190.0, 185.0, 170.0), PROP),
        _box("kiosk", (-76.0, 136.0, 0.0), (-73.0, 139.0, 2.5), (170.0, 60.0, 50.0), BUILDING),
        _box("hall", (-60.0, 196.0, 0.0), (-30.0, 212.0, 14.0), (160.0, 150.0, 135.0), BUILDING),
    ]


def street_wall() -> list[StaticPart]:
    """Street with a long wall facing -x, suitable for mounting patches."""
    return [
        _ground((-91.0, 160.0), 300.0, albedo=(105.0, 105.0, 108.0)),
        _box("sidewalk", (-84.0, 120.0, 0.0), (-81.0, 200.0, 0.15), (150.0, 148.0, 140.0), PROP),
        _box("wall", (-81.0, 120.0, 0.0), (-80.5, 200.0, 4.0), (175.0, 160.0, 140.0), WALL),
        _box("block_a", (-70.0, 120.0, 0.0), (-55.0, 150.0, 18.0), (140.0, 130.0, 125.0), BUILDING),
        _box("block_b", (-70.0, 165.0, 0.0), (-55.0, 200.0, 24.0), (120.0, 125.0, 140.0), BUILDING),
        _box("pole", (-100.2, 140.8, 0.0), (-99.8, 141.2, 5.0), (80.0, 80.0, 85.0), PROP),
    ]


def gray_studio() -> list[StaticPart]:
    """Neutral gray floor and a tall backdrop facing -x; nothing saturated in view."""
    return [
        _ground((-91.0, 160.0), 300.0, albedo=(118.0, 118.0, 118.0)),
        _box("backdrop", (-80.0, 100.0, 0.0), (-79.5, 220.0, 30.0), (140.0, 140.0, 140.0), WALL),
    ]


LAYOUT_BUILDERS = {"plaza": plaza, "street_wall": street_wall, "gray_studio": gray_studio}
LAYOUT_ALIASES = {"Town10HD": "plaza", "Town01": "street_wall"}
LAYOUTS = tuple(sorted(LAYOUT_BUILDERS) + sorted(LAYOUT_ALIASES))


def resolve_layout(name: str) -> list[StaticPart]:
    key = LAYOUT_ALIASES.get(name, name)
    if key not in LAYOUT_BUILDERS:
        raise KeyError(f"unknown townmap {name!r}; available: {', '.join(LAYOUTS)}")
    return LAYOUT_BUILDERS[key]()


@dataclass(frozen=True)
class ActorAsset:
    name: str
    size: tuple[float, float, float]
    albedo: tuple[float, float, float]
    semantic_class: int


_WALKER_COLORS = [
    (200, 60, 50), (50, 90, 190), (230, 200, 60), (60, 150, 80),
    (150, 80, 170), (230, 130, 40), (40, 170, 180), (120, 70, 40),
    (220, 220, 220), (40, 40, 45), (200, 110, 150), (110, 130, 60),
]


class AssetLibrary:
    """Name-addressable actor assets with glob lookup (``walker.pedestrian.*``)."""

    def __init__(self, assets: list[ActorAsset] | None = None):
        if assets is None:
            assets = [
                ActorAsset(f"walker.pedestrian.{i + 1:04d}", WALKER_SIZE, tuple(map(float, c)), PEDESTRIAN)
                for i, c in enumerate(_WALKER_COLORS)
            ]
            assets += [
                ActorAsset("vehicle.generic.sedan", (4.5, 1.8, 1.5), (180.0, 30.0, 30.0), VEHICLE),
                ActorAsset("vehicle.generic.van", (5.2, 2.0, 2.1), (220.0, 220.0, 225.0), VEHICLE),
            ]
        self._assets = {a.name: a for a in assets}

    def names(self) -> list[str]:
        return sorted(self._assets)

    def match(self, pattern: str) -> list[ActorAsset]:
        return [self._assets[n] for n in self.names() if fnmatch.fnmatchcase(n, pattern)]

    def __getitem__(self, name: str) -> ActorAsset:
        return self._assets[name]
