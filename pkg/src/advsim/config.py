"""Scenario YAML parsing and validation.

The accepted schema is the CARLA data-saver format (``carla:``, ``output_dir``,
``max_frames``, ``weather:``, ``spawn_actors:``) plus two optional
extensions: a per-sensor ``motion:`` block and a top-level ``patches:`` list.
See ``docs/config.md`` for the full reference.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, fields
from typing import Any

import yaml

from .transforms import Transform

log = logging.getLogger(__name__)

SENSOR_BLUEPRINTS = (
    "sensor.camera.rgb",
    "sensor.camera.depth",
    "sensor.camera.instance_segmentation",
)
ACTOR_PREFIXES = ("walker.", "vehicle.")
IGNORED_CARLA_KEYS = ("host", "port", "timeout", "traffic_manager_port", "retry")
DEFAULT_WALKER_SPEED = 1.4
DEFAULT_TOWNMAP = "plaza"


class ConfigError(ValueError):
    """Base class for scenario configuration errors."""

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class ConfigSyntaxError(ConfigError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line, self.column = line, column
        where = f"line {line}, column {column}" if line is not None else "unknown position"
        super().__init__(f"YAML syntax error at {where}: {message}")


class ConfigTypeError(ConfigError):
    pass


class ConstraintViolation(ConfigError):
    pass


class MissingKeyError(ConfigError):
    pass


@dataclass(frozen=True)
class Diagnostic:
    path: str
    message: str

    def __str__(self):
        return f"{self.path}: {self.message}"


@dataclass(frozen=True)
class SimSettings:
    seed: int
    fps: int
    max_frames: int
    townmap: str = DEFAULT_TOWNMAP
    output_dir: str = "_out"


@dataclass(frozen=True)
class WeatherConfig:
    cloudiness: float = 0.0
    precipitation: float = 0.0
    precipitation_deposits: float = 0.0
    wind_intensity: float = 0.0
    sun_azimuth_angle: float = 0.0
    sun_altitude_angle: float = 45.0
    fog_density: float = 0.0
    fog_distance: float = 0.0
    wetness: float = 0.0


PERCENT_FIELDS = (
    "cloudiness",
    "precipitation",
    "precipitation_deposits",
    "wind_intensity",
    "fog_density",
    "wetness",
)
WEATHER_KEYS = tuple(f.name for f in fields(WeatherConfig))


@dataclass(frozen=True)
class LinearMotion:
    destination: Transform
    speed: float


@dataclass(frozen=True)
class RotationMotion:
    axis: str  # pitch | yaw | roll
    amplitude: float  # degrees
    period: int  # frames


@dataclass(frozen=True)
class JitterMotion:
    location_range: tuple[float, float, float] = (0.0, 0.0, 0.0)
    rotation_range: tuple[float, float, float] = (0.0, 0.0, 0.0)  # pitch, yaw, roll


@dataclass(frozen=True)
class MotionSpec:
    linear: LinearMotion | None = None
    rotation: RotationMotion | None = None
    jitter: JitterMotion | None = None


@dataclass(frozen=True)
class ActorSpec:
    blueprint_name: str
    spawn: Transform
    role_name: str = ""
    speed: float = DEFAULT_WALKER_SPEED
    destination: Transform | None = None
    is_invincible: bool = False


@dataclass(frozen=True)
class SensorSpec:
    blueprint_name: str
    transform: Transform
    image_size_x: int = 800
    image_size_y: int = 600
    fov: float = 90.0
    attach_to: str | None = None
    motion: MotionSpec | None = None
    role_name: str = ""

    @property
    def placement(self) -> str:
        return "attached" if self.attach_to else "static"

    @property
    def kind(self) -> str:
        return self.blueprint_name.rsplit(".", 1)[-1]


@dataclass(frozen=True)
class PatchSpec:
    name: str
    transform: Transform
    width: float = 1.0
    height: float = 1.0
    texture: str | None = None


@dataclass(frozen=True)
class ScenarioConfig:
    sim: SimSettings
    weather: WeatherConfig = WeatherConfig()
    spawn: tuple = ()  # ActorSpec | SensorSpec, in file order
    patches: tuple[PatchSpec, ...] = ()
    warnings: tuple[str, ...] = field(default=(), compare=False)

    @property
    def actors(self) -> list[ActorSpec]:
        return [s for s in self.spawn if isinstance(s, ActorSpec)]

    @property
    def sensors(self) -> list[SensorSpec]:
        return [s for s in self.spawn if isinstance(s, SensorSpec)]


# -- low level field readers -------------------------------------------------


class _Reader:
    """Collects warnings while walking the raw YAML tree."""

    def __init__(self):
        self.warnings: list[str] = []

    def warn(self, path: str, message: str):
        msg = f"{path}: {message}" if path else message
        log.warning(msg)
        self.warnings.append(msg)

    def mapping(self, value, path: str) -> dict:
        if value is None:
            return {}
        if not isinstance(value, dict):
            raise ConfigTypeError(f"expected a mapping, got {type(value).__name__}", path)
        return value

    def check_keys(self, mapping: dict, allowed, path: str):
        for key in mapping:
            if key not in allowed:
                self.warn(_join(path, str(key)), "unknown key ignored")


def _join(path: str, key) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else str(key)


def _number(value, path: str, allow_str: bool = False) -> float:
    if isinstance(value, bool):
        raise ConfigTypeError(f"expected a number, got bool", path)
    if allow_str and isinstance(value, str):
        try:
            value = float(value)
        except ValueError:
            raise ConfigTypeError(f"expected a number, got {value!r}", path) from None
    if not isinstance(value, (int, float)):
        raise ConfigTypeError(f"expected a number, got {type(value).__name__}", path)
    v = float(value)
    if not math.isfinite(v):
        raise ConstraintViolation(f"must be finite, got {v}", path)
    return v


def _integer(value, path: str, allow_str: bool = False) -> int:
    if isinstance(value, int) and not isinstance(value, bool):
        return value  # exact, even beyond 2**53
    if allow_str and isinstance(value, str) and value.strip().lstrip("+-").isdigit():
        return int(value)
    v = _number(value, path, allow_str)
    if v != int(v):
        raise ConfigTypeError(f"expected an integer, got {value!r}", path)
    return int(v)


def _string(value, path: str) -> str:
    if not isinstance(value, str):
        raise ConfigTypeError(f"expected a string, got {type(value).__name__}", path)
    return value


def _boolean(value, path: str) -> bool:
    if isinstance(value, bool):
        return value
    if isinstance(value, str) and value.lower() in ("true", "false"):
        return value.lower() == "true"
    raise ConfigTypeError(f"expected a boolean, got {value!r}", path)


def _require(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise MissingKeyError("missing required key", _join(path, key))
    return mapping[key]


def _positive(v: float, path: str):
    if v <= 0:
        raise ConstraintViolation(f"must be > 0, got {v}", path)


# -- section parsers ---------------------------------------------------------


def _parse_transform(r: _Reader, raw, path: str) -> Transform:
    m = r.mapping(raw, path)
    r.check_keys(m, ("location", "rotation"), path)
    loc = r.mapping(m.get("location"), _join(path, "location"))
    rot = r.mapping(m.get("rotation"), _join(path, "rotation"))
    r.check_keys(loc, ("x", "y", "z"), _join(path, "location"))
    r.check_keys(rot, ("pitch", "yaw", "roll"), _join(path, "rotation"))
    xyz = tuple(_number(loc.get(k, 0.0), _join(_join(path, "location"), k)) for k in "xyz")
    pyr = tuple(
        _number(rot.get(k, 0.0), _join(_join(path, "rotation"), k)) for k in ("pitch", "yaw", "roll")
    )
    return Transform(xyz, pyr)


def _parse_sim(r: _Reader, doc: dict) -> SimSettings:
    carla = r.mapping(doc.get("carla"), "carla")
    r.check_keys(carla, ("sync", "seed", "townmap") + IGNORED_CARLA_KEYS, "carla")
    for key in IGNORED_CARLA_KEYS:
        if key in carla:
            r.warn(_join("carla", key), "simulator runs in-process; key ignored")
    sync = r.mapping(_require(carla, "sync", "carla"), "carla.sync")
    r.check_keys(sync, ("fps", "timeout"), "carla.sync")
    if "timeout" in sync:
        r.warn("carla.sync.timeout", "simulator runs in-process; key ignored")
    fps = _integer(_require(sync, "fps", "carla.sync"), "carla.sync.fps")
    if fps < 1:
        raise ConstraintViolation(f"must be >= 1, got {fps}", "carla.sync.fps")
    seed = _integer(carla.get("seed", 0), "carla.seed")
    if not 0 <= seed < 2**64:
        raise ConstraintViolation("must be an unsigned 64-bit integer", "carla.seed")
    townmap = _string(carla.get("townmap", DEFAULT_TOWNMAP), "carla.townmap")
    max_frames = _integer(_require(doc, "max_frames", ""), "max_frames")
    if max_frames < 1:
        raise ConstraintViolation(f"must be >= 1, got {max_frames}", "max_frames")
    output_dir = _string(doc.get("output_dir", "_out"), "output_dir")
    return SimSettings(seed=seed, fps=fps, max_frames=max_frames, townmap=townmap, output_dir=output_dir)


def _parse_weather(r: _Reader, raw) -> WeatherConfig:
    if raw is None:
        return WeatherConfig()
    m = r.mapping(raw, "weather")
    r.check_keys(m, WEATHER_KEYS, "weather")
    values = {}
    for key in WEATHER_KEYS:
        if key not in m:
            continue
        path = _join("weather", key)
        v = _number(m[key], path)
        if key in PERCENT_FIELDS:
            c = min(100.0, max(0.0, v))
            if c != v:
                r.warn(path, f"clamped {v} to {c}")
            v = c
        elif key == "sun_azimuth_angle" and not -360.0 <= v <= 360.0:
            raise ConstraintViolation(f"must lie in [-360, 360], got {v}", path)
        elif key == "sun_altitude_angle" and not -90.0 <= v <= 90.0:
            raise ConstraintViolation(f"must lie in [-90, 90], got {v}", path)
        elif key == "fog_distance" and v < 0:
            raise ConstraintViolation(f"must be >= 0, got {v}", path)
        values[key] = v
    return WeatherConfig(**values)


def _per_axis(r: _Reader, raw, keys, path: str) -> tuple[float, float, float]:
    if isinstance(raw, (int, float)) and not isinstance(raw, bool):
        v = _number(raw, path)
        out = (v, v, v)
    else:
        m = r.mapping(raw, path)
        r.check_keys(m, keys, path)
        out = tuple(_number(m.get(k, 0.0), _join(path, k)) for k in keys)
    for k, v in zip(keys, out):
        if v < 0:
            raise ConstraintViolation(f"must be >= 0, got {v}", _join(path, k))
    return out


def _parse_motion(r: _Reader, raw, path: str) -> MotionSpec:
    m = r.mapping(raw, path)
    r.check_keys(m, ("linear", "rotation", "jitter"), path)
    linear = rotation = jitter = None
    if m.get("linear") is not None:
        p = _join(path, "linear")
        lm = r.mapping(m["linear"], p)
        r.check_keys(lm, ("destination", "speed"), p)
        dest = _parse_transform(r, _require(lm, "destination", p), _join(p, "destination"))
        speed = _number(_require(lm, "speed", p), _join(p, "speed"))
        _positive(speed, _join(p, "speed"))
        linear = LinearMotion(dest, speed)
    if m.get("rotation") is not None:
        p = _join(path, "rotation")
        rm = r.mapping(m["rotation"], p)
        r.check_keys(rm, ("axis", "amplitude", "period"), p)
        axis = _string(rm.get("axis", "yaw"), _join(p, "axis"))
        if axis not in ("pitch", "yaw", "roll"):
            raise ConstraintViolation(f"must be pitch, yaw or roll, got {axis!r}", _join(p, "axis"))
        amplitude = _number(_require(rm, "amplitude", p), _join(p, "amplitude"))
        if amplitude < 0:
            raise ConstraintViolation(f"must be >= 0, got {amplitude}", _join(p, "amplitude"))
        period = _integer(_require(rm, "period", p), _join(p, "period"))
        if period < 1:
            raise ConstraintViolation(f"must be >= 1, got {period}", _join(p, "period"))
        rotation = RotationMotion(axis, amplitude, period)
    if m.get("jitter") is not None:
        p = _join(path, "jitter")
        jm = r.mapping(m["jitter"], p)
        r.check_keys(jm, ("location_range", "rotation_range"), p)
        jitter = JitterMotion(
            _per_axis(r, jm.get("location_range", 0.0), ("x", "y", "z"), _join(p, "location_range")),
            _per_axis(r, jm.get("rotation_range", 0.0), ("pitch", "yaw", "roll"), _join(p, "rotation_range")),
        )
    if linear is None and rotation is None and jitter is None:
        raise ConstraintViolation("needs at least one of linear, rotation, jitter", path)
    return MotionSpec(linear, rotation, jitter)


def _parse_spawn_entry(r: _Reader, raw, path: str):
    m = r.mapping(raw, path)
    bp_path = _join(path, "blueprint")
    bp = r.mapping(_require(m, "blueprint", path), bp_path)
    name = _string(_require(bp, "name", bp_path), _join(bp_path, "name"))
    attr_path = _join(bp_path, "attr")
    attr = r.mapping(bp.get("attr"), attr_path)
    transform = _parse_transform(r, _require(m, "transform", path), _join(path, "transform"))

    if name.startswith(ACTOR_PREFIXES):
        r.check_keys(m, ("blueprint", "transform", "destination_transform"), path)
        r.check_keys(bp, ("name", "attr", "speed"), bp_path)
        r.check_keys(attr, ("role_name", "is_invincible"), attr_path)
        speed = _number(bp.get("speed", DEFAULT_WALKER_SPEED), _join(bp_path, "speed"))
        _positive(speed, _join(bp_path, "speed"))
        dest = None
        if m.get("destination_transform") is not None:
            dest = _parse_transform(r, m["destination_transform"], _join(path, "destination_transform"))
        return ActorSpec(
            blueprint_name=name,
            spawn=transform,
            role_name=_string(attr.get("role_name", ""), _join(attr_path, "role_name")),
            speed=speed,
            destination=dest,
            is_invincible=_boolean(attr.get("is_invincible", False), _join(attr_path, "is_invincible")),
        )

    if name in SENSOR_BLUEPRINTS:
        r.check_keys(m, ("blueprint", "transform", "attach_to", "motion"), path)
        r.check_keys(bp, ("name", "attr"), bp_path)
        r.check_keys(attr, ("image_size_x", "image_size_y", "fov", "role_name"), attr_path)
        sx = _integer(attr.get("image_size_x", 800), _join(attr_path, "image_size_x"), allow_str=True)
        sy = _integer(attr.get("image_size_y", 600), _join(attr_path, "image_size_y"), allow_str=True)
        for key, v in (("image_size_x", sx), ("image_size_y", sy)):
            if v < 8:
                raise ConstraintViolation(f"must be >= 8, got {v}", _join(attr_path, key))
        fov = _number(attr.get("fov", 90.0), _join(attr_path, "fov"), allow_str=True)
        if not 0.0 < fov < 180.0:
            raise ConstraintViolation(f"must lie in (0, 180), got {fov}", _join(attr_path, "fov"))
        attach_to = m.get("attach_to")
        if attach_to is not None:
            attach_to = _string(attach_to, _join(path, "attach_to"))
        motion = None
        if m.get("motion") is not None:
            motion = _parse_motion(r, m["motion"], _join(path, "motion"))
        return SensorSpec(
            blueprint_name=name,
            transform=transform,
            image_size_x=sx,
            image_size_y=sy,
            fov=fov,
            attach_to=attach_to,
            motion=motion,
            role_name=_string(attr.get("role_name", ""), _join(attr_path, "role_name")),
        )

    raise ConfigTypeError(
        f"unsupported blueprint {name!r}; expected walker.*, vehicle.* or one of {SENSOR_BLUEPRINTS}",
        _join(bp_path, "name"),
    )


def _parse_patch(r: _Reader, raw, index: int) -> PatchSpec:
    path = _join("patches", index)
    m = r.mapping(raw, path)
    r.check_keys(m, ("name", "transform", "size", "texture"), path)
    size = r.mapping(m.get("size"), _join(path, "size"))
    r.check_keys(size, ("width", "height"), _join(path, "size"))
    width = _number(size.get("width", 1.0), _join(path, "size.width"))
    height = _number(size.get("height", 1.0), _join(path, "size.height"))
    _positive(width, _join(path, "size.width"))
    _positive(height, _join(path, "size.height"))
    texture = m.get("texture")
    if texture is not None:
        texture = _string(texture, _join(path, "texture"))
    return PatchSpec(
        name=_string(m.get("name", f"patch{index}"), _join(path, "name")),
        transform=_parse_transform(r, _require(m, "transform", path), _join(path, "transform")),
        width=width,
        height=height,
        texture=texture,
    )


TOP_LEVEL_KEYS = ("carla", "output_dir", "max_frames", "weather", "spawn_actors", "patches")


def parse_scenario(yaml_text: str) -> ScenarioConfig:
    """Parse scenario YAML into a fully defaulted :class:`ScenarioConfig`.

    Raises :class:`ConfigSyntaxError` for malformed YAML and the other
    :class:`ConfigError` subclasses for type, missing-key and range problems;
    the error path names the offending key (``spawn_actors[0].blueprint.speed``).
    Unknown keys are kept out of the result but reported in ``warnings``.
    """
    try:
        doc = yaml.safe_load(yaml_text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ConfigSyntaxError(str(exc.problem), line, col) from None
    except yaml.YAMLError as exc:
        raise ConfigSyntaxError(str(exc)) from None

    r = _Reader()
    doc = r.mapping(doc, "")
    r.check_keys(doc, TOP_LEVEL_KEYS, "")
    sim = _parse_sim(r, doc)
    weather = _parse_weather(r, doc.get("weather"))
    raw_spawn = doc.get("spawn_actors") or []
    if not isinstance(raw_spawn, list):
        raise ConfigTypeError("expected a list", "spawn_actors")
    spawn = tuple(_parse_spawn_entry(r, e, _join("spawn_actors", i)) for i, e in enumerate(raw_spawn))
    raw_patches = doc.get("patches") or []
    if not isinstance(raw_patches, list):
        raise ConfigTypeError("expected a list", "patches")
    patches = tuple(_parse_patch(r, p, i) for i, p in enumerate(raw_patches))
    return ScenarioConfig(sim=sim, weather=weather, spawn=spawn, patches=patches, warnings=tuple(r.warnings))


def parse_weather_block(yaml_text: str) -> WeatherConfig:
    """Parse a standalone weather override: either ``weather: {...}`` or the bare mapping."""
    try:
        doc = yaml.safe_load(yaml_text)
    except yaml.YAMLError as exc:
        raise ConfigSyntaxError(str(exc)) from None
    r = _Reader()
    doc = r.mapping(doc, "")
    if "weather" in doc:
        doc = doc["weather"]
    return _parse_weather(r, doc)


def load_scenario(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


# -- serialization -------------------------------------------------------------


def _motion_dict(m: MotionSpec) -> dict:
    out: dict[str, Any] = {}
    if m.linear:
        out["linear"] = {"destination": m.linear.destination.to_dict(), "speed": m.linear.speed}
    if m.rotation:
        out["rotation"] = {"axis": m.rotation.axis, "amplitude": m.rotation.amplitude, "period": m.rotation.period}
    if m.jitter:
        lx, ly, lz = m.jitter.location_range
        rp, ry, rr = m.jitter.rotation_range
        out["jitter"] = {
            "location_range": {"x": lx, "y": ly, "z": lz},
            "rotation_range": {"pitch": rp, "yaw": ry, "roll": rr},
        }
    return out


def scenario_to_dict(config: ScenarioConfig) -> dict:
    """Normalized plain-data form; ``parse_scenario(yaml.dump(d))`` reproduces ``config``."""
    sim = config.sim
    spawn = []
    for s in config.spawn:
        if isinstance(s, ActorSpec):
            entry = {
                "blueprint": {
                    "name": s.blueprint_name,
                    "attr": {"role_name": s.role_name, "is_invincible": s.is_invincible},
                    "speed": s.speed,
                },
                "transform": s.spawn.to_dict(),
            }
            if s.destination is not None:
                entry["destination_transform"] = s.destination.to_dict()
        else:
            entry = {
                "blueprint": {
                    "name": s.blueprint_name,
                    "attr": {
                        "image_size_x": s.image_size_x,
                        "image_size_y": s.image_size_y,
                        "fov": s.fov,
                        "role_name": s.role_name,
                    },
                },
                "transform": s.transform.to_dict(),
            }
            if s.attach_to is not None:
                entry["attach_to"] = s.attach_to
            if s.motion is not None:
                entry["motion"] = _motion_dict(s.motion)
        spawn.append(entry)
    out = {
        "carla": {"sync": {"fps": sim.fps}, "seed": sim.seed, "townmap": sim.townmap},
        "output_dir": sim.output_dir,
        "max_frames": sim.max_frames,
        "weather": {k: getattr(config.weather, k) for k in WEATHER_KEYS},
        "spawn_actors": spawn,
    }
    if config.patches:
        out["patches"] = [
            {
                "name": p.name,
                "transform": p.transform.to_dict(),
                "size": {"width": p.width, "height": p.height},
                **({"texture": p.texture} if p.texture is not None else {}),
            }
            for p in config.patches
        ]
    return out


def dump_scenario(config: ScenarioConfig) -> str:
    return yaml.safe_dump(scenario_to_dict(config), sort_keys=False)


# -- cross-field validation ------------------------------------------------------


def validate(config: ScenarioConfig, townmaps=None) -> list[Diagnostic]:
    """Cross-field checks; an empty list means the scenario is usable."""
    if townmaps is None:
        from .assets import LAYOUTS

        townmaps = LAYOUTS
    diags = []
    if config.sim.townmap not in townmaps:
        diags.append(Diagnostic("carla.townmap", f"unknown townmap {config.sim.townmap!r}"))
    roles = {a.role_name for a in config.actors if a.role_name}
    seen_roles = set()
    for i, s in enumerate(config.spawn):
        path = f"spawn_actors[{i}]"
        if isinstance(s, ActorSpec):
            if s.role_name and s.role_name in seen_roles:
                diags.append(Diagnostic(f"{path}.blueprint.attr.role_name", f"duplicate role_name {s.role_name!r}"))
            seen_roles.add(s.role_name)
            if s.destination is not None and s.destination.location == s.spawn.location:
                diags.append(Diagnostic(f"{path}.destination_transform", "destination equals spawn location"))
        else:
            if s.attach_to is not None and s.attach_to not in roles:
                diags.append(Diagnostic(f"{path}.attach_to", f"no actor with role_name {s.attach_to!r}"))
            lin = s.motion.linear if s.motion else None
            if lin is not None and lin.destination.location == s.transform.location:
                diags.append(Diagnostic(f"{path}.motion.linear.destination", "destination equals start location"))
    return diags
