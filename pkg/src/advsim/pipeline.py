"""Run orchestration: generate, annotate, patch and eval over on-disk runs.

A run directory holds one sub-directory per sensor (``<index>_<kind>``),
``manifest.json`` and, once annotated, ``annotations/``. Every emitted file
is listed in the manifest with its sha256, so two runs are compared by
comparing manifests. Wall-clock timing goes to ``run.log``, never into JSON.
"""

from __future__ import annotations

import inspect
import json
import logging
import os
import re
import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import assets as A
from . import constants as C
from .annotator import detections_from_instance, export_kwcoco, export_mots_png, export_mots_text
from .annotator.kwcoco import RunMetadata, VideoInfo
from .config import (
    ConfigError,
    Diagnostic,
    ScenarioConfig,
    WeatherConfig,
    load_scenario,
    parse_scenario,
    scenario_to_dict,
    validate,
)
from .defense import (
    DefenseError,
    ablation_rate,
    anomalous_color_mask,
    build_background,
    color_stats,
    high_frequency_mask,
    hue_saturation_mask,
    localization_score,
)
from .imageio import read_png, sha256_file, write_bytes, write_png
from .patcher import (
    PatchError,
    composite_color_corrected,
    composite_digital,
    estimate_color_transform,
    locate_in_instances,
)
from .renderer import decode_instance, derive_light_model, render
from .renderer.codecs import encode_depth, encode_depth_mm, encode_instance
from .scene import Scene, build_scene, set_patch_texture, step
from .sensor_rig import SensorTrack, intrinsics, pose_at

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
RUN_FORMAT = "advsim-run/1"
PATCH_METHODS = ("digital", "corrected", "rendered")
ANNOTATION_FORMATS = ("kwcoco", "mots")
EXPERIMENTS = ("ablation", "masks")
OUTPUT_ROOT_ENV = "ADVSIM_OUTPUT_ROOT"

_PRIMARY_PLANE = {"rgb": "rgb", "depth": "depth", "instance_segmentation": "instance"}
_COMPANION_SUFFIX = {"depth": "_depth", "depth16": "_depth16", "instance": "_instance"}


class RunError(RuntimeError):
    """Runtime failure while producing or reading a run (exit code 3)."""


class ValidationFailed(ConfigError):
    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics))


def json_bytes(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode("utf-8")


# -- manifest ------------------------------------------------------------------


@dataclass
class RunManifest:
    path: Path
    data: dict

    @classmethod
    def load(cls, run_dir) -> "RunManifest":
        run_dir = Path(run_dir)
        f = run_dir / MANIFEST
        if not f.is_file():
            raise RunError(f"{run_dir} is not a run directory (no {MANIFEST})")
        data = json.loads(f.read_text(encoding="utf-8"))
        if data.get("format") != RUN_FORMAT:
            raise RunError(f"{f}: unsupported manifest format {data.get('format')!r}")
        return cls(run_dir, data)

    def save(self) -> None:
        (self.path / MANIFEST).write_bytes(json_bytes(self.data))

    @property
    def files(self) -> dict[str, str]:
        return self.data["files"]

    @property
    def sensors(self) -> list[dict]:
        return self.data["sensors"]

    @property
    def frame_count(self) -> int:
        return int(self.data["frame_count"])

    def sha256(self) -> str:
        return sha256_file(self.path / MANIFEST)

    def config(self) -> ScenarioConfig:
        return parse_scenario(yaml.safe_dump(self.data["config"], sort_keys=False))

    def sensor(self, selector=None) -> dict:
        """Sensor entry by index or directory name; default is the first RGB sensor."""
        if selector is None:
            for s in self.sensors:
                if "rgb" in s["planes"]:
                    return s
            raise RunError(f"{self.path}: run has no RGB sensor")
        for s in self.sensors:
            if str(s["index"]) == str(selector) or s["dir"] == selector:
                return s
        raise RunError(f"{self.path}: no sensor {selector!r}")

    def plane_path(self, sensor: dict, plane: str, frame: int) -> Path:
        if plane not in sensor["planes"]:
            raise RunError(f"sensor {sensor['dir']} has no {plane} plane")
        return self.path / (sensor["planes"][plane] % frame)

    def verify(self) -> list[str]:
        """Relative paths whose content no longer matches the recorded hash."""
        bad = []
        for rel, digest in sorted(self.files.items()):
            p = self.path / rel
            if not p.is_file() or sha256_file(p) != digest:
                bad.append(rel)
        return bad


def sensor_planes(index: int, kind: str) -> dict[str, str]:
    """Relative file pattern per plane; the sensor's own modality is ``frame_%06d.png``."""
    d = f"{index}_{kind}"
    planes = {}
    primary = _PRIMARY_PLANE[kind]
    if kind == "rgb":
        planes["rgb"] = f"{d}/frame_%06d.png"
    for plane, suffix in _COMPANION_SUFFIX.items():
        planes[plane] = f"{d}/frame_%06d.png" if plane == primary else f"{d}/frame_%06d{suffix}.png"
    return planes


# -- textures -------------------------------------------------------------------

_FRAME_RE = re.compile(r"^frame_(\d{6})\.png$")


class TextureSource:
    """A patch image, or a directory of ``frame_%06d.png`` streamed per frame.

    Frames without a file hold the most recent earlier one; frames before
    the first file use the first.
    """

    def __init__(self, path):
        self.path = Path(path)
        if self.path.is_dir():
            found = sorted(
                (int(m.group(1)), self.path / n)
                for n in os.listdir(self.path)
                if (m := _FRAME_RE.match(n))
            )
            if not found:
                raise RunError(f"{self.path}: no frame_%06d.png textures")
            self._frames = found
        elif self.path.is_file():
            self._frames = [(0, self.path)]
        else:
            raise RunError(f"patch texture {self.path} does not exist")
        self._cache: dict[Path, np.ndarray] = {}

    @property
    def frames(self) -> list[tuple[int, Path]]:
        return list(self._frames)

    def file_for(self, frame: int) -> Path:
        chosen = self._frames[0][1]
        for idx, p in self._frames:
            if idx > frame:
                break
            chosen = p
        return chosen

    def at(self, frame: int) -> np.ndarray:
        p = self.file_for(frame)
        if p not in self._cache:
            img = read_png(p)
            if img.ndim != 3:
                raise RunError(f"{p}: patch textures must be RGB")
            self._cache[p] = img
        return self._cache[p]

    def digests(self) -> dict[str, str]:
        return {p.name: sha256_file(p) for _, p in self._frames}


# -- frame loop -------------------------------------------------------------------


def load_config(config) -> tuple[ScenarioConfig, Path]:
    """Accept a path or a parsed config; returns it with the directory textures resolve against."""
    if isinstance(config, ScenarioConfig):
        return config, Path.cwd()
    path = Path(config)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    return load_scenario(path), path.parent


def check_config(config: ScenarioConfig) -> None:
    diags = validate(config)
    if diags:
        raise ValidationFailed(diags)


def _config_textures(scene: Scene, config: ScenarioConfig, base_dir: Path) -> dict[int, TextureSource]:
    out = {}
    for ph, spec in zip(scene.placeholders, config.patches):
        if spec.texture is not None:
            p = Path(spec.texture)
            out[ph.instance_id] = TextureSource(p if p.is_absolute() else base_dir / p)
    return out


def _bundle_textures(config: ScenarioConfig, base_dir: Path, out: Path) -> tuple[ScenarioConfig, dict[str, str]]:
    """Copy config textures into ``<out>/textures/`` so the run resolves them on its own.

    Returns the config with texture paths rewritten relative to ``out`` and
    the copied files with their hashes.
    """
    files = {}
    patches = []
    for k, spec in enumerate(config.patches):
        if spec.texture is not None:
            p = Path(spec.texture)
            src = TextureSource(p if p.is_absolute() else base_dir / p)
            dest = f"textures/patch{k}"
            for _, f in src.frames:
                rel = f"{dest}/{f.name}"
                files[rel] = write_bytes(out / rel, f.read_bytes())
            spec = replace(spec, texture=dest if src.path.is_dir() else f"{dest}/{src.path.name}")
        patches.append(spec)
    return replace(config, patches=tuple(patches)), files


def _without_texture(config: ScenarioConfig, index: int) -> ScenarioConfig:
    patches = list(config.patches)
    patches[index] = replace(patches[index], texture=None)
    return replace(config, patches=tuple(patches))


def iterate_frames(config: ScenarioConfig, base_dir: Path = Path("."), textures=None):
    """Yield ``(frame, scene, sensors)`` where sensors lists ``(index, spec, pose, K)``.

    The world advances one tick before each frame, so frame ``i`` shows the
    scene after ``i + 1`` ticks.
    """
    scene = build_scene(config)
    streams = _config_textures(scene, config, base_dir)
    streams.update(textures or {})
    specs = config.sensors
    tracks = [SensorTrack.from_spec(s, i, config.sim.seed) for i, s in enumerate(specs)]
    Ks = [intrinsics(s) for s in specs]
    for i in range(config.sim.max_frames):
        scene = step(scene)
        for pid, src in streams.items():
            scene = set_patch_texture(scene, pid, src.at(i))
        sensors = [(k, specs[k], pose_at(tracks[k], i, scene, config.sim.fps), Ks[k]) for k in range(len(specs))]
        yield i, scene, sensors


def apply_overrides(config: ScenarioConfig, seed=None, max_frames=None, weather: WeatherConfig | None = None):
    sim = config.sim
    if seed is not None:
        sim = replace(sim, seed=int(seed))
    if max_frames is not None:
        if int(max_frames) < 1:
            raise ConfigError("max_frames must be >= 1", "max_frames")
        sim = replace(sim, max_frames=int(max_frames))
    return replace(config, sim=sim, weather=weather if weather is not None else config.weather)


def default_output_dir(config: ScenarioConfig) -> Path:
    root = os.environ.get(OUTPUT_ROOT_ENV)
    return Path(root) / config.sim.output_dir if root else Path(config.sim.output_dir)


def _prepare_out(out: Path, overwrite: bool) -> Path:
    out = Path(out)
    if out.exists() and any(out.iterdir()):
        if not overwrite:
            raise RunError(f"output directory {out} is not empty (use overwrite)")
        if not (out / MANIFEST).is_file():
            raise RunError(f"refusing to overwrite {out}: it is not a run directory")
        shutil.rmtree(out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_bytes(b"")
        probe.unlink()
    except OSError as exc:
        raise RunError(f"output directory {out} is not writable: {exc}") from None
    return out


def _sensor_entries(config: ScenarioConfig) -> list[dict]:
    out = []
    for i, s in enumerate(config.sensors):
        out.append(
            {
                "index": i,
                "blueprint": s.blueprint_name,
                "kind": s.kind,
                "dir": f"{i}_{s.kind}",
                "width": s.image_size_x,
                "height": s.image_size_y,
                "fov": s.fov,
                "placement": s.placement,
                "planes": sensor_planes(i, s.kind),
            }
        )
    return out


def _scene_entries(scene: Scene) -> tuple[list[dict], list[dict]]:
    instances = [
        {"id": m.instance_id, "class": m.semantic_class, "class_name": A.CLASS_NAMES[m.semantic_class], "name": m.name}
        for m in sorted(scene.meshes(), key=lambda m: m.instance_id)
    ]
    actors = [
        {
            "id": a.instance_id,
            "role_name": a.role_name,
            "blueprint": a.blueprint_name,
            "ticks": a.steps,
            "arrived": a.arrived,
            "distance_travelled": a.distance_travelled(),
        }
        for a in scene.actors
    ]
    return instances, actors


def _base_manifest(config: ScenarioConfig, light, sensors, frame_count) -> dict:
    return {
        "format": RUN_FORMAT,
        "tool": {"name": "advsim", "version": __version__},
        "seed": config.sim.seed,
        "frame_count": frame_count,
        "config": scenario_to_dict(config),
        "weather": asdict(config.weather),
        "light_model": asdict(light),
        "constants": C.as_dict(),
        "sensors": sensors,
        "layout": {"townmap": config.sim.townmap, "resolved": A.LAYOUT_ALIASES.get(config.sim.townmap, config.sim.townmap)},
        "log": "run.log",
        "references": {},
        "patch": None,
        "annotations": {},
    }


def _write_log(out: Path, lines: list[str]) -> None:
    (out / "run.log").write_text("\n".join(lines) + "\n", encoding="utf-8")


def generate(
    config,
    out=None,
    *,
    seed=None,
    max_frames=None,
    weather: WeatherConfig | None = None,
    workers: int = 1,
    textures: dict | None = None,
    overwrite: bool = False,
    patch_info: dict | None = None,
    base_dir=None,
) -> RunManifest:
    """Render every sensor for every frame and write the run directory.

    Co-located sensors with identical intrinsics share one render. ``workers``
    threads split each frame into row blocks and write PNGs concurrently;
    output bytes do not depend on it. Relative texture paths resolve against
    the config file's directory, or ``base_dir`` for an in-memory config.
    """
    started = time.perf_counter()
    cfg, default_dir = load_config(config)
    base_dir = Path(base_dir) if base_dir is not None else default_dir
    cfg = apply_overrides(cfg, seed, max_frames, weather)
    check_config(cfg)
    out = _prepare_out(Path(out) if out is not None else default_output_dir(cfg), overwrite)
    workers = max(1, int(workers))

    light = derive_light_model(cfg.weather)
    sensors = _sensor_entries(cfg)
    snapshot, files = _bundle_textures(cfg, base_dir, out)
    clamped = {"depth_clamped": 0}
    scene = None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        pending = {}
        for i, scene, posed in iterate_frames(cfg, base_dir, textures):
            cache = {}
            for k, spec, pose, K in posed:
                key = (pose, K)
                if key not in cache:
                    cache[key] = render(scene, pose, K, light, sensor_index=k, row_blocks=workers, workers=workers)
                b = cache[key]
                planes = {
                    "rgb": lambda b=b: b.rgb,
                    "depth": lambda b=b: encode_depth(b.depth_m, clamped),
                    "depth16": lambda b=b: encode_depth_mm(b.depth_m),
                    "instance": lambda b=b: encode_instance(b.semantic, b.instance_id),
                }
                for plane, pattern in sensors[k]["planes"].items():
                    rel = pattern % i
                    pending[rel] = pool.submit(write_png, out / rel, planes[plane]())
            if len(pending) > 64 * workers:
                files.update({rel: f.result() for rel, f in pending.items()})
                pending = {}
        files.update({rel: f.result() for rel, f in pending.items()})

    data = _base_manifest(snapshot, light, sensors, cfg.sim.max_frames)
    data["instances"], data["actors"] = _scene_entries(scene)
    data["stats"] = dict(clamped)
    if patch_info is not None:
        data["patch"] = patch_info
    data["files"] = dict(sorted(files.items()))
    manifest = RunManifest(out, data)
    manifest.save()
    _write_log(out, [f"generate frames={cfg.sim.max_frames} sensors={len(sensors)} workers={workers}",
                     f"wall_clock_s={time.perf_counter() - started:.3f}"])
    return manifest


# -- annotate ---------------------------------------------------------------------


def _load_instance(path: Path) -> tuple[np.ndarray, np.ndarray]:
    return decode_instance(read_png(path))


def annotate(run_dir, formats=ANNOTATION_FORMATS, min_pixels: int = 10) -> list[Path]:
    """Export detections from a run's instance planes as kwcoco and/or MOTS."""
    formats = [formats] if isinstance(formats, str) else list(formats)
    for f in formats:
        if f not in ANNOTATION_FORMATS:
            raise ValueError(f"unknown annotation format {f!r}; expected one of {ANNOTATION_FORMATS}")
    m = RunManifest.load(run_dir)
    if not m.sensors or m.frame_count < 1:
        raise RunError(f"{m.path}: run has no frames to annotate")

    written = []
    ann = m.data.setdefault("annotations", {})
    dets = {s["index"]: [] for s in m.sensors}
    mots_dir = {s["index"]: f"annotations/mots/{s['dir']}" for s in m.sensors}
    for i in range(m.frame_count):
        cache: dict[str, tuple] = {}  # co-located sensors usually share identical planes
        for s in m.sensors:
            p = m.plane_path(s, "instance", i)
            if not p.is_file():
                raise RunError(f"missing instance plane {p}")
            digest = sha256_file(p)
            if digest not in cache:
                sem, ids = _load_instance(p)
                mots_png = export_mots_png(ids, sem) if "mots" in formats else None
                cache[digest] = (detections_from_instance(ids, sem, min_pixels), mots_png)
            frame_dets, mots_png = cache[digest]
            dets[s["index"]] += [replace(d, frame_index=i, sensor_index=s["index"]) for d in frame_dets]
            if mots_png is not None:
                rel = f"{mots_dir[s['index']]}/{i:06d}.png"
                m.files[rel] = write_png(m.path / rel, mots_png)

    if "kwcoco" in formats:
        videos = [
            VideoInfo(s["index"], s["dir"], s["width"], s["height"],
                      tuple(s["planes"][_PRIMARY_PLANE[s["kind"]]] % i for i in range(m.frame_count)))
            for s in m.sensors
        ]
        doc = export_kwcoco([d for s in m.sensors for d in dets[s["index"]]],
                            RunMetadata(videos, {"version": __version__}))
        rel = "annotations/kwcoco.json"
        m.files[rel] = write_bytes(m.path / rel, json_bytes(doc))
        ann["kwcoco"] = rel
        written.append(m.path / rel)
    if "mots" in formats:
        mots = {}
        for s in m.sensors:
            d = mots_dir[s["index"]]
            rel = f"{d}/instances.txt"
            text = "".join(line + "\n" for line in export_mots_text(dets[s["index"]]))
            m.files[rel] = write_bytes(m.path / rel, text.encode())
            mots[s["dir"]] = {"png": f"{d}/%06d.png", "text": rel}
            written.append(m.path / d)
        ann["mots"] = mots
    m.data["files"] = dict(sorted(m.files.items()))
    m.save()
    return written


# -- patch --------------------------------------------------------------------------


def resolve_placeholder(scene: Scene, placeholder) -> int:
    if not scene.placeholders:
        raise RunError("scenario has no patch placeholders")
    if placeholder is None:
        return scene.placeholders[0].instance_id
    for p in scene.placeholders:
        if str(p.instance_id) == str(placeholder) or p.name == placeholder:
            return p.instance_id
    raise RunError(f"unknown placeholder {placeholder!r}")


def patch(
    base,
    method: str,
    patch_path,
    out,
    *,
    placeholder=None,
    workers: int = 1,
    overwrite: bool = False,
) -> RunManifest:
    """Insert a patch into a run.

    ``rendered`` re-renders the scenario with the patch streamed onto the
    placeholder. ``digital`` and ``corrected`` paste into the base run's RGB
    frames; the new run references the base run's depth and instance files
    instead of copying them. ``base`` is a run directory or a config path
    (a base run is then generated into ``<out>/base``).
    """
    if method not in PATCH_METHODS:
        raise ValueError(f"unknown patch method {method!r}; expected one of {PATCH_METHODS}")
    texture = TextureSource(patch_path)
    out = Path(out)
    base = Path(base)
    is_run = base.is_dir() and (base / MANIFEST).is_file()

    if method == "rendered":
        if is_run:
            bm = RunManifest.load(base)
            cfg, base_dir, seed, frames = bm.config(), base, bm.data["seed"], bm.frame_count
        else:
            (cfg, base_dir), seed, frames = load_config(base), None, None
        pid = resolve_placeholder(build_scene(apply_overrides(cfg, seed, frames)), placeholder)
        info = {"method": method, "placeholder_id": pid, "texture": texture.digests()}
        return generate(cfg, out, seed=seed, max_frames=frames, workers=workers, overwrite=overwrite,
                        textures={pid: texture}, patch_info=info, base_dir=base_dir)

    if not is_run:
        cfg, base_dir = load_config(base)
        scene0 = build_scene(cfg)
        pid = resolve_placeholder(scene0, placeholder)
        k = [p.instance_id for p in scene0.placeholders].index(pid)
        _prepare_out(out, overwrite)
        generate(_without_texture(cfg, k), out / "base", workers=workers, base_dir=base_dir)
        base = out / "base"
        overwrite = True
        bm = RunManifest.load(base)
        out.mkdir(parents=True, exist_ok=True)
    else:
        bm = RunManifest.load(base)
    if bm.data.get("patch"):
        raise RunError(f"{base} is already a patch run")
    cfg = bm.config()
    scene0 = build_scene(cfg)
    pid = resolve_placeholder(scene0, placeholder)
    k = [p.instance_id for p in scene0.placeholders].index(pid)
    if cfg.patches[k].texture is not None:
        raise RunError(f"placeholder {pid} is textured in {base}; {method} needs a run with the green placeholder")
    if is_run:
        out = _prepare_out(out, overwrite)
    ref = os.path.relpath(bm.path.resolve(), out.resolve()).replace(os.sep, "/")

    sensors = []
    for s in bm.sensors:
        entry = dict(s)
        entry["planes"] = {p: (pat if p == "rgb" else f"{ref}/{pat}") for p, pat in s["planes"].items()}
        sensors.append(entry)

    files = {}
    skipped = fallback = 0
    for i, scene, posed in iterate_frames(cfg, bm.path):
        for k, spec, pose, K in posed:
            s = bm.sensors[k]
            if "rgb" not in s["planes"]:
                continue
            rgb = read_png(bm.plane_path(s, "rgb", i))
            _, ids = _load_instance(bm.plane_path(s, "instance", i))
            try:
                placement = locate_in_instances(ids, scene, pid, pose, K)
            except PatchError:
                skipped += 1
                result = rgb
            else:
                tex = texture.at(i)
                if method == "digital":
                    result = composite_digital(rgb, tex, placement)
                else:
                    try:
                        transform = estimate_color_transform(rgb, ids == pid)
                    except PatchError:
                        fallback += 1
                        result = composite_digital(rgb, tex, placement)
                    else:
                        result = composite_color_corrected(rgb, tex, placement, transform)
            rel = s["planes"]["rgb"] % i
            files[rel] = write_png(out / rel, result)

    data = _base_manifest(cfg, derive_light_model(cfg.weather), sensors, bm.frame_count)
    data["instances"] = bm.data["instances"]
    data["actors"] = bm.data["actors"]
    data["stats"] = {"frames_placeholder_hidden": skipped, "frames_corrected_fallback": fallback}
    data["patch"] = {"method": method, "placeholder_id": pid, "texture": texture.digests()}
    data["references"] = {"base": ref, "base_manifest_sha256": bm.sha256()}
    data["files"] = dict(sorted(files.items()))
    manifest = RunManifest(out, data)
    manifest.save()
    _write_log(out, [f"patch method={method} base={ref}"])
    return manifest


# -- eval -----------------------------------------------------------------------------


def _patch_gt(m: RunManifest, sensor: dict, frame: int, placeholder=None) -> np.ndarray:
    sem, ids = _load_instance(m.plane_path(sensor, "instance", frame))
    if placeholder is not None:
        return ids == int(placeholder)
    return sem == A.PATCH


def _frames(m: RunManifest, sensor: dict, limit=None) -> range:
    n = m.frame_count if limit is None else min(int(limit), m.frame_count)
    return range(n)


def eval_ablation(runs: list[RunManifest], tolerance: int = 8, sensor=None, placeholder=None, frames=None) -> dict:
    rows = []
    for m in runs:
        s = m.sensor(sensor)
        idx = _frames(m, s, frames)
        rgb = [read_png(m.plane_path(s, "rgb", i)) for i in idx]
        gt = [_patch_gt(m, s, i, placeholder) for i in idx]
        total = int(sum(g.sum() for g in gt))
        if total == 0:
            raise DefenseError(f"{m.path}: no ground-truth patch pixels in sensor {s['dir']}")
        model = build_background(rgb, tolerance=int(tolerance))
        rows.append(
            {
                "run": m.path.name,
                "sensor": s["dir"],
                "frames": len(idx),
                "patch_pixels": total,
                "ablation_rate": ablation_rate(rgb, gt, model),
            }
        )
    return {"experiment": "ablation", "tolerance": int(tolerance), "runs": rows}


def eval_masks(
    runs: list[RunManifest],
    frame: int = 0,
    sensor=None,
    placeholder=None,
    benign: list[RunManifest] | None = None,
    bins: int = 16,
    percentile: float = 0.5,
    hf_threshold: float = 24 / 255,
    s_min: float = 0.7,
    v_min: float = 0.5,
    stats_frames=None,
) -> dict:
    """Localization quality of the three constraint masks on one frame per run.

    Colour statistics come from ``benign`` runs when given, otherwise from
    the run's own frames with the patch pixels left out.
    """
    rows = []
    for m in runs:
        s = m.sensor(sensor)
        rgb = read_png(m.plane_path(s, "rgb", int(frame)))
        gt = _patch_gt(m, s, int(frame), placeholder)
        if not gt.any():
            raise DefenseError(f"{m.path}: frame {frame} has no ground-truth patch pixels")
        if benign:
            src = [(b, b.sensor(sensor)) for b in benign]
            stats = color_stats(
                [read_png(b.plane_path(bs, "rgb", i)) for b, bs in src for i in _frames(b, bs, stats_frames)],
                bins, percentile,
            )
        else:
            idx = _frames(m, s, stats_frames)
            stats = color_stats(
                [read_png(m.plane_path(s, "rgb", i)) for i in idx], bins, percentile,
                exclude=[_patch_gt(m, s, i, placeholder) for i in idx],
            )
        masks = {
            "anomalous_color": anomalous_color_mask(rgb, stats, gt),
            "high_frequency": high_frequency_mask(rgb, hf_threshold, gt),
            "hue_saturation": hue_saturation_mask(rgb, s_min, v_min, gt),
        }
        for name, rep in masks.items():
            p, r, iou = localization_score(rep.mask, gt)
            rows.append(
                {
                    "run": m.path.name,
                    "width": int(rgb.shape[1]),
                    "height": int(rgb.shape[0]),
                    "mask": name,
                    "precision": p,
                    "recall": r,
                    "iou": iou,
                    "coverage": rep.coverage,
                }
            )
    report = {"experiment": "masks", "frame": int(frame), "table": rows}
    if len(runs) > 1:
        first = {r["mask"]: r["precision"] for r in rows if r["run"] == runs[0].path.name}
        report["precision_drop"] = [
            {"run": r["run"], "mask": r["mask"], "drop": first[r["mask"]] - r["precision"]}
            for r in rows
            if r["run"] != runs[0].path.name
        ]
    return report


def evaluate(run_dirs, experiment: str, params: dict | None = None) -> dict:
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}; expected one of {EXPERIMENTS}")
    params = dict(params or {})
    runs = [RunManifest.load(d) for d in run_dirs]
    if not runs:
        raise RunError("no runs given")
    fn = eval_ablation if experiment == "ablation" else eval_masks
    known = set(inspect.signature(fn).parameters) - {"runs"}
    unknown = sorted(set(params) - known)
    if unknown:
        raise ConfigError(f"unknown {experiment} parameter(s) {unknown}; expected some of {sorted(known)}")
    if experiment == "ablation":
        return eval_ablation(runs, **params)
    if "benign" in params and params["benign"] is not None:
        b = params["benign"]
        params["benign"] = [RunManifest.load(x) for x in ([b] if isinstance(b, (str, Path)) else b)]
    return eval_masks(runs, **params)
