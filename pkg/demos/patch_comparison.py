"""Three ways of inserting a patch, scored against the fully rendered one.

The digital paste ignores the scene's light; the colour-corrected paste
borrows it from the green placeholder; the rendered patch is shaded,
shadowed and fogged by the renderer itself.

    python demos/patch_comparison.py [OUT_DIR]
"""

import sys
from dataclasses import replace
from pathlib import Path

from advsim import pipeline as P
from advsim.config import load_scenario, parse_weather_block
from advsim.imageio import read_png
from advsim.patcher import patch_region_distance
from advsim.renderer.codecs import decode_instance
from advsim.scenarios import SCENARIO_DIR

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out") / "patches"
texture = SCENARIO_DIR / "textures" / "noise.png"

# the pasting methods need the plain green placeholder in the base run
scenario = load_scenario(SCENARIO_DIR / "ablation_static.yaml")
scenario = replace(scenario, patches=(replace(scenario.patches[0], texture=None),))

for weather in ("sunny", "foggy"):
    w = parse_weather_block((SCENARIO_DIR / f"weather_{weather}.yaml").read_text())
    base = P.generate(scenario, out / weather / "base", max_frames=5, weather=w, overwrite=True)
    runs = {m: P.patch(base.path, m, texture, out / weather / m, overwrite=True) for m in P.PATCH_METHODS}
    cam = base.sensor()
    frame = 4
    _, ids = decode_instance(read_png(base.plane_path(cam, "instance", frame)))
    region = ids == runs["digital"].data["patch"]["placeholder_id"]
    reference = read_png(runs["rendered"].plane_path(cam, "rgb", frame))
    for m in ("digital", "corrected"):
        d = patch_region_distance(read_png(runs[m].plane_path(cam, "rgb", frame)), reference, region)
        print(f"{weather:>6} {m:>9}: mean distance to rendered patch {d:6.2f}/255")
