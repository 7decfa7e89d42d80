"""Same scenario under sunny, rainy and foggy weather: pixels change, labels do not.

    python demos/weather_sweep.py [OUT_DIR]
"""

import sys
from pathlib import Path

import numpy as np

from advsim import pipeline as P
from advsim.config import parse_weather_block
from advsim.imageio import read_png
from advsim.scenarios import SCENARIO_DIR

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out") / "weather"
runs = {}
for name in ("sunny", "rainy", "foggy"):
    weather = parse_weather_block((SCENARIO_DIR / f"weather_{name}.yaml").read_text())
    runs[name] = P.generate(SCENARIO_DIR / "two_walkers.yaml", out / name, max_frames=20,
                            weather=weather, overwrite=True)
    P.annotate(runs[name].path, ("kwcoco",))

sunny = runs["sunny"]
cam = sunny.sensor()
for name in ("rainy", "foggy"):
    run = runs[name]
    same_labels = all(run.files[k] == v for k, v in sunny.files.items() if "instance" in k)
    same_coco = (run.path / "annotations/kwcoco.json").read_bytes() == \
        (sunny.path / "annotations/kwcoco.json").read_bytes()
    diff = np.mean([
        np.abs(read_png(run.plane_path(cam, "rgb", i)).astype(float) - read_png(sunny.plane_path(cam, "rgb", i))).mean()
        for i in range(run.frame_count)
    ])
    print(f"{name:>6} vs sunny: instance planes identical={same_labels}, kwcoco identical={same_coco}, "
          f"mean |RGB diff| {diff:.1f}/255")
