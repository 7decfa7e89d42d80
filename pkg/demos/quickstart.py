"""Render the two-walker scenario, export annotations and look at one frame.

    python demos/quickstart.py [OUT_DIR]
"""

import sys
from pathlib import Path

import numpy as np

from advsim import pipeline as P
from advsim.imageio import read_png
from advsim.renderer.codecs import decode_depth, decode_instance
from advsim.scenarios import SCENARIO_DIR

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out") / "quickstart"

# half the scenario: by the last frame both walkers are in view
run = P.generate(SCENARIO_DIR / "two_walkers.yaml", out, max_frames=150, overwrite=True)
print(f"wrote {len(run.files)} files to {run.path}")
for s in run.sensors:
    print(f"  {s['dir']:<26} planes: {', '.join(sorted(s['planes']))}")

P.annotate(run.path)

# every plane of a frame is pixel-aligned, so one mask indexes them all
cam = run.sensor()
frame = run.frame_count - 1
rgb = read_png(run.plane_path(cam, "rgb", frame))
depth = decode_depth(read_png(run.plane_path(cam, "depth", frame)))
_, ids = decode_instance(read_png(run.plane_path(cam, "instance", frame)))
for actor in run.data["actors"]:
    m = ids == actor["id"]
    if m.any():
        print(f"{actor['role_name']}: {m.sum()} px, median depth {np.median(depth[m]):.2f} m, "
              f"mean colour {rgb[m].mean(axis=0).round(1)}")
