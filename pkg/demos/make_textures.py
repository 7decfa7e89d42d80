"""Regenerate the patch textures shipped with the bundled scenarios."""

import numpy as np

from advsim.imageio import write_png
from advsim.scenarios import SCENARIO_DIR

tex = SCENARIO_DIR / "textures"
write_png(tex / "noise.png", np.random.default_rng(2024).integers(0, 256, (64, 64, 3), dtype=np.uint8))
write_png(tex / "magenta.png", np.tile(np.array([255, 0, 255], np.uint8), (32, 32, 1)))
print(f"wrote textures to {tex}")
