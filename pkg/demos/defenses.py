"""Background ablation under a static and a jittering camera, then the mask harness.

    python demos/defenses.py [OUT_DIR]
"""

import sys
from pathlib import Path

from advsim import pipeline as P
from advsim.scenarios import SCENARIO_DIR

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out") / "defenses"

# a median background removes a patch seen by a fixed camera, but +-5 cm / +-1 deg
# of camera shake is enough to leave the patch standing
for name in ("static", "jitter"):
    run = P.generate(SCENARIO_DIR / f"ablation_{name}.yaml", out / f"ablation_{name}", overwrite=True)
    rate = P.evaluate([run.path], "ablation")["runs"][0]["ablation_rate"]
    print(f"ablation, {name:>6} camera: {rate:.1%} of patch pixels removed")

# localisation masks for a saturated patch on a grey backdrop, at two resolutions
runs = [P.generate(SCENARIO_DIR / f"masks_{r}.yaml", out / f"masks_{r}", overwrite=True)
        for r in ("800x600", "1600x1200")]
report = P.evaluate([r.path for r in runs], "masks")
print(f"{'resolution':>10} {'mask':>16} {'precision':>9} {'recall':>7} {'iou':>6}")
for row in report["table"]:
    print(f"{row['width']}x{row['height']:<5} {row['mask']:>16} {row['precision']:9.3f} "
          f"{row['recall']:7.3f} {row['iou']:6.3f}")
