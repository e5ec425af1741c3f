"""
Where does a repeater chain beat PLOB?
======================================

Scan ``(eta0, L_tot)`` for the (2,2) code at ``e = 1e-3``.  A coarse grid
keeps this quick; ``GridSpec()`` gives the full default resolution.
"""

import numpy as np

from tecrepeater import CodeParams
from tecrepeater.sweep import GridSpec, MCSpec, ratio_contours, scan_region

grid = GridSpec.ranges((0.80, 0.99, 0.01), (100.0, 1300.0, 50.0))
region = scan_region(CodeParams(2, 2), 1e-3, grid=grid, mc=MCSpec(10**4, 0), dx_form="literal")
print(f"FG beats PLOB in {region.fg_beats.sum()} of {region.fg_beats.size} cells "
      f"({region.fg_components()} connected region(s)); CG in {region.cg_beats.sum()}")

# %%
# Gain from keeping syndrome information.  Cells with an FG key but no CG
# key have no finite ratio.
cs = ratio_contours(region)
for level in cs.levels:
    print(f"R_FG / R_CG >= {level:g}: {cs.masks[level].sum()} cells")
print(f"FG-only cells: {cs.fg_only.sum()}")

# %%
# Save as CSV (deterministic; rerunning gives the same bytes).
with open("region_map.csv", "w", newline="") as fh:
    region.to_csv(fh)

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None
if plt is not None:
    fig, ax = plt.subplots()
    extent = (grid.l_tot_km[0], grid.l_tot_km[-1], grid.eta0[0], grid.eta0[-1])
    ax.imshow(region.fg_beats.astype(float) + region.cg_beats, origin="lower", aspect="auto", extent=extent)
    ax.set_xlabel("L_tot [km]")
    ax.set_ylabel("eta0")
    fig.savefig("region_map.png", dpi=120)
