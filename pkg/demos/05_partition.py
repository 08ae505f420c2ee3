"""The configuration-space partition of unity.

Five smooth members, one per cluster decomposition: an inner bump on the
unit ball plus four degree-zero-homogeneous direction bumps whose squares
sum to one exactly.  The coarse map below shows which member dominates each
region of the (x, y) plane.
"""

import numpy as np

from scatterlab import ClusterId, build_partition, default_model, make_grid, verify_partition

pset = build_partition()
print(f"smoothing width: {pset.width:.2e}\n")

grid = make_grid(2, 128, 8.0)
report = verify_partition(pset, grid, model=default_model())
print(f"sum-of-squares max deviation : {report.sum_sq_max_dev:.2e}")
print(f"range violations             : {report.range_violations}")
print(f"support violations           : {report.support_violations}")
print(f"homogeneity max deviation    : {report.homogeneity_max_dev:.2e}")
print(f"gradient constants C (|grad j| <= C/R): "
      f"{ {k: round(v, 2) for k, v in report.gradient_constants.items()} }")
print(f"intercluster decay along rays at R=16: "
      f"{ {k: float(f'{v:.1e}') for k, v in report.ray_decay.items()} }")
print(f"violations: {list(report.violations) or 'none'}\n")

# dominant member per region, on a coarse stencil
glyph = {
    ClusterId.TOGETHER: "o",       # everything close together
    ClusterId.PHOTON_FREE: "y",    # photon alone, electron on the center
    ClusterId.ELECTRON_FREE: "x",  # electron alone, photon on the center
    ClusterId.PAIR_FREE: "p",      # the pair travels together
    ClusterId.ALL_FREE: ".",       # everything far apart
}
coords = np.linspace(-6, 6, 33)
print("dominant member over the plane (x right, y up):")
for yv in coords[::-1]:
    row = ""
    for xv in coords:
        members = pset.members(np.array([xv]), np.array([yv]))
        best = max(members, key=lambda a: members[a][0])
        row += glyph[best]
    print("   " + row)
print("\nlegend: o together, y photon free, x electron free, p pair free, . all free")
