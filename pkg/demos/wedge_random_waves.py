"""Random waves in a 60 degree wedge: Monte Carlo correlation vs the image sum.

Run: python3 demos/wedge_random_waves.py [out_dir]
"""

import math
import sys
from pathlib import Path

import numpy as np

from billiardcorr import (angular_average, bessel_j0, error_metric, randwave_correlation,
                          theory_correlation, wedge_group)

k = 200.0
lam = 2 * math.pi / k
g = wedge_group(3, "bisector")          # apex at the origin, edges at +-30 degrees
side, res = 4 * lam, 33
out = Path(sys.argv[1]) if len(sys.argv) > 1 else None

for probe in [(0.3, 0.0), (0.3, 0.153)]:
    th = theory_correlation(g, k, probe, side, res)
    for n in (250, 1000, 4000):
        emp = randwave_correlation(g, k, probe, side, res, n, seed=1)
        print(f"probe {probe}  N={n:5d}  metric {error_metric(emp, th):.4f}")
    # near an edge the angular average departs from J0 and follows the image sum
    prof, ref = angular_average(emp), angular_average(th)
    vs_j0 = np.sqrt(np.mean((prof.means - bessel_j0(k * prof.mean_radii)) ** 2))
    vs_th = np.sqrt(np.mean((prof.means - ref.means) ** 2))
    print(f"  angular average: rms vs J0 {vs_j0:.4f}, vs image sum {vs_th:.4f}")
    if out is not None:
        tag = f"{probe[0]:g}_{probe[1]:g}"
        th.to_csv(out / f"theory_{tag}.csv")
        emp.to_csv(out / f"empirical_{tag}.csv")
