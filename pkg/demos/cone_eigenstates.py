"""Eigenstate correlations in the cone billiard at modest k.

A small ensemble of Dirichlet states is compared with the wedge image sum at
a probe on the symmetry line and one close to an edge.
Run: python3 demos/cone_eigenstates.py [k] [count]
"""

import math
import sys

from billiardcorr import eigenstate_correlation, error_metric, theory_correlation, wedge_group
from billiardcorr.bim import ensemble_of_states, make_cone

k = float(sys.argv[1]) if len(sys.argv) > 1 else 40.0
count = int(sys.argv[2]) if len(sys.argv) > 2 else 20
es = ensemble_of_states(make_cone(1.0), k, count)
print(f"{len(es)} states in [{es.ks[0]:.3f}, {es.ks[-1]:.3f}]")

g = wedge_group(3, "bisector")
side = 4 * 2 * math.pi / k
for probe in [(0.3, 0.0), (0.3, 0.153)]:
    emp = eigenstate_correlation(es, probe, side, 33)
    th = theory_correlation(g, k, probe, side, 33)
    print(f"probe {probe}: metric {error_metric(emp, th):.3f}")
