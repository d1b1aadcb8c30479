"""Boundary integral scan of the unit disk and a Weyl count for the quarter stadium.

Run: python3 demos/circle_and_weyl.py
"""

import numpy as np
from scipy.special import jn_zeros

from billiardcorr.bim import eigen_scan, make_circle, make_quarter_stadium, weyl_count

ref = np.sort(np.concatenate([jn_zeros(m, 10) for m in range(10)]))[:12]
ks = np.array(eigen_scan(make_circle(1.0), 1.0, 0.5 * (ref[10] + ref[11])))
print("disk levels found", len(ks))
print("max relative error", np.max(np.abs(ks - ref[:len(ks)]) / ref[:len(ks)]))

b = make_quarter_stadium(0.6, 1.2)
ks = eigen_scan(b, 10.0, 25.0)
expected = weyl_count(b.area, b.total_length, 25.0) - weyl_count(b.area, b.total_length, 10.0)
print(f"quarter stadium levels in [10, 25]: {len(ks)} (smooth count {expected:.1f})")
