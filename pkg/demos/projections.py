"""
Projections onto the target sets
================================

The monotone projection is the slope of the lower convex envelope of the
primitive; the L1-ball projection is soft thresholding at the level s where
the thresholded mass equals r.
"""

import numpy as np

from lyapcl import CellField, project_l1ball, project_monotone
from lyapcl.oracle import monotone_projection_bruteforce

u = CellField.from_values([0.3, -0.2, 0.9, 0.1, 0.4, 1.2], h=0.5, u_minus=-1.0, u_plus=1.5)
p, contacts = project_monotone(u)
print("u          ", u.values)
print("projection ", p.values)
for x0, x1, c in contacts.intervals:
    print(f"contact ({x0:+.2f}, {x1:+.2f}) at level {c:.4f}")
print("brute force", monotone_projection_bruteforce(u.values, 0.5))

v = CellField.from_values([0.25, 0.75, 0.75, 0.25])
res = project_l1ball(v, 1.0)
print("\nsoft threshold s =", res.threshold_s)
print("projected        ", res.projected.values)
print("L1 norm          ", np.sum(np.abs(res.projected.values)) * v.h)
