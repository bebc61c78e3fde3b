"""
Distance to the monotone profiles along a Godunov run
=====================================================

Random bounded data joining -1 to 1, evolved with the cubic flux. The L2
distance to the set of nondecreasing profiles with the same far field never
grows; neither does the distance to the profiles with values in [-1, 1].
"""

import numpy as np

from lyapcl import SchemeConfig, audit_decay, run
from lyapcl.flux import PolyFlux
from lyapcl.lyapunov import interval_distance_observer, monotone_distance_observer
from lyapcl.studies import grid_on, random_bv

a = random_bv(grid_on(-5, 5, 400), seed=3, amplitude=2.0)
report = run(a, PolyFlux([0, 0, 0, 1]), SchemeConfig("godunov", 0.45, 2.0),
             [monotone_distance_observer(), interval_distance_observer(-1, 1)])

t = np.array(report.times)
for k in np.linspace(0, t.size - 1, 9).astype(int):
    print(f"t = {t[k]:.3f}   d2_monotone = {report.series['d2_monotone'][k]:.6f}"
          f"   d2_interval = {report.series['d2_interval'][k]:.6f}")

summary = audit_decay(report)
print(f"{t.size} samples, {summary.count} violations")
