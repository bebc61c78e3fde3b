"""
Riemann fan of the cubic flux
=============================

f(u) = u^3 is neither convex nor concave, so the fan from -1 to 1 mixes a
shock and a rarefaction. Chords of the lower convex envelope of f on [-1, 1]
are shocks; arcs where the envelope touches f are rarefactions.
"""

import numpy as np

from lyapcl import PolyFlux, sample_fan, solve_riemann
from lyapcl.riemann import Shock

f = PolyFlux([0, 0, 0, 1])
fan = solve_riemann(f, -1.0, 1.0)

for wave in fan.pieces:
    if isinstance(wave, Shock):
        print(f"shock        {wave.u_before:+.6f} -> {wave.u_after:+.6f}  speed {wave.speed:.6f}")
    else:
        print(f"rarefaction  {wave.u_start:+.6f} -> {wave.u_end:+.6f}  "
              f"speeds [{wave.speed_lo:.6f}, {wave.speed_hi:.6f}]")

# the self-similar profile u(x, t) = R(x / t)
for xi in np.linspace(-1, 4, 11):
    print(f"xi = {xi:5.2f}   u = {sample_fan(fan, xi):+.6f}")
