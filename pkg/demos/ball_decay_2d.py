"""
Ball functional in two dimensions
=================================

Zero far field, ||a||_1 between 2 and 4, Burgers flux in both directions and
the unsplit Lax-Friedrichs scheme. With r = 1 the integral of eta(u - pi_r u)
decays for every even convex eta tried here.
"""

from lyapcl import EntropyPair, audit_decay
from lyapcl.flux import PolyFlux
from lyapcl.lyapunov import ball_entropy_observer
from lyapcl.solver import run_2d
from lyapcl.studies import random_l1_data_2d

burgers = PolyFlux([0, 0, 0.5])
a = random_l1_data_2d(100, 0.04, -2.0, seed=0)
observers = [ball_entropy_observer(1.0, EntropyPair.square(), "delta_square"),
             ball_entropy_observer(1.0, EntropyPair("cosh_minus_one"), "delta_cosh")]
report = run_2d(a, burgers, burgers, 0.45, 1.0, observers, observer_stride=10)

for t, sq, ch in zip(report.times, report.series["delta_square"], report.series["delta_cosh"]):
    print(f"t = {t:.3f}   eta = s^2: {sq:.6f}   eta = cosh - 1: {ch:.6f}")
print("violations:", audit_decay(report).count)
