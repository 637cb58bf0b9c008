"""Lattice approximation of a jump along the diagonal.

The discrete energy on a randomly shifted lattice averages below the
anisotropic energy E_0, which overestimates a diagonal jump by sqrt 2.
Gluing lattices rotated cube by cube towards the jump direction brings the
energy back to the isotropic value.
"""
import math

from gamma_pm import fixtures as fx
from gamma_pm.density import averaged_inequality_check, polytope_approximate
from gamma_pm.functions import JumpCost
from gamma_pm.partition import extend_constant

theta = JumpCost.sqrt()
u0 = fx.diagonal_jump()
eps = 1 / 32
u = extend_constant(u0, 1.25 * 2 * math.sqrt(2) * eps)
r = averaged_inequality_check(u, eps, theta, 200, seed=0)
print(f"mean D over 200 shifts: {r.mean_d:.4f} +- {r.std_err:.4f}; E_0 on the dilated core {r.e0:.4f}")

for delta in (1 / 4, 1 / 8):
    e = delta / 8
    rep = polytope_approximate(extend_constant(u0, 1.25 * 2 * math.sqrt(2) * e), delta, e, theta)
    print(f"delta=1/{round(1 / delta)}: l1 {rep.l1_error:.2e}, energy {rep.energy_approx:.4f} "
          f"vs {rep.energy_target:.4f}, bound {rep.energy_bound:.4f}")
