"""The optimal transition profile and its scaling law.

For a = 0 the profile is a clamped cubic of width sqrt(6) and cost
2 sqrt(6)/3.  For a > 0 the cost of a jump of size s scales like
s^((2+a)/(4-a)), which for a -> 1 approaches linear (cohesive) growth.
"""
import math

from gamma_pm.functions import jump_exponent
from gamma_pm.profile import SIGMA0_EXACT, scaling_check, solve_profile

sol = solve_profile(0.0, 1.0)
print(f"a=0, s=1: energy {sol.energy:.6f} (closed form {SIGMA0_EXACT:.6f}), "
      f"width {sol.eta:.5f} (sqrt 6 = {math.sqrt(6):.5f})")

t = sol.psi.coords(0) / sol.eta
err = abs(sol.psi.values - (3 * t ** 2 - 2 * t ** 3)).max()
print(f"distance to the clamped cubic 3t^2 - 2t^3: {err:.2e}")

for a in (0.0, 0.5):
    k, misfit = scaling_check(a, [0.5, 1, 2, 4], None)
    print(f"a={a}: fitted exponent {k:.5f}, predicted {jump_exponent(a):.5f}, misfit {misfit:.1e}")
