"""How close truncated powers get to the Stein-Weiss constant, and what that means for the gap.

For N=3, alpha=2 the Rayleigh quotient of r^-5/2 on [1, L] is known in closed
form, 4 (1 - 2 (1 - L^-1/2) / log L), so the numerics can be read against it.
"""

import math

from choquard.forms import TestFunction, TruncatedPower, positivity_gap, rayleigh_quotient
from choquard.regimes import PotentialSpec, ProblemParams
from choquard.riesz import RieszParams, lambda_star, sigma_star

P = RieszParams(3, 2)
print(f"sigma* = {sigma_star(P):.15g}, lambda* = {lambda_star(P):.15g}")
print(f"{'decades':>8} {'numeric':>12} {'closed form':>12}")
for k in (3, 6, 12, 20):
    L = 10.0**k
    num = rayleigh_quotient(TruncatedPower(3, -2.5, 1.0, L), P, nodes_per_decade=32)
    ref = 4 * (1 - 2 * (1 - L**-0.5) / math.log(L))
    print(f"{k:8d} {num:12.8f} {ref:12.8f}")

print("\ngap of a wide weighted bump, rescaled by R (negative = no supersolution)")
phi = TestFunction(3, 1.0, 1e12, weight=-2.5)
for lam in (1.0, 1.9, 2.1, 3.0):
    params = ProblemParams(3, 2, 0.5, 0.5, PotentialSpec.slow(lam, -2.0))
    gaps = [positivity_gap(phi.scaled(R), params, nodes_per_decade=32).gap / R**5 for R in (1, 10, 100)]
    print(f"lambda = {lam}: " + "  ".join(f"{g:+.4e}" for g in gaps))
