"""
Admissible mass regions
=======================

At p = 1 + 4/N (here N = 2, p = 3) the admissible region in the plane
(mu1 rho1, mu2 rho2) is a square for beta <= 0, a triangle at
beta = sqrt(mu1 mu2), and is cut by a hyperbola beyond. In the
supercritical range the sufficient conditions shrink as beta grows.
"""

import math

import numpy as np

from gpsolve.constants import gn_constant
from gpsolve.model import SystemParams, MassPair
from gpsolve.thresholds import region_sample, threshold_report

C2 = gn_constant(2, 3.0).value
T = 4 / (2 * C2)
print(f"C_2 = {C2:.10f}, single-component critical level T = {T:.6f}")

x = np.linspace(0.0, 1.2 * T, 25)
for beta in (-1.0, 0.5, 1.0, 2.0):
    s = region_sample(SystemParams(2, 3.0, 1.0, 1.0, beta), C2, x, x)
    frac = s.mask.mean()
    print(f"\nbeta = {beta:+.1f}: admissible fraction of the sampled box {frac:.3f}")
    for i in range(len(x) - 1, -1, -3):
        print("  " + "".join("#" if s.mask[j, i] else "." for j in range(len(x))))

# supercritical example on (0, pi): Lambda, Lambda', and the two sufficient conditions
lam1, lam2 = 1.0, 4.0
C = gn_constant(1, 7.0).value
print("\nN=1, p=7, rho=(0.05, 0.05)")
for beta in (-2.0, -0.5, 0.0, 1.0, 3.0):
    rep = threshold_report(SystemParams(1, 7.0, 1.0, 1.0, beta), MassPair(0.05, 0.05), C, lam1, lam2)
    checks = ", ".join(f"{k}={'ok' if c.passed else 'no'} ({c.margin:+.3e})" for k, c in rep.checks.items())
    print(f"beta={beta:+.1f}  j={rep.j}  Lambda={rep.Lambda:.4e}  Lambda'={rep.LambdaPrime:.4e}  {checks}")
