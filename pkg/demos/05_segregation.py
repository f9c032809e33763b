"""
Strong repulsion and phase separation
=====================================

Sweep beta towards -infinity with equal masses on (0, pi). The overlap
of the components vanishes, the multipliers settle, and w = u1 - u2
approaches a sign-changing solution of the limit problem.
"""

import math

import numpy as np

from gpsolve.grid import Domain, build_grid
from gpsolve.model import SystemParams, MassPair
from gpsolve.minimize import FlowOptions
from gpsolve.segregation import beta_sweep, limit_profile_check, beta_term_bound

g = build_grid(Domain.interval(math.pi), 400)
betas = [-1.0, -10.0, -1e2, -1e3, -1e4, -1e5]
recs = beta_sweep(SystemParams(1, 3.0, 1.0, 1.0, -1.0), MassPair(1.0, 1.0), betas, g, FlowOptions(dt=0.1))

print("beta        energy      omega1      overlap      |beta| term   bound     holder")
for r in recs:
    lhs, bound = beta_term_bound(r)
    print(f"{r.beta:<10g}  {r.result.energy:9.5f}  {r.omega1:9.5f}  {r.overlap:.3e}   {lhs:.3e}   {bound:7.4f}  {r.holder:.4f}")

print("\nbeta        mass w+    mass w-    rel. residual   interface width")
for r in recs[2:]:
    rep = limit_profile_check(r)
    print(f"{r.beta:<10g}  {rep.mass_plus:.5f}    {rep.mass_minus:.5f}    {rep.relative_residual:.2e}        {rep.interface_width:.4f}")

w = recs[-1].w
x = g.coords[0]
print("\nlimit profile w = u1 - u2 (every 40th node)")
for xi, wi in zip(x[::40], w[::40]):
    print(f"{xi:6.3f}  {wi:+.5f}")
