"""
Ground states by the normalized gradient flow
=============================================

Subcritical case on (0, pi): attraction and repulsion, multi-start.
Supercritical case on the unit 3-ball at p = 5: a local minimizer inside
the kinetic ball, with its certificate. Finally the concentrating
sequence showing the energy is unbounded below on the mass constraint.
"""

import math

import numpy as np

from gpsolve.grid import Domain, build_grid, principal_eigenpairs, analytic_eigenvalues
from gpsolve.model import SystemParams, MassPair
from gpsolve.constants import gn_constant
from gpsolve.minimize import ConstraintSpec, FlowOptions, ground_state, verify_local_min, witness_table
from gpsolve.thresholds import check_supercritical

g = build_grid(Domain.interval(math.pi), 200)
m = MassPair(1.0, 1.0)
print("beta     start             energy      omega1     omega2     int u1 u2")
for beta in (2.0, 0.5, -0.5, -5.0, -50.0):
    best, runs = ground_state(SystemParams(1, 3.0, 1.0, 1.0, beta), g, ConstraintSpec(m), FlowOptions(dt=0.5))
    print(f"{beta:+6.1f}   {best.init:<16s} {best.energy:10.6f}  {best.omega1:9.5f}  {best.omega2:9.5f}"
          f"  {g.integrate(best.u1 * best.u2):.4f}")

# supercritical: masses at half of the sufficient budget
ball = build_grid(Domain.ball(1.0, 3), 400)
S = gn_constant(3, 5.0).value
l1 = principal_eigenpairs(ball, 1)[0].lam
l2 = float(analytic_eigenvalues(ball.domain, 2)[1])
P = SystemParams(3, 5.0, 1.0, 1.0, 0.5)
rep = check_supercritical(P, MassPair(1.0, 1.0), S, l1, l2)
lhs = rep.R - rep.checks["assnice"].margin
s2 = (0.5 * rep.R / lhs) ** (2 / (P.p - 1))
m = MassPair(s2, s2)
rep = check_supercritical(P, m, S, l1, l2)
spec = ConstraintSpec(m, rep.bar_alpha)
best, _ = ground_state(P, ball, spec, FlowOptions(dt=0.5 / l1), starts=("eigen1",))
cert = verify_local_min(best, spec, rep)
print(f"\nball N=3, p=5, rho=({m.rho1:.4f}, {m.rho2:.4f}), bar_alpha={rep.bar_alpha:.4f}")
print(f"  kinetic {best.kinetic_total:.4f} < ball radius {m.total * rep.bar_alpha:.4f}")
print(f"  energy {best.energy:.5f}, omegas ({best.omega1:.4f}, {best.omega2:.4f}), lambda1={l1:.4f}")
print("  certificate:", cert.as_dict())

# the mass constraint alone does not bound the energy from below:
# the energy rises, peaks, then falls without bound as k grows
P7 = SystemParams(1, 7.0, 1.0, 1.0, 0.0)
tab = witness_table(P7, build_grid(Domain.interval(math.pi), 400), MassPair(1.5, 1.5), np.arange(2, 21))
print("\nk     kinetic        energy")
for k, K, E in tab:
    print(f"{k:<5g} {K:12.4f}  {E:12.4f}")
