"""
Discrete spectrum and sharp constants
=====================================

Dirichlet eigenvalues on the three domain families, then the
Gagliardo-Nirenberg constants from the ground-state profile Z.
"""

import math

import numpy as np

from gpsolve.grid import Domain, build_grid, principal_eigenpairs, analytic_eigenvalues
from gpsolve.constants import gn_constant, solve_Z, sobolev_constant, talenti_constant, l2critical_identity_check

# second-order convergence of the first two eigenvalues on (0, pi)
print("n      lambda1 - 1     lambda2 - 4")
for n in (50, 100, 200, 400):
    g = build_grid(Domain.interval(math.pi), n)
    e1, e2 = principal_eigenpairs(g, 2)
    print(f"{n:<6d} {e1.lam - 1:+.3e}     {e2.lam - 4:+.3e}")

# unit square and unit 3-ball against closed forms
sq = build_grid(Domain.rectangle(1.0, 1.0), 64)
print("square lambda1:", principal_eigenpairs(sq, 1)[0].lam, "exact", 2 * math.pi**2)
ball = build_grid(Domain.ball(1.0, 3), 400)
print("ball   lambda1:", principal_eigenpairs(ball, 1)[0].lam, "exact", analytic_eigenvalues(ball.domain, 1)[0])

# the 1D cubic profile is sqrt(2) sech x
Z = solve_Z(1, 3.0)
print("\nZ(0) =", Z.z0, " mass =", Z.mass, " (exact 4)")

print("\nN  p      C_{N,p}")
for N, p in [(1, 3.0), (1, 5.0), (1, 7.0), (2, 2.0), (2, 3.0), (3, 3.0)]:
    print(f"{N}  {p:<5g}  {gn_constant(N, p).value:.12f}")

for N in (3, 4, 5):
    print(f"Sobolev S_{N} = {sobolev_constant(N).value:.12f}  closed form {talenti_constant(N):.12f}")

# at p = 1 + 4/N the critical mass equals the mass of Z
for N in (1, 2, 3):
    ident = l2critical_identity_check(N)
    print(f"N={N}: (N+2)/(N C_N) = {ident.threshold:.10f}, mass(Z)^(2/N) = {ident.z_mass_power:.10f}")
