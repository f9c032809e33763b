"""
Orbital stability experiment
============================

Perturb the subcritical ground state, evolve with the implicit midpoint
scheme, and follow the distance to the phase orbit of the ground state.
"""

import math

import numpy as np

from gpsolve.grid import Domain, build_grid, principal_eigenpairs
from gpsolve.model import SystemParams, MassPair
from gpsolve.minimize import ConstraintSpec, FlowOptions, ground_state
from gpsolve.evolve import stability_experiment

g = build_grid(Domain.interval(math.pi), 200)
P = SystemParams(1, 3.0, 1.0, 1.0, 0.5)
gs, _ = ground_state(P, g, ConstraintSpec(MassPair(1.0, 0.7)), FlowOptions(dt=1.0, tol=1e-12))
T = 20 / principal_eigenpairs(g, 1)[0].lam
print(f"ground state energy {gs.energy:.8f}, omegas ({gs.omega1:.6f}, {gs.omega2:.6f}), T = {T:.2f}")

print("\nmode        delta    sup dist   sup/delta   mass drift   energy drift/t")
for mode in ("random", "eigen2", "asymmetric"):
    for delta in (1e-1, 1e-2, 1e-3):
        tr = stability_experiment(P, gs, mode, delta, T, 0.01, seed=0, sample_every=10)
        print(f"{mode:<10s}  {delta:<7g}  {tr.sup_distance:.3e}  {tr.sup_distance / delta:8.4f}"
              f"   {max(tr.mass_drift()):.1e}      {tr.energy_drift_rate():.1e}")

tr = stability_experiment(P, gs, "random", 1e-2, T, 0.01, seed=0, sample_every=100)
print("\nt        dist(t)")
for t, d in zip(tr.times, tr.distance):
    print(f"{t:6.2f}   {d:.4e}")
