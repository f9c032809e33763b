"""Strong-competition sweeps (beta -> -infinity) and the segregated limit.

As the repulsion grows the two components separate and w = u1 - u2
approaches a sign-changing solution of

    -Lap w + w1 w^+ - w2 w^- = mu1 (w^+)^p - mu2 (w^-)^p

whose positive and negative parts carry the masses rho1 and rho2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .grid import Grid
from .model import SystemParams, MassPair, _abspow
from .minimize import (ConstraintSpec, FlowOptions, GroundStateResult, initial_guess,
                       normalized_gradient_flow)

__all__ = [
    "SegregationRecord",
    "LimitProfileReport",
    "overlap",
    "holder_proxy",
    "beta_sweep",
    "limit_profile_check",
    "beta_term_bound",
]


def overlap(grid: Grid, u1, u2, p: float) -> float:
    """int (u1 u2)^{(p+1)/2} for non-negative fields."""
    return float(np.sum(grid.weights * _abspow(np.abs(u1) * np.abs(u2), (p + 1) / 2)))


def _lines(grid: Grid, u: np.ndarray):
    """Yield (coordinates, values) along each mesh line, boundary zeros included."""
    dom = grid.domain
    if dom.kind == "ball":
        R = dom.extents[0]
        yield np.append(grid.coords[0], R), np.append(u, 0.0)
        return
    if dom.kind == "interval":
        x = np.concatenate([[0.0], grid.coords[0], [dom.extents[0]]])
        yield x, np.concatenate([[0.0], u, [0.0]])
        return
    U = u.reshape(grid.shape)
    x = np.concatenate([[0.0], grid.coords[0], [dom.extents[0]]])
    y = np.concatenate([[0.0], grid.coords[1], [dom.extents[1]]])
    for j in range(U.shape[1]):
        yield x, np.concatenate([[0.0], U[:, j], [0.0]])
    for i in range(U.shape[0]):
        yield y, np.concatenate([[0.0], U[i, :], [0.0]])


def holder_proxy(grid: Grid, u, alpha: float = 0.5) -> float:
    """max |u(x) - u(y)| / |x - y|^alpha over node pairs on each mesh line.

    A grid-level stand-in for the C^{0,alpha} seminorm; boundary nodes
    (where u vanishes) are included.
    """
    u = np.abs(grid.check(u))
    best = 0.0
    for x, v in _lines(grid, u):
        dx = np.abs(x[:, None] - x[None, :])
        dv = np.abs(v[:, None] - v[None, :])
        np.fill_diagonal(dx, 1.0)
        best = max(best, float(np.max(dv / dx**alpha)))
    return best


@dataclass
class SegregationRecord:
    beta: float
    result: GroundStateResult = field(repr=False)
    overlap: float
    w: np.ndarray = field(repr=False)
    omega1: float
    omega2: float
    h1_norms: tuple[float, float]
    sup_norms: tuple[float, float]
    holder: float
    energy_jump: bool = False

    def row(self) -> tuple:
        """(beta, energy, omega1, omega2, overlap, holder_proxy)."""
        return (self.beta, self.result.energy, self.omega1, self.omega2, self.overlap, self.holder)


def beta_term_bound(rec: SegregationRecord) -> tuple[float, float]:
    """(2|beta|/(p+1)) overlap and the energy-plus-self-interaction bound it must respect."""
    res = rec.result
    params, grid = res.params, res.grid
    p = params.p
    lhs = 2 * abs(rec.beta) / (p + 1) * rec.overlap
    self_int = np.sum(grid.weights * (params.mu1 * _abspow(res.u1, p + 1) + params.mu2 * _abspow(res.u2, p + 1)))
    return lhs, res.energy + float(self_int) / (p + 1)


def beta_sweep(params_template: SystemParams, masses: MassPair, betas, grid: Grid,
               opts: FlowOptions | None = None) -> list[SegregationRecord]:
    """Ground states along a descending list of negative couplings.

    The first run starts from disjoint bumps and each later run from the
    previous solution. Non-converged runs are kept (``result.converged``)
    and the sweep continues. ``energy_jump`` marks a record whose energy
    fell relative to the previous one, a sign that the warm start switched
    branch (energies must be non-decreasing as beta decreases).
    """
    betas = [float(b) for b in betas]
    if any(b >= 0 for b in betas):
        raise ValueError("all couplings in a segregation sweep must be negative")
    if any(b2 >= b1 for b1, b2 in zip(betas, betas[1:])):
        raise ValueError("couplings must be strictly decreasing")
    spec = ConstraintSpec(masses)
    init = initial_guess("segregated_bumps", masses, grid)
    name = "segregated_bumps"
    out: list[SegregationRecord] = []
    for beta in betas:
        params = params_template.replace(beta=beta)
        res = normalized_gradient_flow(params, grid, spec, init, opts, init_name=name)
        jump = bool(out) and res.energy < out[-1].result.energy - 1e-9 * max(1.0, abs(res.energy))
        out.append(SegregationRecord(
            beta=beta, result=res, overlap=overlap(grid, res.u1, res.u2, params.p),
            w=res.u1 - res.u2, omega1=res.omega1, omega2=res.omega2,
            h1_norms=(math.sqrt(grid.kinetic(res.u1)), math.sqrt(grid.kinetic(res.u2))),
            sup_norms=(float(np.max(res.u1)), float(np.max(res.u2))),
            holder=max(holder_proxy(grid, res.u1), holder_proxy(grid, res.u2)),
            energy_jump=jump,
        ))
        init, name = (res.u1, res.u2), "warm"
    return out


@dataclass(frozen=True)
class LimitProfileReport:
    mass_plus: float
    mass_minus: float
    mass_error: tuple[float, float]
    residual: float
    relative_residual: float
    interface_width: float
    nodes_used: int


def limit_profile_check(rec: SegregationRecord, cutoff: float = 0.05,
                        minority_level: float = 1e-8, width_level: float = 1e-3) -> LimitProfileReport:
    """Compare w = u1 - u2 with the segregated limit problem.

    The residual of the limit equation is evaluated away from the interface,
    at nodes where |w| > cutoff * max|w| and the smaller component is below
    ``minority_level`` times the larger sup norm. The exponentially small
    tail of the minority component still carries a coupling force of order
    |beta| times the tail, so the exclusion level must be far below 1/|beta|.
    The residual is reported in the max norm, absolutely and relative to the
    max of the nonlinear term there. The interface width is the measure of
    the set where both components exceed ``width_level`` times the larger
    sup norm.
    """
    res = rec.result
    grid, params = res.grid, res.params
    p = params.p
    w = rec.w
    wp, wm = np.maximum(w, 0.0), np.maximum(-w, 0.0)
    mp, mm = grid.mass(wp), grid.mass(wm)
    rho1, rho2 = res.masses.rho1, res.masses.rho2
    err = (abs(mp - rho1) / rho1 if rho1 > 0 else mp, abs(mm - rho2) / rho2 if rho2 > 0 else mm)
    nonlin = params.mu1 * wp**p - params.mu2 * wm**p
    resid = -grid.lap(w) + rec.omega1 * wp - rec.omega2 * wm - nonlin
    top = max(np.max(res.u1), np.max(res.u2))
    # off the interface: w is not small and the minority component is negligible
    mask = (np.abs(w) > cutoff * np.max(np.abs(w))) & (np.minimum(res.u1, res.u2) <= minority_level * top)
    r_abs = float(np.max(np.abs(resid[mask]))) if mask.any() else 0.0
    scale = float(np.max(np.abs(nonlin[mask]))) if mask.any() else 0.0
    level = width_level * top
    width = float(np.sum(grid.weights[(res.u1 > level) & (res.u2 > level)]))
    return LimitProfileReport(mp, mm, err, r_abs, r_abs / scale if scale > 0 else math.inf,
                              width, int(mask.sum()))
