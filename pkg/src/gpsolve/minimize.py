"""Constrained energy minimization by a normalized gradient flow.

Each step solves, per component,

    (I - dt Lap + dt s_i + dt c_i) u*_i = u_i + dt (g_i(u) + c_i u_i - w_i(u) u_i + s_i u_i)

then takes the modulus and rescales to the prescribed mass. ``w_i(u)`` are
the Lagrange multipliers of the current iterate, so fixed points of the map
are exactly discrete Euler-Lagrange solutions. ``s_i`` is a constant shift
keeping the implicit operator well conditioned, and ``c_i`` moves a stiff
repulsive coupling (beta << 0) to the implicit side. Neither changes the
fixed points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import solve_banded

from .grid import Grid, principal_eigenpairs
from .model import (SystemParams, MassPair, energy, nonlinearity, lagrange_multipliers,
                    el_residual, _abspow)
from .thresholds import ThresholdReport, hat_c_bounds

__all__ = [
    "ConstraintSpec",
    "FlowOptions",
    "GroundStateResult",
    "FlowDivergedError",
    "LocalMinCertificate",
    "INIT_KINDS",
    "initial_guess",
    "normalized_gradient_flow",
    "ground_state",
    "verify_local_min",
    "make_divergent_sequence",
    "witness_table",
]

INIT_KINDS = ("eigen1", "eigen2_split", "segregated_bumps", "custom")


class FlowDivergedError(FloatingPointError):
    """Raised when the iterate stops being finite."""


@dataclass(frozen=True)
class ConstraintSpec:
    """Mass constraint, optionally intersected with a kinetic-energy ball.

    The ball is {int |grad u1|^2 + |grad u2|^2 <= (rho1 + rho2) alpha}.
    """

    masses: MassPair
    ball_alpha: float | None = None

    def check_alpha(self, lambda1: float) -> None:
        if self.ball_alpha is not None and self.ball_alpha < lambda1 * (1 - 1e-12):
            raise ValueError(f"ball_alpha = {self.ball_alpha} is below lambda1 = {lambda1}")


@dataclass(frozen=True)
class FlowOptions:
    dt: float | None = None          # default 1e-2 / lambda1
    tol: float = 1e-9                # relative H^1_0 change per step
    max_iter: int = 200_000
    max_halvings: int = 40
    implicit_coupling: bool = True   # implicit repulsive coupling when beta < 0


@dataclass
class GroundStateResult:
    u1: np.ndarray = field(repr=False)
    u2: np.ndarray = field(repr=False)
    omega1: float
    omega2: float
    energy: float
    kinetic_total: float
    converged: bool
    boundary_hit: bool
    iterations: int
    residual: float
    dt: float
    params: SystemParams
    masses: MassPair
    grid: Grid = field(repr=False)
    init: str = "custom"
    message: str = ""
    energy_history: np.ndarray = field(default_factory=lambda: np.zeros(0), repr=False)

    def summary(self) -> dict:
        return {
            "omega1": self.omega1,
            "omega2": self.omega2,
            "energy": self.energy,
            "kinetic_total": self.kinetic_total,
            "converged": self.converged,
            "boundary_hit": self.boundary_hit,
            "iterations": self.iterations,
            "residual": self.residual,
            "dt": self.dt,
            "init": self.init,
            "message": self.message,
        }


def _normalize(grid: Grid, u: np.ndarray, rho: float) -> np.ndarray:
    if rho == 0:
        return np.zeros(grid.size)
    m = grid.mass(u)
    if not m > 0:
        raise ValueError("cannot normalize a zero field to a positive mass")
    return u * math.sqrt(rho / m)


def _split_bumps(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """Two non-negative bumps with disjoint supports (halves of the domain)."""
    dom = grid.domain
    if dom.kind == "ball":
        r, R = grid.coords[0], dom.extents[0]
        inner = np.where(r < R / 2, np.cos(np.pi * r / R), 0.0)
        outer = np.where(r > R / 2, np.sin(2 * np.pi * (r - R / 2) / R), 0.0)
        return inner, outer
    x = grid.points[:, 0]
    L = dom.extents[0]
    left = np.where(x < L / 2, np.sin(2 * np.pi * x / L), 0.0)
    right = np.where(x > L / 2, np.sin(2 * np.pi * (x - L / 2) / L), 0.0)
    if dom.kind == "rectangle":
        y = grid.points[:, 1]
        across = np.sin(np.pi * y / dom.extents[1])
        left, right = left * across, right * across
    return left, right


def initial_guess(kind: str, masses: MassPair, grid: Grid, custom=None) -> tuple[np.ndarray, np.ndarray]:
    """Starting pair with exact masses.

    eigen1: (sqrt(rho1) phi1, sqrt(rho2) phi1), kinetic (rho1 + rho2) lambda1.
    eigen2_split: positive and negative parts of phi2, each rescaled.
    segregated_bumps: bumps supported on disjoint halves of the domain.
    custom: the given pair, rescaled.
    """
    if kind == "eigen1":
        phi = principal_eigenpairs(grid, 1)[0].phi
        return _normalize(grid, phi, masses.rho1), _normalize(grid, phi, masses.rho2)
    if kind == "eigen2_split":
        phi = principal_eigenpairs(grid, 2)[1].phi
        plus, minus = np.maximum(phi, 0.0), np.maximum(-phi, 0.0)
        if not (grid.mass(plus) > 0 and grid.mass(minus) > 0):
            raise ValueError("second eigenfunction does not change sign")
        return _normalize(grid, plus, masses.rho1), _normalize(grid, minus, masses.rho2)
    if kind == "segregated_bumps":
        b1, b2 = _split_bumps(grid)
        return _normalize(grid, b1, masses.rho1), _normalize(grid, b2, masses.rho2)
    if kind == "custom":
        if custom is None:
            raise ValueError("custom initial guess needs a pair of fields")
        u1, u2 = (np.abs(grid.check(np.asarray(c, dtype=float))) for c in custom)
        return _normalize(grid, u1, masses.rho1), _normalize(grid, u2, masses.rho2)
    raise ValueError(f"unknown initial guess {kind!r}; expected one of {INIT_KINDS}")


class _ShiftedSolver:
    """Solves (I - dt Lap + dt diag(d)) x = b for scalar or nodal d."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.banded = len(grid.coords) == 1
        L = grid.laplacian
        if self.banded:
            self.main = L.diagonal()
            self.upper = L.diagonal(1)
            self.lower = L.diagonal(-1)
        self._lu = {}

    def solve(self, dt: float, d, b: np.ndarray) -> np.ndarray:
        if self.banded:
            n = b.size
            ab = np.zeros((3, n))
            ab[0, 1:] = -dt * self.upper
            ab[1] = 1.0 - dt * self.main + dt * d
            ab[2, :-1] = -dt * self.lower
            return solve_banded((1, 1), ab, b)
        if np.ndim(d) == 0:
            key = (dt, float(d))
            if key not in self._lu:
                if len(self._lu) >= 4:
                    self._lu.clear()
                self._lu[key] = self._factor(dt, np.full(b.size, float(d)))
            return self._lu[key].solve(b)
        return self._factor(dt, d).solve(b)

    def _factor(self, dt, d):
        A = sp.identity(self.grid.size, format="csc") - dt * self.grid.laplacian + dt * sp.diags(d)
        return spla.splu(A.tocsc())


def _coupling_weight(u: np.ndarray, p: float) -> np.ndarray:
    """|u|^{(p-3)/2}; for p < 3 the base is floored so zeros give a large finite weight."""
    if p >= 3:
        return _abspow(u, (p - 3) / 2)
    a = np.abs(u)
    return np.maximum(a, 1e-12 * max(float(a.max()), 1e-300)) ** ((p - 3) / 2)


def _h1_rel_change(grid, old, new):
    num = sum(grid.kinetic(n - o) for o, n in zip(old, new))
    den = sum(grid.kinetic(n) for n in new)
    return math.sqrt(num / den) if den > 0 else 0.0


def normalized_gradient_flow(params: SystemParams, grid: Grid, spec: ConstraintSpec,
                             init, opts: FlowOptions | None = None,
                             init_name: str = "custom") -> GroundStateResult:
    """Minimize the energy on the mass constraint (optionally inside a kinetic ball).

    Args:
        init: pair of starting fields; rescaled to the exact masses.
        opts: step size, tolerance and iteration cap.

    Returns:
        GroundStateResult; ``converged`` is False if the iteration cap or the
        step-size floor was hit. With ``spec.ball_alpha`` set the flow stops
        as soon as the kinetic energy leaves the ball (``boundary_hit``).

    Raises:
        FlowDivergedError: the iterate became non-finite.
    """
    opts = opts or FlowOptions()
    masses = spec.masses
    rho = (masses.rho1, masses.rho2)
    active = [r > 0 for r in rho]
    if not any(active):
        raise ValueError("at least one mass must be positive")
    lam1 = principal_eigenpairs(grid, 1)[0].lam
    spec.check_alpha(lam1)
    dt = opts.dt if opts.dt is not None else 1e-2 / lam1
    dt0 = dt
    budget = None if spec.ball_alpha is None else masses.total * spec.ball_alpha
    p, beta = params.p, params.beta
    stiff = opts.implicit_coupling and beta < 0 and all(active)

    u = [np.abs(_normalize(grid, grid.check(np.asarray(v, dtype=float)), r))
         for v, r in zip(init, rho)]
    w = lagrange_multipliers(params, grid, *u)
    shift = [max(wi, 0.0) if math.isfinite(wi) else 0.0 for wi in w]
    solver = _ShiftedSolver(grid)
    E = energy(params, grid, *u)
    history = [E]
    converged = boundary_hit = False
    message = "iteration cap reached"
    it = 0
    halvings = 0

    while it < opts.max_iter:
        w = lagrange_multipliers(params, grid, *u)
        g = nonlinearity(params, *u)
        if stiff:
            c = [-beta * _coupling_weight(u[i], p) * _abspow(u[1 - i], (p + 1) / 2) for i in (0, 1)]
        new = []
        for i in (0, 1):
            if not active[i]:
                new.append(np.zeros(grid.size))
                continue
            rhs = u[i] + dt * (g[i] - w[i] * u[i] + shift[i] * u[i])
            d = shift[i]
            if stiff:
                rhs = rhs + dt * c[i] * u[i]
                d = shift[i] + c[i]
            with np.errstate(over="ignore", invalid="ignore"):
                try:
                    v = solver.solve(dt, d, rhs)
                except ValueError:   # non-finite system matrix or right-hand side
                    v = np.full(grid.size, np.nan)
            if not np.all(np.isfinite(v)):
                raise FlowDivergedError(f"non-finite iterate at step {it} with dt = {dt:g}; "
                                        "retry with a smaller dt")
            new.append(_normalize(grid, np.abs(v), rho[i]))
        E_new = energy(params, grid, *new)
        if not math.isfinite(E_new):
            raise FlowDivergedError(f"non-finite energy at step {it} with dt = {dt:g}; "
                                    "retry with a smaller dt")
        K_new = grid.kinetic(new[0]) + grid.kinetic(new[1])
        # reject energy increases beyond rounding of the kinetic/interaction split
        if E_new > E + 1e-12 * max(abs(E), 0.5 * K_new):
            halvings += 1
            if halvings > opts.max_halvings:
                message = f"step size fell below {dt:g} without energy decrease"
                break
            dt *= 0.5
            continue
        it += 1
        change = _h1_rel_change(grid, u, new)
        u, E = new, E_new
        history.append(E)
        if budget is not None and K_new > budget * (1 + 1e-12):
            boundary_hit = True
            message = "kinetic energy left the ball"
            break
        if change < opts.tol:
            converged = True
            message = "converged"
            break

    w = lagrange_multipliers(params, grid, *u)
    res = el_residual(params, grid, u[0], u[1], *w)
    return GroundStateResult(
        u1=u[0], u2=u[1], omega1=w[0], omega2=w[1], energy=E,
        kinetic_total=grid.kinetic(u[0]) + grid.kinetic(u[1]),
        converged=converged, boundary_hit=boundary_hit, iterations=it, residual=res,
        dt=dt, params=params, masses=masses, grid=grid, init=init_name,
        message=message if dt == dt0 else f"{message} (dt reduced to {dt:g})",
        energy_history=np.asarray(history),
    )


def ground_state(params: SystemParams, grid: Grid, spec: ConstraintSpec,
                 opts: FlowOptions | None = None,
                 starts=("eigen1", "eigen2_split", "segregated_bumps")) -> tuple[GroundStateResult, list[GroundStateResult]]:
    """Multi-start minimization; returns the lowest-energy converged run and all runs.

    Starts that are not converged (or left the ball) are only chosen when no
    run converged. Energies tied to rounding resolve to the earliest start.
    """
    runs = []
    for kind in starts:
        init = initial_guess(kind, spec.masses, grid)
        runs.append(normalized_gradient_flow(params, grid, spec, init, opts, init_name=kind))
    good = [r for r in runs if r.converged and not r.boundary_hit] or runs
    low = min(r.energy for r in good)
    # first start within rounding of the lowest energy, so ties resolve by start order
    best = next(r for r in good if r.energy <= low + 1e-12 * max(abs(low), 1.0))
    return best, runs


@dataclass(frozen=True)
class LocalMinCertificate:
    interior: bool
    interior_margin: float
    below_upper: bool
    upper_margin: float
    below_lower_bound: bool
    lower_margin: float
    conclusive: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def verify_local_min(result: GroundStateResult, spec: ConstraintSpec,
                     report: ThresholdReport, tol: float = 1e-8) -> LocalMinCertificate:
    """Certify that a ball-constrained minimizer is an interior local minimum.

    Checks that the kinetic energy is strictly inside the ball at bar_alpha,
    that the energy respects the test-function upper bound at lambda_j, and
    that it lies strictly below the lower bound on the sphere at bar_alpha.
    """
    if spec.ball_alpha is None:
        raise ValueError("verify_local_min needs a kinetic ball constraint")
    if report.bar_alpha is None or report.Lambda is None:
        raise ValueError("threshold report has no bar_alpha / Lambda (needs p > 1 + 4/N)")
    masses = spec.masses
    lam_j = report.lambda1 if report.j == 1 else report.lambda2
    lower, upper = hat_c_bounds(report.bar_alpha, masses, report.Lambda, lam_j, report.a)
    interior_margin = masses.total * report.bar_alpha - result.kinetic_total
    upper_margin = upper + tol - result.energy
    lower_margin = lower - result.energy
    interior = (not result.boundary_hit) and interior_margin > 0
    below_upper = upper_margin >= 0
    below_lower = lower_margin > 0
    return LocalMinCertificate(interior, interior_margin, below_upper, upper_margin,
                               below_lower, lower_margin,
                               interior and below_upper and below_lower and result.converged)


def _bump(s):
    """exp(-1/(1 - s^2)) on |s| < 1, zero outside."""
    out = np.zeros_like(s)
    m = s < 1
    out[m] = np.exp(-1.0 / (1.0 - s[m] ** 2))
    return out


def make_divergent_sequence(params: SystemParams, grid: Grid, masses: MassPair,
                            k: float) -> tuple[np.ndarray, np.ndarray]:
    """Concentrating pair U_{i,k} = sqrt(rho_i) k^{N/2} phi(k (x - x_i)).

    phi is a fixed smooth bump of unit mass supported in the unit ball; the
    two centres sit at a quarter and three quarters of the first axis, so the
    supports are disjoint whenever 1/k is below a quarter of that axis (and,
    in 2D, below half of the second one). The profile is normalized on the
    grid, which makes the masses exact.
    """
    dom = grid.domain
    if dom.kind == "ball":
        raise ValueError("the concentrating sequence needs off-centre supports; use an interval or rectangle")
    L = dom.extents[0]
    room = L / 4 if dom.kind == "interval" else min(L / 4, dom.extents[1] / 2)
    if not 1.0 / k < room:
        raise ValueError(f"k = {k} too small: support radius 1/k must be below {room:g}")
    pts = grid.points
    centres = [np.array([L / 4]), np.array([3 * L / 4])]
    if dom.kind == "rectangle":
        centres = [np.append(c, dom.extents[1] / 2) for c in centres]
    out = []
    for c, rho in zip(centres, masses):
        s = k * np.linalg.norm(pts - c, axis=1)
        out.append(_normalize(grid, _bump(s), rho) if rho > 0 else np.zeros(grid.size))
    return out[0], out[1]


def witness_table(params: SystemParams, grid: Grid, masses: MassPair, ks) -> np.ndarray:
    """Rows (k, kinetic_total, energy) along the concentrating sequence."""
    rows = []
    for k in ks:
        U1, U2 = make_divergent_sequence(params, grid, masses, k)
        rows.append((float(k), grid.kinetic(U1) + grid.kinetic(U2), energy(params, grid, U1, U2)))
    return np.array(rows)
