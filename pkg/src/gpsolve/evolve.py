"""Time-dependent coupled Schrodinger flow and orbital-stability experiments.

The evolution is  d/dt Psi_i = i (Lap Psi_i + g_i(Psi)),  so that
Psi_i = exp(i w_i t) u_i for every solution of the elliptic system.
Steps use the implicit midpoint rule; the nonlinearity is resolved by
fixed-point iteration. The midpoint structure conserves both masses up to
the fixed-point tolerance because every g_i is Psi_i times a real factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg import solve_banded

from .grid import Grid, principal_eigenpairs
from .model import SystemParams, energy, nonlinearity
from .minimize import GroundStateResult

__all__ = [
    "WaveState",
    "EvolutionTrace",
    "FixedPointError",
    "step_crank_nicolson",
    "evolve",
    "orbit_distance",
    "perturbation",
    "PERTURBATION_MODES",
    "stability_experiment",
]

PERTURBATION_MODES = ("random", "eigen2", "asymmetric")


class FixedPointError(RuntimeError):
    pass


@dataclass(frozen=True)
class WaveState:
    grid: Grid = field(repr=False)
    psi1: np.ndarray = field(repr=False)
    psi2: np.ndarray = field(repr=False)
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "psi1", np.asarray(self.grid.check(self.psi1), dtype=complex))
        object.__setattr__(self, "psi2", np.asarray(self.grid.check(self.psi2), dtype=complex))

    def masses(self) -> tuple[float, float]:
        return self.grid.mass(self.psi1), self.grid.mass(self.psi2)

    def h1_norm(self) -> float:
        return math.sqrt(self.grid.kinetic(self.psi1) + self.grid.kinetic(self.psi2))

    def rotated(self, theta1: float, theta2: float) -> WaveState:
        return WaveState(self.grid, np.exp(1j * theta1) * self.psi1,
                         np.exp(1j * theta2) * self.psi2, self.t)


@dataclass
class EvolutionTrace:
    times: np.ndarray
    mass1: np.ndarray
    mass2: np.ndarray
    energy: np.ndarray
    distance: np.ndarray
    dt: float
    sweeps: np.ndarray
    halvings: int = 0
    blowup: bool = False
    final: WaveState | None = field(default=None, repr=False)

    @property
    def sup_distance(self) -> float:
        return float(np.max(self.distance)) if self.distance.size else 0.0

    def mass_drift(self) -> tuple[float, float]:
        out = []
        for m in (self.mass1, self.mass2):
            out.append(float(np.max(np.abs(m - m[0])) / m[0]) if m[0] > 0 else 0.0)
        return out[0], out[1]

    def energy_drift_rate(self) -> float:
        """max |E(t) - E(0)| / (1 + |E(0)|) divided by the elapsed time."""
        span = self.times[-1] - self.times[0]
        if span <= 0:
            return 0.0
        return float(np.max(np.abs(self.energy - self.energy[0])) / (1 + abs(self.energy[0])) / span)

    def rows(self):
        """(t, mass1, mass2, energy, dist) tuples."""
        return zip(self.times.tolist(), self.mass1.tolist(), self.mass2.tolist(),
                   self.energy.tolist(), self.distance.tolist())


class _MidpointSolver:
    """Solves (I - i dt/2 Lap) x = b, factorized once per dt."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.banded = len(grid.coords) == 1
        self._cache = {}

    def __call__(self, dt: float, b: np.ndarray) -> np.ndarray:
        if dt not in self._cache:
            if len(self._cache) > 8:
                self._cache.clear()
            L = self.grid.laplacian
            z = 0.5j * dt
            if self.banded:
                ab = np.zeros((3, self.grid.size), dtype=complex)
                ab[0, 1:] = -z * L.diagonal(1)
                ab[1] = 1.0 - z * L.diagonal()
                ab[2, :-1] = -z * L.diagonal(-1)
                self._cache[dt] = lambda rhs, ab=ab: solve_banded((1, 1), ab, rhs)
            else:
                A = (sp.identity(self.grid.size, dtype=complex, format="csc") - z * L).tocsc()
                self._cache[dt] = spla.splu(A).solve
        return self._cache[dt](b)


_SOLVERS: dict[int, tuple[Grid, _MidpointSolver]] = {}


def _solver_for(grid: Grid) -> _MidpointSolver:
    entry = _SOLVERS.get(id(grid))
    if entry is None or entry[0] is not grid:
        if len(_SOLVERS) > 16:
            _SOLVERS.clear()
        entry = (grid, _MidpointSolver(grid))
        _SOLVERS[id(grid)] = entry
    return entry[1]


def _g(params, a, b):
    if params is None:
        return np.zeros_like(a), np.zeros_like(b)
    return nonlinearity(params, a, b)


def _midpoint(params, grid, psi, dt, tol, max_sweeps):
    solve = _solver_for(grid)
    L = grid.laplacian
    base = [p + 0.5j * dt * (L @ p) for p in psi]
    new = list(psi)
    for sweep in range(1, max_sweeps + 1):
        mid = [(a + b) * 0.5 for a, b in zip(psi, new)]
        g = _g(params, *mid)
        nxt = [solve(dt, base[i] + 1j * dt * g[i]) for i in (0, 1)]
        scale = max(np.max(np.abs(nxt[0])), np.max(np.abs(nxt[1])), 1e-300)
        change = max(np.max(np.abs(nxt[0] - new[0])), np.max(np.abs(nxt[1] - new[1]))) / scale
        new = nxt
        if params is None or change <= tol:
            return new, sweep
    raise FixedPointError(f"fixed-point iteration did not reach {tol:g} in {max_sweeps} sweeps (dt = {dt:g})")


def step_crank_nicolson(params: SystemParams | None, state: WaveState, dt: float,
                        tol: float = 1e-12, max_sweeps: int = 50,
                        _depth: int = 0) -> tuple[WaveState, int, int]:
    """One implicit-midpoint step of length ``dt`` (negative dt steps backward).

    ``params=None`` drops the nonlinearity (free Schrodinger flow).

    Returns:
        (new state, fixed-point sweeps used, number of internal dt halvings).
    """
    if dt == 0:
        raise ValueError("dt must be nonzero")
    psi = [state.psi1, state.psi2]
    try:
        new, sweeps = _midpoint(params, state.grid, psi, dt, tol, max_sweeps)
        return WaveState(state.grid, new[0], new[1], state.t + dt), sweeps, 0
    except FixedPointError:
        if _depth >= 8:
            raise
    half, s1, h1 = step_crank_nicolson(params, state, dt / 2, tol, max_sweeps, _depth + 1)
    out, s2, h2 = step_crank_nicolson(params, half, dt / 2, tol, max_sweeps, _depth + 1)
    return WaveState(state.grid, out.psi1, out.psi2, state.t + dt), s1 + s2, 1 + h1 + h2


def orbit_distance(state: WaveState, gs: GroundStateResult) -> float:
    """H^1_0 distance from the state to the phase orbit of the ground state.

    The optimal phases are theta_i = arg <Psi_i, u_i>_{H^1_0}.
    """
    if state.grid is not gs.grid:
        if state.grid.size != gs.grid.size or state.grid.domain != gs.grid.domain:
            raise ValueError("grid mismatch between state and ground state")
    grid = state.grid
    total = 0.0
    for psi, u in ((state.psi1, gs.u1), (state.psi2, gs.u2)):
        pair = grid.h1_inner(psi, u)
        theta = float(np.angle(pair)) if abs(pair) > 0 else 0.0
        total += grid.kinetic(psi - np.exp(1j * theta) * u)
    return math.sqrt(total)


def evolve(params, state: WaveState, T: float, dt: float, sample_every: int = 1,
           gs: GroundStateResult | None = None, tol: float = 1e-12,
           blowup_factor: float = 1e3) -> EvolutionTrace:
    """Integrate to time T with a fixed nominal step, sampling every few steps.

    The run stops early (``blowup`` set) when the H^1_0 norm exceeds
    ``blowup_factor`` times its initial value.
    """
    steps = int(round(T / dt))
    if steps < 1:
        raise ValueError("T must cover at least one step")
    grid = state.grid
    E = (lambda s: energy(params, grid, s.psi1, s.psi2)) if params is not None else \
        (lambda s: 0.5 * (grid.kinetic(s.psi1) + grid.kinetic(s.psi2)))
    dist = (lambda s: orbit_distance(s, gs)) if gs is not None else (lambda s: math.nan)
    n0 = state.h1_norm()
    rec = {"t": [], "m1": [], "m2": [], "E": [], "d": [], "sw": []}

    def record(s, sw):
        m1, m2 = s.masses()
        rec["t"].append(s.t)
        rec["m1"].append(m1)
        rec["m2"].append(m2)
        rec["E"].append(E(s))
        rec["d"].append(dist(s))
        rec["sw"].append(sw)

    record(state, 0)
    halvings = 0
    blowup = False
    for k in range(1, steps + 1):
        state, sw, hv = step_crank_nicolson(params, state, dt, tol)
        # pin the clock to the nominal grid so sample times are reproducible
        state = WaveState(grid, state.psi1, state.psi2, k * dt)
        halvings += hv
        if not np.all(np.isfinite(state.psi1)) or state.h1_norm() > blowup_factor * max(n0, 1e-300):
            blowup = True
            record(state, sw)
            break
        if k % sample_every == 0 or k == steps:
            record(state, sw)
    return EvolutionTrace(np.array(rec["t"]), np.array(rec["m1"]), np.array(rec["m2"]),
                          np.array(rec["E"]), np.array(rec["d"]), dt, np.array(rec["sw"]),
                          halvings, blowup, state)


def _smooth_noise(grid: Grid, rng) -> np.ndarray:
    xi = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
    A = (sp.identity(grid.size, format="csc") - grid.laplacian).tocsc()
    lu = spla.splu(A)
    # (I - Lap)^{-2} applied to white noise: smooth and zero on the boundary
    return lu.solve(lu.solve(xi.real)) + 1j * lu.solve(lu.solve(xi.imag))


def perturbation(gs: GroundStateResult, mode: str, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Perturbation direction with unit H^1_0 norm (zero on massless components)."""
    grid = gs.grid
    if mode == "random":
        rng = np.random.default_rng(seed)
        v = [_smooth_noise(grid, rng), _smooth_noise(grid, rng)]
    elif mode == "eigen2":
        phi2 = principal_eigenpairs(grid, 2)[1].phi
        v = [phi2.astype(complex), phi2.astype(complex)]
    elif mode == "asymmetric":
        phi2 = principal_eigenpairs(grid, 2)[1].phi
        v = [phi2.astype(complex), np.zeros(grid.size, dtype=complex)]
    else:
        raise ValueError(f"unknown perturbation mode {mode!r}; expected one of {PERTURBATION_MODES}")
    for i, rho in enumerate(gs.masses):
        if rho == 0:
            v[i] = np.zeros(grid.size, dtype=complex)
    norm = math.sqrt(grid.kinetic(v[0]) + grid.kinetic(v[1]))
    if norm == 0:
        raise ValueError(f"perturbation mode {mode!r} vanishes for these masses")
    return v[0] / norm, v[1] / norm


def perturbed_state(gs: GroundStateResult, mode: str, delta: float, seed: int = 0) -> WaveState:
    """(u1, u2) + delta v, rescaled back to the ground-state masses."""
    grid = gs.grid
    if delta == 0:
        return WaveState(grid, gs.u1, gs.u2)
    v = perturbation(gs, mode, seed)
    out = []
    for u, vi, rho in zip((gs.u1, gs.u2), v, gs.masses):
        w = u + delta * vi
        out.append(w * math.sqrt(rho / grid.mass(w)) if rho > 0 else np.zeros(grid.size, dtype=complex))
    return WaveState(grid, out[0], out[1])


def stability_experiment(params: SystemParams, gs: GroundStateResult, mode: str, delta: float,
                         T: float, dt: float, seed: int = 0, sample_every: int = 1) -> EvolutionTrace:
    """Evolve a mass-preserving perturbation of the ground state and track its orbit distance."""
    if not gs.converged:
        raise ValueError("stability experiments need a converged ground state")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    state = perturbed_state(gs, mode, delta, seed)
    return evolve(params, state, T, dt, sample_every=sample_every, gs=gs)
