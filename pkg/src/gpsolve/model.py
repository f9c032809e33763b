"""Model constants, energy functional and Euler-Lagrange machinery.

The coupled system is

    -Lap u1 + w1 u1 = mu1 |u1|^{p-1} u1 + beta sgn(u1) |u1|^{(p-1)/2} |u2|^{(p+1)/2}
    -Lap u2 + w2 u2 = mu2 |u2|^{p-1} u2 + beta sgn(u2) |u2|^{(p-1)/2} |u1|^{(p+1)/2}

with energy

    E = 1/2 int |grad u1|^2 + |grad u2|^2
        - 1/(p+1) int mu1 |u1|^{p+1} + 2 beta |u1|^{(p+1)/2} |u2|^{(p+1)/2} + mu2 |u2|^{p+1}.

The coupling is written with sgn(u)|u|^{(p-1)/2} instead of u |u|^{(p-3)/2};
the two agree wherever u != 0 and the former stays bounded at u = 0 when p < 3.
For complex fields sgn is replaced by the phase u/|u|.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
import math
from typing import NamedTuple

import numpy as np

from .grid import Grid

__all__ = [
    "Regime",
    "Exponents",
    "SystemParams",
    "MassPair",
    "exponents",
    "classify_regime",
    "sobolev_exponent",
    "energy",
    "interaction_F",
    "nonlinearity",
    "energy_gradient",
    "el_residual",
    "lagrange_multipliers",
]

_TINY = 1e-300
_REL = 1e-12


class Regime(str, Enum):
    H1 = "H1"  # 1 < p < 1 + 4/N
    H2 = "H2"  # p = 1 + 4/N
    H3 = "H3"  # 1 + 4/N < p < 2* - 1
    H4 = "H4"  # p = 2* - 1, N >= 3


class Exponents(NamedTuple):
    a: float
    r: float


def sobolev_exponent(N: int) -> float:
    """2* = 2N/(N-2) for N >= 3, +inf otherwise."""
    return 2.0 * N / (N - 2) if N >= 3 else math.inf


def exponents(N: int, p: float) -> Exponents:
    """Gagliardo-Nirenberg exponents a = N(p-1)/4 and r = (p+1)/4 - N(p-1)/8."""
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    return Exponents(N * (p - 1) / 4, (p + 1) / 4 - N * (p - 1) / 8)


def _is_sobolev_critical(N: int, p: float) -> bool:
    return N >= 3 and math.isclose(p, (N + 2) / (N - 2), rel_tol=_REL)


def classify_regime(N: int, p: float) -> Regime:
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if N >= 3:
        crit = (N + 2) / (N - 2)
        if p > crit and not _is_sobolev_critical(N, p):
            raise ValueError(f"p = {p} exceeds 2* - 1 = {crit} for N = {N}")
        if _is_sobolev_critical(N, p):
            return Regime.H4
    l2crit = 1 + 4 / N
    if math.isclose(p, l2crit, rel_tol=_REL):
        return Regime.H2
    return Regime.H1 if p < l2crit else Regime.H3


@dataclass(frozen=True)
class SystemParams:
    """Dimension, nonlinearity exponent and interaction strengths."""

    N: int
    p: float
    mu1: float
    mu2: float
    beta: float

    def __post_init__(self):
        errors = self.validation_errors(self.N, self.p, self.mu1, self.mu2, self.beta)
        if errors:
            raise ValueError("; ".join(errors))

    @staticmethod
    def validation_errors(N, p, mu1, mu2, beta) -> list[str]:
        errors = []
        if not (isinstance(N, (int, np.integer)) and N >= 1):
            errors.append(f"N must be an integer >= 1, got {N!r}")
        if not p > 1:
            errors.append(f"p must satisfy p > 1, got {p}")
        elif isinstance(N, (int, np.integer)) and N >= 3:
            crit = (N + 2) / (N - 2)
            if p > crit and not _is_sobolev_critical(N, p):
                errors.append(f"p must satisfy p <= 2*-1 = {crit:g} for N = {N}, got p = {p}")
        if not mu1 > 0:
            errors.append(f"mu1 must be > 0, got {mu1}")
        if not mu2 > 0:
            errors.append(f"mu2 must be > 0, got {mu2}")
        if not math.isfinite(beta):
            errors.append(f"beta must be finite, got {beta}")
        return errors

    @property
    def beta_plus(self) -> float:
        return max(self.beta, 0.0)

    @property
    def exponents(self) -> Exponents:
        return exponents(self.N, self.p)

    @property
    def regime(self) -> Regime:
        return classify_regime(self.N, self.p)

    @property
    def sobolev_exponent(self) -> float:
        return sobolev_exponent(self.N)

    def replace(self, **changes) -> SystemParams:
        values = {k: getattr(self, k) for k in ("N", "p", "mu1", "mu2", "beta")}
        values.update(changes)
        return SystemParams(**values)

    def swapped(self) -> SystemParams:
        return self.replace(mu1=self.mu2, mu2=self.mu1)


@dataclass(frozen=True)
class MassPair:
    rho1: float
    rho2: float

    def __post_init__(self):
        if not (self.rho1 >= 0 and self.rho2 >= 0):
            raise ValueError(f"masses must be non-negative, got ({self.rho1}, {self.rho2})")

    @property
    def total(self) -> float:
        return self.rho1 + self.rho2

    def __iter__(self):
        return iter((self.rho1, self.rho2))


def _abspow(x, q: float) -> np.ndarray:
    """|x|^q with |x| < 1e-300 mapped to 0."""
    ax = np.abs(x)
    out = np.zeros(ax.shape)
    m = ax >= _TINY
    out[m] = np.exp(q * np.log(ax[m]))
    return out


def _phase(x) -> np.ndarray:
    ax = np.abs(x)
    out = np.zeros_like(x)
    m = ax >= _TINY
    out[m] = x[m] / ax[m]
    return out


def _pair(grid: Grid, u1, u2):
    return grid.check(u1), grid.check(u2)


def interaction_F(params: SystemParams, grid: Grid, u1, u2) -> float:
    """int mu1|u1|^{p+1} + 2 beta |u1|^{(p+1)/2}|u2|^{(p+1)/2} + mu2|u2|^{p+1}."""
    u1, u2 = _pair(grid, u1, u2)
    p = params.p
    h1, h2 = _abspow(u1, (p + 1) / 2), _abspow(u2, (p + 1) / 2)
    # grouped so that swapping the components gives bitwise-identical sums
    dens = (params.mu1 * h1**2 + params.mu2 * h2**2) + 2 * params.beta * (h1 * h2)
    return float(np.sum(grid.weights * dens))


def energy(params: SystemParams, grid: Grid, u1, u2) -> float:
    u1, u2 = _pair(grid, u1, u2)
    kin = grid.kinetic(u1) + grid.kinetic(u2)
    return 0.5 * kin - interaction_F(params, grid, u1, u2) / (params.p + 1)


def nonlinearity(params: SystemParams, u1, u2) -> tuple[np.ndarray, np.ndarray]:
    """Right-hand sides g_i of the elliptic system (real or complex fields)."""
    u1, u2 = np.asarray(u1), np.asarray(u2)
    p = params.p
    a1, a2 = _abspow(u1, (p - 1) / 2), _abspow(u2, (p - 1) / 2)
    b1, b2 = _abspow(u2, (p + 1) / 2), _abspow(u1, (p + 1) / 2)
    g1 = params.mu1 * a1**2 * u1 + params.beta * _phase(u1) * a1 * b1
    g2 = params.mu2 * a2**2 * u2 + params.beta * _phase(u2) * a2 * b2
    return g1, g2


def energy_gradient(params: SystemParams, grid: Grid, u1, u2) -> tuple[np.ndarray, np.ndarray]:
    """L^2 gradient of the discrete energy: -Lap u_i - g_i.

    The Euclidean gradient with respect to the nodal values is this field
    multiplied by the quadrature weights.
    """
    u1, u2 = _pair(grid, u1, u2)
    g1, g2 = nonlinearity(params, u1, u2)
    return -grid.lap(u1) - g1, -grid.lap(u2) - g2


def el_residual(params: SystemParams, grid: Grid, u1, u2, omega1: float, omega2: float) -> float:
    """Discrete L^2 norm of the Euler-Lagrange residual of both equations."""
    u1, u2 = _pair(grid, u1, u2)
    d1, d2 = energy_gradient(params, grid, u1, u2)
    w1 = 0.0 if not math.isfinite(omega1) else omega1
    w2 = 0.0 if not math.isfinite(omega2) else omega2
    r1 = d1 + w1 * u1
    r2 = d2 + w2 * u2
    return math.sqrt(grid.mass(r1) + grid.mass(r2))


def lagrange_multipliers(params: SystemParams, grid: Grid, u1, u2) -> tuple[float, float]:
    """Frequencies obtained by testing each equation with its own component.

        w_i = (int mu_i |u_i|^{p+1} + beta |u1 u2|^{(p+1)/2} - |grad u_i|^2) / int u_i^2

    This is also the scalar minimizing the residual norm of equation i.
    A component with zero mass has no multiplier; NaN is returned for it.
    """
    u1, u2 = _pair(grid, u1, u2)
    p = params.p
    h1, h2 = _abspow(u1, (p + 1) / 2), _abspow(u2, (p + 1) / 2)
    cross = params.beta * np.sum(grid.weights * (h1 * h2))
    out = []
    for u, h, mu in ((u1, h1, params.mu1), (u2, h2, params.mu2)):
        m = grid.mass(u)
        if m <= 0:
            out.append(math.nan)
            continue
        top = mu * np.sum(grid.weights * h**2) + cross - grid.kinetic(u)
        out.append(float(top / m))
    return out[0], out[1]
