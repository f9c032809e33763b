"""Sharp Gagliardo-Nirenberg constants from the radial ground state.

C_{N,p} is the value of the Weinstein quotient

    ||Z||_{p+1}^{p+1} / (||grad Z||_2^{2a} ||Z||_2^{4r})

at the positive radial solution Z of -Lap Z + Z = Z^p in R^N. Z is found by
shooting on Z(0): too large a start crosses zero, too small a start turns
back up before decaying. Double-precision bisection pins Z(0) well enough to
follow the decaying branch down to Z ~ 1e-7; past that point the profile is
continued with the decaying solution of the linearized equation,
r^{-nu} K_nu(r) with nu = N/2 - 1, where Z^p is negligible.

At the Sobolev-critical exponent there is no Z; the constant S_N is the same
quotient evaluated on the Aubin-Talenti bubble.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from scipy import integrate, special

from .grid import sphere_area
from .model import exponents, classify_regime, Regime

__all__ = [
    "GroundStateZ",
    "GNConstant",
    "CriticalIdentity",
    "solve_Z",
    "gn_constant",
    "sobolev_constant",
    "talenti_constant",
    "l2critical_identity_check",
    "soliton_1d",
    "gn_quotient_radial",
]


@dataclass(frozen=True)
class GroundStateZ:
    """Radial profile of Z together with its norms (full-space integrals)."""

    N: int
    p: float
    z0: float
    r: np.ndarray = field(repr=False)
    profile: np.ndarray = field(repr=False)
    dprofile: np.ndarray = field(repr=False)
    r_match: float
    mass: float
    kinetic: float
    lp1: float
    residual: float

    @property
    def r_trunc(self) -> float:
        return float(self.r[-1])


@dataclass(frozen=True)
class GNConstant:
    N: int
    p: float
    value: float
    provenance: str


@dataclass(frozen=True)
class CriticalIdentity:
    """Both sides of (N+2)/(N C_N) = (mass of Z)^{2/N}."""

    N: int
    threshold: float
    z_mass: float
    z_mass_power: float
    rel_gap: float

    def critical_mass(self, mu: float = 1.0) -> float:
        """Single-equation critical mass ||Z||_2^2 mu^{-N/2}."""
        return self.z_mass * mu ** (-self.N / 2)


def _rhs(N, p):
    def f(r, y):
        Z, dZ = y[0], y[1]
        zp = abs(Z) ** p * np.sign(Z)
        d2Z = Z - zp - (N - 1) / r * dZ
        rN = r ** (N - 1)
        return [dZ, d2Z, Z * Z * rN, dZ * dZ * rN, abs(Z) ** (p + 1) * rN]

    return f


def _series_start(z0, N, p, r0):
    f0 = z0 - z0**p
    c2 = f0 / (2 * N)
    c4 = (1 - p * z0 ** (p - 1)) * c2 / (4 * (N + 2))
    Z = z0 + c2 * r0**2 + c4 * r0**4
    dZ = 2 * c2 * r0 + 4 * c4 * r0**3
    m = z0**2 * r0**N / N
    k = 4 * c2**2 * r0 ** (N + 2) / (N + 2)
    q = z0 ** (p + 1) * r0**N / N
    return [Z, dZ, m, k, q]


def _shoot(z0, N, p, r_max, rtol, r0=1e-4, dense=False):
    """Integrate from the origin; classify the shot as 'over' or 'under'."""

    def crosses(r, y):
        return y[0]

    crosses.terminal = True
    crosses.direction = -1

    def turns(r, y):
        return y[1]

    turns.terminal = True
    turns.direction = 1

    sol = integrate.solve_ivp(
        _rhs(N, p), (r0, r_max), _series_start(z0, N, p, r0), method="DOP853",
        rtol=rtol, atol=rtol * 1e-12, events=(crosses, turns), dense_output=dense,
    )
    if sol.t_events[0].size:
        return "over", sol
    if sol.t_events[1].size:
        return "under", sol
    return "none", sol


def _bracket(N, p, r_max, rtol):
    lo, hi = 1.0, 2.0
    while _shoot(hi, N, p, r_max, rtol)[0] != "over":
        lo, hi = hi, 2 * hi
        if hi > 1e12:
            raise RuntimeError(f"no overshooting start found for N={N}, p={p}")
    return lo, hi


def _decaying(nu, r):
    """r^{-nu} K_nu(r), computed without underflow in the exponential."""
    return r ** (-nu) * special.kve(nu, r) * np.exp(-r)


def _decaying_prime(nu, r):
    # d/dr [r^{-nu} K_nu(r)] = -r^{-nu} K_{nu+1}(r)
    return -(r ** (-nu)) * special.kve(nu + 1, r) * np.exp(-r)


@lru_cache(maxsize=64)
def solve_Z(N: int, p: float, rtol: float = 1e-12, match_tol: float = 1e-6,
            tail_cutoff: float = 1e-12, r_max: float = 60.0) -> GroundStateZ:
    """Positive radial solution of -Lap Z + Z = Z^p in R^N.

    Args:
        N: space dimension.
        p: exponent, 1 < p < 2* - 1.
        rtol: relative tolerance of the ODE integrator.
        match_tol: relative gap between the bracketing shots beyond which
            the shot is no longer trusted and the tail takes over.
        tail_cutoff: the stored profile extends to where Z drops below this.
        r_max: integration horizon for a single shot.
    """
    if not p > 1:
        raise ValueError(f"p must exceed 1, got {p}")
    if N >= 3 and p >= (N + 2) / (N - 2) * (1 - 1e-12):
        raise ValueError(f"Z does not exist for p >= 2*-1 = {(N + 2) / (N - 2)} (N = {N})")

    lo, hi = _bracket(N, p, r_max, rtol)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        outcome, _sol = _shoot(mid, N, p, r_max, rtol)
        if outcome == "over":
            hi = mid
        else:
            lo = mid
    _, s_lo = _shoot(lo, N, p, r_max, rtol, dense=True)
    _, s_hi = _shoot(hi, N, p, r_max, rtol, dense=True)
    r_end = min(s_lo.t[-1], s_hi.t[-1])
    rs = np.linspace(1e-4, r_end, 20001)
    z_lo, z_hi = s_lo.sol(rs)[0], s_hi.sol(rs)[0]
    gap = np.abs(z_hi - z_lo) / np.maximum(np.abs(z_lo), 1e-300)
    bad = np.flatnonzero(gap > match_tol)
    r_match = float(rs[bad[0] - 1] if bad.size else rs[-1])

    z0 = lo
    sol = integrate.solve_ivp(
        _rhs(N, p), (1e-4, r_match), _series_start(z0, N, p, 1e-4), method="DOP853",
        rtol=rtol, atol=rtol * 1e-12, dense_output=True,
    )
    Zm, dZm, I_mass, I_kin, I_lp = sol.y[:, -1]

    nu = N / 2 - 1
    scale = Zm / _decaying(nu, r_match)
    tail = lambda r: scale * _decaying(nu, r)
    dtail = lambda r: scale * _decaying_prime(nu, r)
    opts = dict(epsabs=0.0, epsrel=1e-12, limit=200)
    T_mass = integrate.quad(lambda r: tail(r) ** 2 * r ** (N - 1), r_match, np.inf, **opts)[0]
    T_kin = integrate.quad(lambda r: dtail(r) ** 2 * r ** (N - 1), r_match, np.inf, **opts)[0]
    T_lp = integrate.quad(lambda r: tail(r) ** (p + 1) * r ** (N - 1), r_match, np.inf, **opts)[0]

    S = sphere_area(N)
    mass = S * (I_mass + T_mass)
    kin = S * (I_kin + T_kin)
    lp1 = S * (I_lp + T_lp)

    # profile on a uniform mesh out to where the tail drops below the cutoff
    r_trunc = r_match
    while tail(r_trunc) > tail_cutoff:
        r_trunc += 1.0
    h = 1e-3
    r_in = np.arange(0.0, r_match, h)
    r_in[0] = 1e-4
    y_in = sol.sol(r_in)
    r_out = np.linspace(r_match, r_trunc, max(2, int((r_trunc - r_match) / h)))
    r_all = np.concatenate([[0.0], r_in[1:], r_out])
    prof = np.concatenate([[z0], y_in[0, 1:], tail(r_out)])
    dprof = np.concatenate([[0.0], y_in[1, 1:], dtail(r_out)])

    resid = _ode_residual(sol, N, p, r_match, tail, r_out)
    return GroundStateZ(N, p, z0, r_all, prof, dprof, r_match, float(mass), float(kin),
                        float(lp1), resid)


def _ode_residual(sol, N, p, r_match, tail, r_out):
    """sup |Z'' + (N-1)/r Z' - Z + Z^p| on the shot and on the tail."""
    h = 1e-3
    rs = np.linspace(0.01, r_match - 3 * h, 4001)
    d = lambda r: sol.sol(r)[1]
    # fourth-order central difference of the dense-output derivative
    d2 = (-d(rs + 2 * h) + 8 * d(rs + h) - 8 * d(rs - h) + d(rs - 2 * h)) / (12 * h)
    Z, dZ = sol.sol(rs)[:2]
    shot = np.max(np.abs(d2 + (N - 1) / rs * dZ - Z + np.abs(Z) ** p))
    # the tail solves the linear part exactly; what is left is Z^p
    tail_res = float(np.max(tail(r_out) ** p))
    return float(max(shot, tail_res))


def gn_quotient(N: int, p: float, lp1: float, kin: float, mass: float) -> float:
    a, r = exponents(N, p)
    return lp1 / (kin**a * mass ** (2 * r))


def sobolev_constant(N: int, split: float = 10.0) -> GNConstant:
    """S_N with ||v||_{2*}^{2*} <= S_N ||grad v||_2^{2*}, from the bubble.

    The bubble (1 + r^2/(N(N-2)))^{-(N-2)/2} is integrated on [0, split] and
    [split, inf) separately; moving ``split`` is a self-consistency check.
    """
    if N < 3:
        raise ValueError("the Sobolev constant needs N >= 3")
    ps = 2 * N / (N - 2)
    c = N * (N - 2)
    U = lambda r: (1 + r * r / c) ** (-(N - 2) / 2)
    dU = lambda r: -(r / N) * (1 + r * r / c) ** (-N / 2)
    opts = dict(epsabs=0.0, epsrel=1e-13, limit=500)

    def both(f):
        return (integrate.quad(f, 0, split, **opts)[0]
                + integrate.quad(f, split, np.inf, **opts)[0])

    kin = sphere_area(N) * both(lambda r: dU(r) ** 2 * r ** (N - 1))
    lp = sphere_area(N) * both(lambda r: U(r) ** ps * r ** (N - 1))
    return GNConstant(N, (N + 2) / (N - 2), lp / kin ** (ps / 2), "bubble")


def talenti_constant(N: int) -> float:
    """Closed-form S_N from the sharp Sobolev constant (test oracle)."""
    K2 = (math.gamma(N) / math.gamma(N / 2)) ** (2 / N) / (math.pi * N * (N - 2))
    return K2 ** (N / (N - 2))


def gn_constant(N: int, p: float, **z_options) -> GNConstant:
    """C_{N,p}; the Sobolev-critical exponent dispatches to :func:`sobolev_constant`."""
    if classify_regime(N, p) is Regime.H4:
        return sobolev_constant(N)
    Z = solve_Z(N, p, **z_options)
    return GNConstant(N, p, gn_quotient(N, p, Z.lp1, Z.kinetic, Z.mass), "shooting")


def l2critical_identity_check(N: int, **z_options) -> CriticalIdentity:
    p = 1 + 4 / N
    C = gn_constant(N, p, **z_options).value
    Z = solve_Z(N, p, **z_options)
    threshold = (N + 2) / (N * C)
    rhs = Z.mass ** (2 / N)
    return CriticalIdentity(N, threshold, Z.mass, rhs, abs(threshold - rhs) / rhs)


def soliton_1d(p: float):
    """Closed-form 1D ground state ((p+1)/2)^{1/(p-1)} sech^{2/(p-1)}((p-1)x/2)."""
    amp = ((p + 1) / 2) ** (1 / (p - 1))
    return lambda x: amp / np.cosh((p - 1) * np.asarray(x) / 2) ** (2 / (p - 1))


def gn_quotient_radial(N: int, p: float, r: np.ndarray, v: np.ndarray) -> float:
    """Weinstein quotient of a radial profile sampled on a fine uniform mesh."""
    S = sphere_area(N)
    w = S * r ** (N - 1)
    dv = np.gradient(v, r, edge_order=2)
    mass = integrate.trapezoid(w * v * v, r)
    kin = integrate.trapezoid(w * dv * dv, r)
    lp1 = integrate.trapezoid(w * np.abs(v) ** (p + 1), r)
    return gn_quotient(N, p, lp1, kin, mass)
