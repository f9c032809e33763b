"""Explicit admissibility conditions on the masses.

Every check reports a signed margin (threshold minus left-hand side), so a
check passes when its margin is positive (or non-negative for the
non-strict conditions) and sweeps can plot the distance to the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict
import math

import numpy as np

from .model import SystemParams, MassPair, Regime

__all__ = [
    "Check",
    "ThresholdReport",
    "check_h2_condition",
    "lambda_capital",
    "lambda_prime",
    "check_supercritical",
    "hat_c_bounds",
    "threshold_report",
    "region_sample",
    "RegionSample",
    "eigen_index",
    "optimal_alpha",
]

_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class Check:
    passed: bool
    margin: float


@dataclass
class ThresholdReport:
    regime: Regime
    a: float
    r: float
    C: float
    lambda1: float | None = None
    lambda2: float | None = None
    Lambda: float | None = None
    LambdaPrime: float | None = None
    R: float | None = None
    j: int | None = None
    bar_alpha: float | None = None
    checks: dict[str, Check] = field(default_factory=dict)

    @property
    def admissible(self) -> bool:
        """True when the sufficient condition for a (local) minimizer holds."""
        if self.regime is Regime.H1:
            return True
        if self.regime is Regime.H2:
            return self.checks["h2_condition"].passed
        ok = self.checks["mainassL"].passed
        if self.regime is Regime.H4:
            ok = ok and self.checks["compact_intro"].passed
        return ok

    def to_dict(self) -> dict:
        out = asdict(self)
        out["regime"] = self.regime.value
        out["admissible"] = self.admissible
        return out


def eigen_index(params: SystemParams) -> int:
    """1 if beta >= -sqrt(mu1 mu2), else 2."""
    return 1 if params.beta >= -math.sqrt(params.mu1 * params.mu2) else 2


def _h2_terms(params, masses, C_N):
    N = params.N
    x = params.mu1 * masses.rho1 ** (2 / N)
    y = params.mu2 * masses.rho2 ** (2 / N)
    T = (N + 2) / (N * C_N)
    mixed = x + y + (params.beta_plus**2 - params.mu1 * params.mu2) * (masses.rho1 * masses.rho2) ** (2 / N) / T
    return x, y, mixed, T


def check_h2_condition(params: SystemParams, masses: MassPair, C_N: float) -> Check:
    """Coercivity condition at the L^2-critical exponent.

    max{mu1 rho1^{2/N}, mu2 rho2^{2/N},
        mu1 rho1^{2/N} + mu2 rho2^{2/N} + (N C_N/(N+2))((beta^+)^2 - mu1 mu2)(rho1 rho2)^{2/N}}
    < (N+2)/(N C_N)
    """
    if params.regime is not Regime.H2:
        raise ValueError(f"the H2 condition needs p = 1 + 4/N, got regime {params.regime.value}")
    x, y, mixed, T = _h2_terms(params, masses, C_N)
    margin = T - max(x, y, mixed)
    return Check(margin > 0, margin)


def _trig_objective(params, masses, a, r):
    m1 = params.mu1 * masses.rho1 ** (2 * r)
    m2 = params.mu2 * masses.rho2 ** (2 * r)
    b = 2 * params.beta_plus * masses.rho1**r * masses.rho2**r

    def f(t):
        c, s = np.abs(np.cos(t)), np.abs(np.sin(t))
        return m1 * c ** (2 * a) + m2 * s ** (2 * a) + b * c**a * s**a

    return f


def _golden_max(f, lo, hi, tol=1e-12):
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = f(x1)
    return max(f1, f2)


def lambda_capital(params: SystemParams, masses: MassPair, C: float, scan: int = 1024) -> float:
    """(2C/(p+1)) max over t in [0, pi/2] of the trigonometric mass functional."""
    a, r = params.exponents
    if a < 1 - 1e-12:
        raise ValueError("Lambda is defined for a >= 1 (p >= 1 + 4/N)")
    f = _trig_objective(params, masses, a, r)
    t = np.linspace(0.0, math.pi / 2, scan + 1)
    vals = f(t)
    k = int(np.argmax(vals))
    best = float(vals[k])
    lo, hi = t[max(k - 1, 0)], t[min(k + 1, scan)]
    best = max(best, float(_golden_max(f, lo, hi)), float(f(0.0)), float(f(math.pi / 2)))
    return 2 * C / (params.p + 1) * best


def lambda_prime(params: SystemParams, masses: MassPair, C: float) -> float:
    """Closed-form majorant of Lambda (the same maximum with exponents a = 1)."""
    _, r = params.exponents
    m1 = params.mu1 * masses.rho1 ** (2 * r)
    m2 = params.mu2 * masses.rho2 ** (2 * r)
    b = params.beta_plus * masses.rho1**r * masses.rho2**r
    return C / (params.p + 1) * (m1 + m2 + math.sqrt((m1 - m2) ** 2 + 4 * b * b))


def optimal_alpha(a: float, lambda_j: float) -> float:
    """Argmax of (alpha - lambda_j)/alpha^a, i.e. a/(a-1) lambda_j."""
    return a / (a - 1) * lambda_j


def check_supercritical(params: SystemParams, masses: MassPair, C: float,
                        lambda1: float, lambda2: float) -> ThresholdReport:
    """Existence conditions for a local minimizer when p > 1 + 4/N.

    Checks (all non-strict):
        mainassL:  Lambda (rho1+rho2)^{a-1} <= (a-1)^{a-1}/a^a lambda_j^{-(a-1)}
        assnice:   [max{mu1 rho1^{2r}, mu2 rho2^{2r}} + beta^+ rho1^r rho2^r] (rho1+rho2)^{a-1} <= R
    and, at the Sobolev-critical exponent, the compactness budget at bar_alpha
        compact_intro:  (rho1+rho2)(bar_alpha - lambda1) <= Lambda^{-(N-2)/2}
    together with its strict variant compact_strict.
    """
    if params.regime not in (Regime.H3, Regime.H4):
        raise ValueError(f"supercritical checks need p > 1 + 4/N, got regime {params.regime.value}")
    a, r = params.exponents
    N, p = params.N, params.p
    j = eigen_index(params)
    lam_j = lambda1 if j == 1 else lambda2
    total = masses.total
    Lam = lambda_capital(params, masses, C)
    Lam_p = lambda_prime(params, masses, C)
    budget = (a - 1) ** (a - 1) / a**a * lam_j ** (-(a - 1))
    R = (p + 1) / (2 * C) * budget
    bar_alpha = optimal_alpha(a, lam_j)

    main_lhs = Lam * total ** (a - 1)
    nice_lhs = (max(params.mu1 * masses.rho1 ** (2 * r), params.mu2 * masses.rho2 ** (2 * r))
                + params.beta_plus * masses.rho1**r * masses.rho2**r) * total ** (a - 1)
    checks = {
        "mainassL": Check(main_lhs <= budget, budget - main_lhs),
        "assnice": Check(nice_lhs <= R, R - nice_lhs),
    }
    if params.regime is Regime.H4:
        cap = Lam ** (-(N - 2) / 2)
        m = cap - total * (bar_alpha - lambda1)
        checks["compact_intro"] = Check(m >= 0, m)
        checks["compact_strict"] = Check(m > 0, m)
    C_report = C
    return ThresholdReport(params.regime, a, r, C_report, lambda1, lambda2, Lam, Lam_p, R, j,
                           bar_alpha, checks)


def hat_c_bounds(alpha: float, masses: MassPair, Lambda: float, lambda_j: float,
                 a: float) -> tuple[float, float]:
    """Lower bound on the infimum over the kinetic sphere at ``alpha`` and the
    test-function upper bound at ``lambda_j``.

        lower = 1/2 ((rho1+rho2) alpha - Lambda (rho1+rho2)^a alpha^a)
        upper = 1/2 (rho1+rho2) lambda_j
    """
    total = masses.total
    lower = 0.5 * (total * alpha - Lambda * total**a * alpha**a)
    upper = 0.5 * total * lambda_j
    return lower, upper


def threshold_report(params: SystemParams, masses: MassPair, C: float,
                     lambda1: float | None = None, lambda2: float | None = None) -> ThresholdReport:
    """Regime dispatch: every admissibility quantity that applies to ``params``."""
    a, r = params.exponents
    regime = params.regime
    if regime is Regime.H1:
        return ThresholdReport(regime, a, r, C, lambda1, lambda2,
                               checks={"h1_any_masses": Check(True, math.inf)})
    if regime is Regime.H2:
        rep = ThresholdReport(regime, a, r, C, lambda1, lambda2)
        rep.checks["h2_condition"] = check_h2_condition(params, masses, C)
        rep.Lambda = lambda_capital(params, masses, C)
        rep.LambdaPrime = lambda_prime(params, masses, C)
        return rep
    if lambda1 is None or lambda2 is None:
        raise ValueError("supercritical thresholds need lambda1 and lambda2")
    return check_supercritical(params, masses, C, lambda1, lambda2)


@dataclass(frozen=True)
class RegionSample:
    """Pass/fail mask over a sample plane plus the analytic boundary (H2 mode)."""

    mode: str
    x: np.ndarray
    y: np.ndarray
    mask: np.ndarray
    boundary: np.ndarray | None

    def rows(self):
        """(x, y, pass) triples in row-major order of (x, y)."""
        X, Y = np.meshgrid(self.x, self.y, indexing="ij")
        return zip(X.ravel().tolist(), Y.ravel().tolist(), self.mask.ravel().tolist())


def region_sample(params: SystemParams, C: float, x, y, mode: str = "h2",
                  lambda1: float | None = None, lambda2: float | None = None,
                  boundary_points: int = 201) -> RegionSample:
    """Sample an admissible-mass region.

    mode "h2": coordinates (mu1 rho1^{2/N}, mu2 rho2^{2/N}); the set where the
        L^2-critical coercivity condition holds with both coordinates positive.
        The boundary polyline is the hyperbola
        y = (T - x) / (1 + ((beta^+)^2 - mu1 mu2) x / (mu1 mu2 T)), T = (N+2)/(N C_N),
        clipped to the square.
    mode "assnice" / "mainassL": coordinates (rho1, rho2); the supercritical
        sufficient conditions.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    X, Y = np.meshgrid(x, y, indexing="ij")
    if mode == "h2":
        if params.regime is not Regime.H2:
            raise ValueError("h2 region mode needs p = 1 + 4/N")
        T = (params.N + 2) / (params.N * C)
        mm = params.mu1 * params.mu2
        k = (params.beta_plus**2 - mm) / (mm * T)
        mixed = X + Y + k * X * Y
        mask = (X > 0) & (Y > 0) & (np.maximum(np.maximum(X, Y), mixed) < T)
        bx = np.linspace(0.0, T, boundary_points)
        with np.errstate(divide="ignore", invalid="ignore"):
            by = np.clip((T - bx) / (1 + k * bx), 0.0, T)
        by[bx >= T] = 0.0
        return RegionSample(mode, x, y, mask, np.column_stack([bx, by]))
    if mode in ("assnice", "mainassL"):
        if lambda1 is None or lambda2 is None:
            raise ValueError(f"{mode} region mode needs lambda1 and lambda2")
        mask = np.zeros(X.shape, dtype=bool)
        for idx in np.ndindex(X.shape):
            rep = check_supercritical(params, MassPair(X[idx], Y[idx]), C, lambda1, lambda2)
            mask[idx] = rep.checks[mode].passed
        return RegionSample(mode, x, y, mask, None)
    raise ValueError(f"unknown region mode {mode!r}")
