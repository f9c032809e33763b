import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gpsolve.grid import Domain, build_grid
from gpsolve.model import (Regime, SystemParams, MassPair, exponents, classify_regime,
                           sobolev_exponent, energy, interaction_F, nonlinearity, energy_gradient,
                           el_residual, lagrange_multipliers)


@pytest.mark.parametrize("N,p,regime", [
    (1, 3.0, Regime.H1), (1, 5.0, Regime.H2), (1, 7.0, Regime.H3),
    (2, 2.0, Regime.H1), (2, 3.0, Regime.H2), (2, 9.0, Regime.H3),
    (3, 2.0, Regime.H1), (3, 7 / 3, Regime.H2), (3, 3.0, Regime.H3), (3, 5.0, Regime.H4),
    (4, 3.0, Regime.H4), (5, 7 / 3, Regime.H4),
])
def test_classify_regime(N, p, regime):
    assert classify_regime(N, p) is regime


def test_regime_rejects_out_of_range():
    with pytest.raises(ValueError):
        classify_regime(3, 7.0)
    with pytest.raises(ValueError):
        classify_regime(2, 1.0)


@given(st.integers(1, 6), st.floats(1.01, 12.0))
def test_exponent_trichotomy(N, p):
    if N >= 3 and p > (N + 2) / (N - 2):
        return
    a, r = exponents(N, p)
    l2 = 1 + 4 / N
    assert (a < 1) == (p < l2 and not math.isclose(p, l2))
    # 4r + 2(a - 1) = p - 1: the homogeneity used by the mass-scaling arguments
    assert 4 * r + 2 * (a - 1) == pytest.approx(p - 1)
    assert r > 0 or (N >= 3 and math.isclose(p, (N + 2) / (N - 2)))


def test_sobolev_exponent():
    assert sobolev_exponent(3) == 6.0
    assert sobolev_exponent(2) == math.inf


def test_params_collect_all_errors():
    errs = SystemParams.validation_errors(3, 7.0, 0.0, -1.0, math.inf)
    assert len(errs) == 4
    assert any("2*-1" in e for e in errs)
    with pytest.raises(ValueError, match="mu1"):
        SystemParams(1, 3.0, 0.0, 1.0, 0.0)


def test_params_helpers():
    P = SystemParams(2, 3.0, 1.0, 2.0, -0.5)
    assert P.beta_plus == 0.0
    assert P.replace(beta=0.7).beta_plus == 0.7
    S = P.swapped()
    assert (S.mu1, S.mu2) == (2.0, 1.0)


def test_masspair():
    m = MassPair(1.0, 0.5)
    assert m.total == 1.5 and tuple(m) == (1.0, 0.5)
    with pytest.raises(ValueError):
        MassPair(-1.0, 1.0)


@pytest.fixture(scope="module")
def fields(interval_grid):
    x = interval_grid.coords[0]
    return np.sin(x) * (1 + 0.3 * np.cos(3 * x)), 0.8 * np.sin(2 * x) ** 2


def test_energy_decouples_at_zero_beta(interval_grid, fields):
    g = interval_grid
    u1, u2 = fields
    P = SystemParams(1, 3.0, 1.3, 0.7, 0.0)
    z = np.zeros(g.size)
    assert energy(P, g, u1, u2) == pytest.approx(energy(P, g, u1, z) + energy(P, g, z, u2), rel=1e-13)


def test_energy_closed_form_for_sine(interval_grid):
    # discrete kinetic of sin x is its discrete eigenvalue times its mass
    g = interval_grid
    u = np.sin(g.coords[0])
    h = g.h[0]
    lam_h = (4 / h**2) * math.sin(h / 2) ** 2
    P = SystemParams(1, 3.0, 1.0, 1.0, 0.0)
    E = energy(P, g, u, np.zeros(g.size))
    assert E == pytest.approx(0.5 * lam_h * g.mass(u) - np.sum(g.weights * u**4) / 4, rel=1e-12)


def test_energy_phase_invariance(interval_grid, fields):
    g = interval_grid
    u1, u2 = fields
    P = SystemParams(1, 2.5, 1.0, 2.0, 0.8)
    E = energy(P, g, u1, u2)
    assert energy(P, g, np.exp(0.4j) * u1, np.exp(-2.1j) * u2) == pytest.approx(E, rel=1e-13)
    assert energy(P, g, -u1, u2) == pytest.approx(E, rel=1e-13)


def test_swap_symmetry_is_exact(interval_grid, fields):
    g = interval_grid
    u1, u2 = fields
    P = SystemParams(1, 3.0, 1.3, 0.7, -2.0)
    Q = P.swapped()
    assert interaction_F(P, g, u1, u2) == interaction_F(Q, g, u2, u1)
    a = lagrange_multipliers(P, g, u1, u2)
    b = lagrange_multipliers(Q, g, u2, u1)
    assert a == b[::-1]


@pytest.mark.parametrize("p,beta", [(3.0, -1.5), (2.0, 0.7), (5.0, 0.3), (1.5, -0.4)])
def test_energy_gradient_matches_finite_differences(interval_grid, fields, p, beta):
    g = interval_grid
    u1, u2 = fields
    u1 = u1 + 0.2
    u2 = u2 + 0.1   # keep away from zero so every power is smooth
    P = SystemParams(1, p, 1.0, 1.7, beta)
    d1, d2 = energy_gradient(P, g, u1, u2)
    rng = np.random.default_rng(11)
    for _ in range(5):
        v1, v2 = rng.standard_normal((2, g.size))
        eps = 1e-6
        fd = (energy(P, g, u1 + eps * v1, u2 + eps * v2) - energy(P, g, u1 - eps * v1, u2 - eps * v2)) / (2 * eps)
        an = np.sum(g.weights * (d1 * v1 + d2 * v2))
        assert abs(fd - an) <= 1e-6 * abs(an)


def test_nonlinearity_complex_is_field_times_real(fields):
    u1, u2 = fields
    P = SystemParams(1, 3.0, 1.0, 1.0, -0.6)
    z1, z2 = np.exp(0.3j) * u1, np.exp(1.1j) * u2
    g1, g2 = nonlinearity(P, z1, z2)
    r1, r2 = nonlinearity(P, u1, u2)
    assert np.allclose(g1, np.exp(0.3j) * r1, atol=1e-14)
    assert np.allclose(g2, np.exp(1.1j) * r2, atol=1e-14)


def test_nonlinearity_zero_field_is_finite():
    P = SystemParams(1, 1.5, 1.0, 1.0, 1.0)
    g1, g2 = nonlinearity(P, np.zeros(4), np.ones(4))
    assert np.all(np.isfinite(g1)) and np.all(g1 == 0)


def test_multipliers_minimize_residual(interval_grid, fields):
    g = interval_grid
    u1, u2 = fields
    P = SystemParams(1, 3.0, 1.0, 1.5, 0.4)
    w1, w2 = lagrange_multipliers(P, g, u1, u2)
    d1, d2 = energy_gradient(P, g, u1, u2)
    # least-squares scalar for each equation separately
    ls1 = -float(np.sum(g.weights * d1 * u1)) / g.mass(u1)
    ls2 = -float(np.sum(g.weights * d2 * u2)) / g.mass(u2)
    assert w1 == pytest.approx(ls1, rel=1e-8)
    assert w2 == pytest.approx(ls2, rel=1e-8)
    base = el_residual(P, g, u1, u2, w1, w2)
    for dw in (1e-3, -1e-3):
        assert el_residual(P, g, u1, u2, w1 + dw, w2) > base
        assert el_residual(P, g, u1, u2, w1, w2 + dw) > base


def test_multiplier_nan_for_empty_component(interval_grid, fields):
    u1, _ = fields
    P = SystemParams(1, 3.0, 1.0, 1.0, 0.0)
    w1, w2 = lagrange_multipliers(P, interval_grid, u1, np.zeros(interval_grid.size))
    assert math.isfinite(w1) and math.isnan(w2)
    # NaN multiplier of an empty component does not poison the residual
    assert math.isfinite(el_residual(P, interval_grid, u1, np.zeros(interval_grid.size), w1, w2))


def test_eigenfunction_is_linear_solution():
    g = build_grid(Domain.interval(math.pi), 100)
    from gpsolve.grid import principal_eigenpairs
    phi = principal_eigenpairs(g, 1)[0]
    # tiny amplitude: the nonlinearity is negligible and w -> -lambda1
    P = SystemParams(1, 3.0, 1.0, 1.0, 0.0)
    u = 1e-6 * phi.phi
    w1, _ = lagrange_multipliers(P, g, u, np.zeros(g.size))
    assert w1 == pytest.approx(-phi.lam, rel=1e-9)
