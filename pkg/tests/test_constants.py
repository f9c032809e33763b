import math

import numpy as np
import pytest

from gpsolve.constants import (solve_Z, gn_constant, sobolev_constant, talenti_constant,
                               l2critical_identity_check, soliton_1d, gn_quotient_radial)

import oracles

# frozen from oracles.townes_mass_2d() (independent solve_ivp shooting)
TOWNES_MASS = 11.700896524550574


def test_cubic_soliton_closed_form():
    Z = solve_Z(1, 3.0)
    # Z = sqrt(2) sech x: mass 4, kinetic 4/3, L^4 norm^4 16/3
    assert Z.z0 == pytest.approx(math.sqrt(2), rel=1e-12)
    assert Z.mass == pytest.approx(4.0, rel=1e-10)
    assert Z.kinetic == pytest.approx(4 / 3, rel=1e-10)
    assert Z.lp1 == pytest.approx(16 / 3, rel=1e-10)
    assert Z.residual < 1e-8
    exact = soliton_1d(3.0)(Z.r)
    assert np.max(np.abs(Z.profile - exact)) < 1e-8


@pytest.mark.parametrize("N,p", [(1, 3.0), (1, 5.0), (2, 3.0), (2, 2.0), (3, 3.0), (3, 7 / 3)])
def test_nehari_and_pohozaev_identities(N, p):
    Z = solve_Z(N, p)
    # testing with Z and with x.grad Z
    assert Z.kinetic + Z.mass == pytest.approx(Z.lp1, rel=1e-9)
    assert (N - 2) / 2 * Z.kinetic + N / 2 * Z.mass == pytest.approx(N / (p + 1) * Z.lp1, rel=1e-9)
    assert Z.residual < 1e-7


@pytest.mark.parametrize("p", [3.0, 5.0, 7.0])
def test_gn_constant_1d_matches_soliton_quadrature(p):
    assert gn_constant(1, p).value == pytest.approx(oracles.soliton_gn_constant(p), rel=1e-9)


def test_townes_mass_matches_independent_shooting():
    assert solve_Z(2, 3.0).mass == pytest.approx(TOWNES_MASS, rel=1e-7)


@pytest.mark.slow
def test_townes_oracle_frozen_value():
    assert oracles.townes_mass_2d() == pytest.approx(TOWNES_MASS, rel=1e-12)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_l2_critical_identity(N):
    ident = l2critical_identity_check(N)
    assert ident.rel_gap < 1e-8
    assert ident.critical_mass(4.0) == pytest.approx(ident.z_mass * 4.0 ** (-N / 2))


def test_1d_critical_mass_closed_form():
    # quintic 1D soliton 3^{1/4} sech^{1/2}(2x) has mass sqrt(3) pi / 2
    assert l2critical_identity_check(1).z_mass == pytest.approx(math.sqrt(3) * math.pi / 2, rel=1e-10)


@pytest.mark.parametrize("N", [3, 4, 5, 6])
def test_sobolev_constant_matches_talenti(N):
    assert sobolev_constant(N).value == pytest.approx(talenti_constant(N), rel=1e-10)
    assert sobolev_constant(N, split=25.0).value == pytest.approx(sobolev_constant(N).value, rel=1e-11)


def test_sobolev_critical_dispatch():
    c = gn_constant(3, 5.0)
    assert c.provenance == "bubble" and c.value == sobolev_constant(3).value
    with pytest.raises(ValueError):
        solve_Z(3, 5.0)
    with pytest.raises(ValueError):
        sobolev_constant(2)


@pytest.mark.parametrize("N,p", [(1, 3.0), (2, 3.0), (3, 3.0), (1, 7.0)])
def test_constant_stable_under_tolerance_halving(N, p):
    a = gn_constant(N, p).value
    b = gn_constant(N, p, rtol=5e-13).value
    assert abs(a - b) <= 1e-4 * abs(a)


@pytest.mark.parametrize("N,p", [(1, 3.0), (2, 3.0), (3, 3.0), (2, 5.0)])
def test_gn_inequality_on_random_profiles(N, p):
    C = gn_constant(N, p).value
    r = np.linspace(0.0, 40.0, 40001)
    rng = np.random.default_rng(N * 10 + int(p))
    worst = 0.0
    for _ in range(40):
        k = rng.integers(1, 4)
        c = rng.normal(size=k)
        s = rng.uniform(0.3, 4.0, size=k)
        v = sum(ci * np.exp(-(r / si) ** 2) for ci, si in zip(c, s))
        q = gn_quotient_radial(N, p, r, v)
        worst = max(worst, q)
        assert q <= C * (1 + 1e-6)
    # the optimizer itself attains the constant
    Z = solve_Z(N, p)
    assert gn_quotient_radial(N, p, Z.r, Z.profile) == pytest.approx(C, rel=1e-4)
    assert worst < C
