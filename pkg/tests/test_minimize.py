import math

import numpy as np
import pytest

from gpsolve.constants import gn_constant
from gpsolve.grid import Domain, build_grid, principal_eigenpairs
from gpsolve.model import SystemParams, MassPair
from gpsolve.minimize import (ConstraintSpec, FlowOptions, FlowDivergedError, initial_guess,
                              normalized_gradient_flow, ground_state, verify_local_min,
                              make_divergent_sequence, witness_table)
from gpsolve.thresholds import check_supercritical

# frozen from oracles.single_equation_bvp(1.0, 3.0, pi) (shooting + brentq)
OMEGA_SINGLE = -0.5122202644875552


@pytest.fixture(scope="module")
def grid400():
    return build_grid(Domain.interval(math.pi), 400)


def _flow(P, g, m, kind="eigen1", **kw):
    return normalized_gradient_flow(P, g, ConstraintSpec(m), initial_guess(kind, m, g),
                                    FlowOptions(**kw), init_name=kind)


def test_eigen1_guess_kinetic(interval_grid):
    g = interval_grid
    m = MassPair(1.3, 0.4)
    u1, u2 = initial_guess("eigen1", m, g)
    lam1 = principal_eigenpairs(g, 1)[0].lam
    assert g.kinetic(u1) + g.kinetic(u2) == pytest.approx(m.total * lam1, rel=1e-8)
    assert g.mass(u1) == pytest.approx(1.3, rel=1e-14)


@pytest.mark.parametrize("kind", ["eigen2_split", "segregated_bumps"])
def test_split_guesses_have_disjoint_supports(kind, interval_grid, square_grid, ball_grid):
    for g in (interval_grid, square_grid, ball_grid):
        if kind == "eigen2_split" and g.domain.kind == "ball":
            continue   # radial grid only carries radial modes
        m = MassPair(0.7, 2.0)
        u1, u2 = initial_guess(kind, m, g)
        assert np.all(u1 >= 0) and np.all(u2 >= 0)
        assert not np.any((u1 > 0) & (u2 > 0))
        assert g.mass(u1) == pytest.approx(0.7, rel=1e-13)
        assert g.mass(u2) == pytest.approx(2.0, rel=1e-13)


def test_guess_errors(interval_grid):
    with pytest.raises(ValueError):
        initial_guess("nope", MassPair(1, 1), interval_grid)
    with pytest.raises(ValueError):
        initial_guess("custom", MassPair(1, 1), interval_grid)
    with pytest.raises(ValueError):
        initial_guess("custom", MassPair(1, 1), interval_grid, custom=(np.zeros(200), np.ones(200)))


def test_alpha_below_lambda1_rejected(interval_grid):
    spec = ConstraintSpec(MassPair(1, 1), ball_alpha=0.5)
    with pytest.raises(ValueError, match="below lambda1"):
        normalized_gradient_flow(SystemParams(1, 3.0, 1, 1, 0), interval_grid, spec,
                                 initial_guess("eigen1", MassPair(1, 1), interval_grid))


def test_single_equation_against_shooting(grid400, bvp_oracle):
    P = SystemParams(1, 3.0, 1.0, 1.0, 0.0)
    r = _flow(P, grid400, MassPair(1.0, 0.0), dt=1.0, tol=1e-12)
    assert r.converged
    assert abs(r.omega1 - OMEGA_SINGLE) <= 1e-4
    assert bvp_oracle[0] == pytest.approx(OMEGA_SINGLE, abs=1e-12)
    x = grid400.coords[0]
    assert np.max(np.abs(r.u1 - bvp_oracle[1](x))) <= 1e-3
    assert r.residual <= 1e-6
    assert np.all(r.u2 == 0) and math.isnan(r.omega2)
    E = r.energy_history
    assert np.all(E[1:] <= E[:-1] + 1e-12 * np.abs(E[:-1]))


def test_flow_preserves_mass_and_sign(interval_grid):
    P = SystemParams(1, 3.0, 1.0, 2.0, -0.7)
    m = MassPair(1.5, 0.8)
    r = _flow(P, interval_grid, m, kind="segregated_bumps")
    assert r.converged
    assert interval_grid.mass(r.u1) == pytest.approx(1.5, rel=1e-12)
    assert interval_grid.mass(r.u2) == pytest.approx(0.8, rel=1e-12)
    assert np.all(r.u1 >= 0) and np.all(r.u2 >= 0)
    E = r.energy_history
    assert np.all(E[1:] <= E[:-1] + 1e-12 * np.abs(E[:-1]))


def test_decoupled_components_solve_separately(interval_grid):
    g = interval_grid
    P = SystemParams(1, 3.0, 1.0, 2.0, 0.0)
    both = _flow(P, g, MassPair(1.0, 0.5), tol=1e-12, dt=1.0)
    one = _flow(P, g, MassPair(1.0, 0.0), tol=1e-12, dt=1.0)
    two = _flow(P.swapped(), g, MassPair(0.5, 0.0), tol=1e-12, dt=1.0)
    assert both.omega1 == pytest.approx(one.omega1, rel=1e-8)
    assert both.omega2 == pytest.approx(two.omega1, rel=1e-8)
    assert np.max(np.abs(both.u2 - two.u1)) < 1e-7


@pytest.mark.parametrize("beta", [-1.5, 0.0, 0.8])
def test_swap_symmetry(interval_grid, beta):
    g = interval_grid
    P = SystemParams(1, 3.0, 1.0, 2.0, beta)
    a = _flow(P, g, MassPair(1.2, 0.6), kind="segregated_bumps")
    b = normalized_gradient_flow(P.swapped(), g, ConstraintSpec(MassPair(0.6, 1.2)),
                                 initial_guess("segregated_bumps", MassPair(1.2, 0.6), g)[::-1])
    assert np.array_equal(a.u1, b.u2) and np.array_equal(a.u2, b.u1)
    assert a.energy == b.energy and (a.omega1, a.omega2) == (b.omega2, b.omega1)


@pytest.mark.parametrize("beta", [-1.0, 1.0])
def test_subcritical_ground_state_is_positive(interval_grid, beta):
    P = SystemParams(1, 3.0, 1.0, 1.0, beta)
    best, runs = ground_state(P, interval_grid, ConstraintSpec(MassPair(1.0, 0.7)))
    assert len(runs) == 3 and best.converged
    assert np.all(best.u1[1:-1] > 0) and np.all(best.u2[1:-1] > 0)
    assert best.energy <= min(r.energy for r in runs if r.converged) + 1e-12
    assert best.residual < 1e-6


def test_repulsive_coupling_prefers_segregation(interval_grid):
    P = SystemParams(1, 3.0, 1.0, 1.0, -20.0)
    best, runs = ground_state(P, interval_grid, ConstraintSpec(MassPair(1.0, 1.0)))
    e1 = next(r for r in runs if r.init == "eigen1")
    # the symmetric start is a saddle in this regime; the best run splits the components
    assert best.energy < 0.5 * e1.energy and best.init != "eigen1"
    ov = lambda r: interval_grid.integrate(r.u1 * r.u2)
    assert ov(e1) == pytest.approx(1.0, rel=1e-10)
    assert ov(best) < 0.25


def test_divergence_is_reported(interval_grid):
    P = SystemParams(1, 7.0, 1.0, 1.0, 0.5)
    m = MassPair(1.0, 1.0)
    with pytest.raises(FlowDivergedError):
        normalized_gradient_flow(P, interval_grid, ConstraintSpec(m), initial_guess("eigen1", m, interval_grid),
                                 FlowOptions(dt=1e308))


def _budget_masses(P, C, l1, l2, fraction):
    base = MassPair(1.0, 1.0)
    rep = check_supercritical(P, base, C, l1, l2)
    lam_j = l1 if rep.j == 1 else l2
    budget = (rep.a - 1) ** (rep.a - 1) / rep.a**rep.a * lam_j ** (-(rep.a - 1))
    s2 = (fraction * budget / (rep.Lambda * base.total ** (rep.a - 1))) ** (2 / (P.p - 1))
    return MassPair(s2, s2)


def test_supercritical_local_min_certified(interval_grid):
    g = interval_grid
    P = SystemParams(1, 7.0, 1.0, 1.0, 0.5)
    C = gn_constant(1, 7.0).value
    l1, l2 = (e.lam for e in principal_eigenpairs(g, 2))
    m = _budget_masses(P, C, l1, l2, 0.5)
    rep = check_supercritical(P, m, C, l1, l2)
    assert rep.checks["mainassL"].passed
    spec = ConstraintSpec(m, rep.bar_alpha)
    r = normalized_gradient_flow(P, g, spec, initial_guess("eigen1", m, g), FlowOptions(dt=0.5 / l1))
    cert = verify_local_min(r, spec, rep)
    assert cert.conclusive, cert
    assert -l1 < r.omega1 < 0 and -l1 < r.omega2 < 0


def test_flow_escapes_ball_far_above_budget(interval_grid):
    # empirical: ten times the budget, the ball-constrained flow runs into the sphere
    g = interval_grid
    P = SystemParams(1, 7.0, 1.0, 1.0, 0.5)
    C = gn_constant(1, 7.0).value
    l1, l2 = (e.lam for e in principal_eigenpairs(g, 2))
    m = _budget_masses(P, C, l1, l2, 10.0)
    rep = check_supercritical(P, m, C, l1, l2)
    assert not rep.checks["mainassL"].passed
    spec = ConstraintSpec(m, rep.bar_alpha)
    r = normalized_gradient_flow(P, g, spec, initial_guess("eigen1", m, g), FlowOptions(dt=0.5 / l1))
    assert r.boundary_hit and not verify_local_min(r, spec, rep).conclusive


def test_certificate_needs_ball(interval_grid):
    P = SystemParams(1, 7.0, 1.0, 1.0, 0.5)
    m = MassPair(0.1, 0.1)
    r = _flow(P, interval_grid, m)
    rep = check_supercritical(P, m, 0.5, 1.0, 4.0)
    with pytest.raises(ValueError):
        verify_local_min(r, ConstraintSpec(m), rep)


def test_divergent_sequence_masses_and_scaling():
    g = build_grid(Domain.interval(math.pi), 400)
    P = SystemParams(1, 7.0, 1.0, 1.0, 0.0)
    m = MassPair(3.0, 3.0)
    U1, U2 = make_divergent_sequence(P, g, m, 4.0)
    assert g.mass(U1) == pytest.approx(3.0, rel=1e-13)
    assert not np.any((U1 > 0) & (U2 > 0))
    tab = witness_table(P, g, m, [4.0, 8.0, 16.0])
    # kinetic energy scales like k^2 (up to discretization)
    ratios = tab[1:, 1] / tab[:-1, 1]
    assert np.allclose(ratios, 4.0, rtol=0.05)
    assert np.all(np.diff(tab[:, 2]) < 0) and tab[-1, 2] < 0
    with pytest.raises(ValueError):
        make_divergent_sequence(P, g, m, 1.0)
    with pytest.raises(ValueError):
        make_divergent_sequence(P, build_grid(Domain.ball(1.0, 3), 50), m, 8.0)


def test_divergent_sequence_on_rectangle(square_grid):
    P = SystemParams(2, 5.0, 1.0, 1.0, 0.0)
    U1, U2 = make_divergent_sequence(P, square_grid, MassPair(1.0, 2.0), 5.0)
    assert square_grid.mass(U2) == pytest.approx(2.0, rel=1e-13)
    assert not np.any((U1 > 0) & (U2 > 0))
