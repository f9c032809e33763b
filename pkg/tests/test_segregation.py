import math

import numpy as np
import pytest

from gpsolve.grid import Domain, build_grid
from gpsolve.model import SystemParams, MassPair
from gpsolve.minimize import FlowOptions
from gpsolve.segregation import (overlap, holder_proxy, beta_sweep, beta_term_bound,
                                 limit_profile_check)

BETAS = [-0.01, -1.0, -10.0, -100.0, -1000.0, -10000.0]


@pytest.fixture(scope="module")
def sweep(interval_grid):
    return beta_sweep(SystemParams(1, 3.0, 1.0, 1.0, -1.0), MassPair(1.0, 1.0), BETAS,
                      interval_grid, FlowOptions(dt=0.1))


def test_overlap_values(interval_grid):
    g = interval_grid
    x = g.coords[0]
    a = np.where(x < 1.0, 1.0, 0.0)
    b = np.where(x > 2.0, 1.0, 0.0)
    assert overlap(g, a, b, 3.0) == 0.0
    c = np.full(g.size, 2.0)
    # (2 * 2)^2 over the interior quadrature
    assert overlap(g, c, c, 3.0) == pytest.approx(16 * g.weights.sum(), rel=1e-14)


def test_holder_proxy_bounds(interval_grid, square_grid, ball_grid):
    g = interval_grid
    s = np.sin(g.coords[0])
    hp = holder_proxy(g, s)
    # Lipschitz-1 on (0, pi): |u(x) - u(y)| / |x - y|^{1/2} <= sqrt(pi)
    assert 1 / math.sqrt(math.pi / 2) * 0.99 <= hp <= math.sqrt(math.pi)
    # a scaled copy scales the proxy
    assert holder_proxy(g, 3 * s) == pytest.approx(3 * hp, rel=1e-14)
    for grid in (square_grid, ball_grid):
        assert 0 < holder_proxy(grid, np.ones(grid.size)) < math.inf


def test_sweep_validation(interval_grid):
    P = SystemParams(1, 3.0, 1.0, 1.0, -1.0)
    with pytest.raises(ValueError, match="negative"):
        beta_sweep(P, MassPair(1, 1), [-1.0, 0.5], interval_grid)
    with pytest.raises(ValueError, match="decreasing"):
        beta_sweep(P, MassPair(1, 1), [-1.0, -1.0], interval_grid)


def test_sweep_converges_without_branch_jumps(sweep):
    assert [r.beta for r in sweep] == BETAS
    assert all(r.result.converged for r in sweep)
    assert not any(r.energy_jump for r in sweep)
    energies = [r.result.energy for r in sweep]
    assert np.all(np.diff(energies) > 0)


def test_overlap_vanishes_and_norms_stay_bounded(sweep):
    ov = np.array([r.overlap for r in sweep])
    assert np.all(np.diff(ov[1:]) < 0)
    assert ov[-1] < 1e-4 * ov[1]
    h1 = np.array([r.h1_norms for r in sweep])
    sup = np.array([r.sup_norms for r in sweep])
    assert h1.max() < 2 * h1.min() + 1 and sup.max() < 2 * sup.min()
    holder = np.array([r.holder for r in sweep])
    assert holder.max() < 2 * holder.min()
    # the increments of the multipliers shrink along the geometric sweep
    w = np.array([r.omega1 for r in sweep[2:]])
    assert np.all(np.abs(np.diff(np.diff(w))) >= 0) and np.all(np.diff(np.abs(np.diff(w))) < 0)


def test_beta_term_respects_energy_bound(sweep):
    for r in sweep:
        lhs, bound = beta_term_bound(r)
        assert 0 <= lhs <= bound
    # |beta| times the overlap itself tends to zero
    lhs = [beta_term_bound(r)[0] for r in sweep[3:]]
    assert np.all(np.diff(lhs) < 0)


def test_limit_profile_at_strong_repulsion(sweep):
    rep = limit_profile_check(sweep[-1])
    assert max(rep.mass_error) < 5e-3
    assert rep.nodes_used > 0 and rep.relative_residual < 1e-3
    widths = [limit_profile_check(r).interface_width for r in sweep[3:]]
    assert np.all(np.diff(widths) < 0)


def test_limit_profile_negative_control(sweep):
    # weak coupling: the components coincide, w carries no mass, nothing to check
    rep = limit_profile_check(sweep[0])
    assert min(rep.mass_error) > 0.99
    assert rep.nodes_used == 0 and rep.relative_residual == math.inf


def test_sweep_on_square():
    g = build_grid(Domain.rectangle(1.0, 1.0), 24)
    recs = beta_sweep(SystemParams(2, 2.0, 1.0, 1.0, -1.0), MassPair(1.0, 1.0), [-10.0, -1000.0], g,
                      FlowOptions(dt=0.05))
    assert recs[1].overlap < recs[0].overlap
    assert recs[1].result.energy > recs[0].result.energy
