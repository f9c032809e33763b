"""
Finite-difference discretization of bounded domains with homogeneous
Dirichlet conditions.

Three domain families are supported:

    interval   (0, L)                     N = 1
    rectangle  (0, Lx) x (0, Ly)          N = 2
    ball       B_R(0) in R^N, radial      any N >= 1

Interval and rectangle use the standard second-order central stencil on a
uniform mesh with n interior nodes per axis, h = extent / (n + 1), and
trapezoid quadrature (boundary nodes carry zero values and are dropped).

The radial ball uses a conservative (finite-volume) form of

    f'' + (N - 1)/r f'

on the vertex mesh r_i = i h, i = 0..n, h = R / (n + 1). The node at the
origin is an unknown with reflection closure f'(0) = 0, and each node is
weighted by the measure of its spherical shell. Both constructions make the
discrete Laplacian self-adjoint in the weighted inner product, which is what
the energy, the Rayleigh bounds and the mass conservation of the evolution
rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
import math

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import optimize, special

__all__ = [
    "Domain",
    "Grid",
    "EigenPair",
    "EigenSolverError",
    "build_grid",
    "laplacian_apply",
    "inner_l2",
    "mass",
    "kinetic",
    "principal_eigenpairs",
    "analytic_eigenvalues",
    "sphere_area",
]

KINDS = ("interval", "rectangle", "ball")


class EigenSolverError(RuntimeError):
    """Inverse iteration did not reach the requested tolerance."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def sphere_area(N: int) -> float:
    """Surface measure |S^{N-1}| of the unit sphere in R^N (2 for N = 1)."""
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


@dataclass(frozen=True)
class Domain:
    """A bounded domain from one of the three supported families."""

    kind: str
    extents: tuple[float, ...]
    dim: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}; expected one of {KINDS}")
        if any(not (e > 0 and math.isfinite(e)) for e in self.extents):
            raise ValueError(f"domain extents must be strictly positive, got {self.extents}")
        if self.dim < 1:
            raise ValueError("spatial dimension must be >= 1")
        expected = {"interval": (1, 1), "rectangle": (2, 2), "ball": (1, None)}[self.kind]
        if len(self.extents) != (2 if self.kind == "rectangle" else 1):
            raise ValueError(f"{self.kind} takes {2 if self.kind == 'rectangle' else 1} extent(s)")
        if expected[1] is not None and self.dim != expected[0]:
            raise ValueError(f"{self.kind} implies N = {expected[0]}, got N = {self.dim}")

    @classmethod
    def interval(cls, length: float) -> Domain:
        return cls("interval", (float(length),), 1)

    @classmethod
    def rectangle(cls, lx: float, ly: float) -> Domain:
        return cls("rectangle", (float(lx), float(ly)), 2)

    @classmethod
    def ball(cls, radius: float, dim: int) -> Domain:
        return cls("ball", (float(radius),), int(dim))

    @property
    def volume(self) -> float:
        if self.kind == "interval":
            return self.extents[0]
        if self.kind == "rectangle":
            return self.extents[0] * self.extents[1]
        R = self.extents[0]
        return sphere_area(self.dim) * R**self.dim / self.dim

    def describe(self) -> dict:
        if self.kind == "interval":
            return {"kind": "interval", "length": self.extents[0]}
        if self.kind == "rectangle":
            return {"kind": "rectangle", "lx": self.extents[0], "ly": self.extents[1]}
        return {"kind": "ball", "radius": self.extents[0], "dim": self.dim}


@dataclass(frozen=True)
class EigenPair:
    lam: float
    phi: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform mesh of a Domain; build with :func:`build_grid`.

    Attributes:
        domain: the discretized domain.
        n: interior node count per axis.
        h: mesh spacing per axis.
        coords: node coordinates, one array per axis (radial: r_i).
        weights: quadrature weight of every unknown node (flattened).
        boundary_weight: quadrature measure attached to the boundary nodes,
            so that ``weights.sum() + boundary_weight == domain.volume``.
    """

    domain: Domain
    n: tuple[int, ...]
    h: tuple[float, ...]
    coords: tuple[np.ndarray, ...] = field(repr=False)
    weights: np.ndarray = field(repr=False)
    boundary_weight: float
    _lap: sp.csr_matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return self.domain.dim

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c.size for c in self.coords)

    @property
    def laplacian(self) -> sp.csr_matrix:
        """Sparse matrix of the discrete Laplacian (Dirichlet closure)."""
        return self._lap

    @cached_property
    def points(self) -> np.ndarray:
        """Node coordinates as an array of shape (size, ndim_axes)."""
        mesh = np.meshgrid(*self.coords, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    @cached_property
    def radius(self) -> np.ndarray:
        """Distance of each node from the domain centre (the origin for a ball)."""
        if self.domain.kind == "ball":
            return self.coords[0].copy()
        centre = np.array([e / 2 for e in self.domain.extents])
        return np.linalg.norm(self.points - centre, axis=1)

    def check(self, f) -> np.ndarray:
        f = np.asarray(f)
        if f.shape != (self.size,):
            raise ValueError(f"grid mismatch: field has shape {f.shape}, grid has {self.size} nodes")
        return f

    def lap(self, f) -> np.ndarray:
        return self._lap @ self.check(f)

    def inner(self, f, g) -> complex | float:
        """L^2 inner product sum w f conj(g)."""
        f, g = self.check(f), self.check(g)
        return np.sum(self.weights * f * np.conj(g))

    def mass(self, f) -> float:
        f = self.check(f)
        return float(np.sum(self.weights * np.abs(f) ** 2))

    def kinetic(self, f) -> float:
        """Dirichlet energy via the quadratic form <-Lap f, f>."""
        f = self.check(f)
        return float(np.real(np.sum(self.weights * np.conj(f) * -(self._lap @ f))))

    def h1_inner(self, f, g) -> complex | float:
        """H^1_0 inner product <grad f, grad g> = <-Lap f, g>."""
        f, g = self.check(f), self.check(g)
        return np.sum(self.weights * -(self._lap @ f) * np.conj(g))

    def integrate(self, f) -> float | complex:
        return np.sum(self.weights * self.check(f))

    def sample(self, func) -> np.ndarray:
        """Evaluate ``func`` at the nodes: func(x) for 1D/radial, func(x, y) for 2D."""
        if len(self.coords) == 1:
            return np.asarray(func(self.coords[0]), dtype=float).ravel()
        return np.asarray(func(self.points[:, 0], self.points[:, 1]), dtype=float).ravel()

    def describe(self) -> dict:
        return {"domain": self.domain.describe(), "n": list(self.n), "h": list(self.h)}

    @cached_property
    def _eigen_cache(self) -> dict:
        return {}


def _second_difference(n: int, h: float) -> sp.csr_matrix:
    main = -2.0 * np.ones(n)
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h**2


def _radial_operator(n: int, h: float, N: int, R: float):
    """Finite-volume radial Laplacian on r_i = i h, i = 0..n."""
    S = sphere_area(N)
    r = h * np.arange(n + 1)
    faces = h * (np.arange(n + 1) + 0.5)           # r_{i+1/2}
    lower = np.concatenate([[0.0], faces[:-1]])     # r_{i-1/2}, zero flux at the origin
    vol = S / N * (faces**N - lower**N)
    flux = S * faces ** (N - 1)                     # A_{i+1/2}
    # the boundary half-cell [R - h/2, R] carries zero values
    boundary = S / N * (R**N - faces[-1] ** N)
    up = flux[:-1] / (h * vol[:-1])
    down = flux[:-1] / (h * vol[1:])
    diag = -flux / (h * vol)
    diag[1:] -= flux[:-1] / (h * vol[1:])
    lap = sp.diags([down, diag, up], [-1, 0, 1], format="csr")
    return r, vol, boundary, lap


def build_grid(domain: Domain, n) -> Grid:
    """Build the uniform mesh with ``n`` interior nodes per axis.

    For a rectangle ``n`` may be an int or a pair (nx, ny). For a ball the
    origin is an unknown node as well, so the radial grid carries n + 1 nodes.
    """
    ns = tuple(int(v) for v in (n if np.ndim(n) else [n] * len(domain.extents)))
    if len(ns) != len(domain.extents):
        raise ValueError(f"expected {len(domain.extents)} node counts, got {len(ns)}")
    if any(v < 3 for v in ns):
        raise ValueError(f"need at least 3 interior nodes per axis, got {ns}")
    hs = tuple(e / (v + 1) for e, v in zip(domain.extents, ns))

    if domain.kind == "ball":
        r, vol, boundary, lap = _radial_operator(ns[0], hs[0], domain.dim, domain.extents[0])
        return Grid(domain, ns, hs, (r,), vol, boundary, lap)

    coords = tuple(h * np.arange(1, v + 1) for h, v in zip(hs, ns))
    cell = float(np.prod(hs))
    weights = np.full(int(np.prod(ns)), cell)
    if domain.kind == "interval":
        lap = _second_difference(ns[0], hs[0])
    else:
        Lx = _second_difference(ns[0], hs[0])
        Ly = _second_difference(ns[1], hs[1])
        lap = (sp.kron(Lx, sp.identity(ns[1])) + sp.kron(sp.identity(ns[0]), Ly)).tocsr()
    return Grid(domain, ns, hs, coords, weights, domain.volume - weights.sum(), lap)


def laplacian_apply(grid: Grid, f) -> np.ndarray:
    return grid.lap(f)


def inner_l2(grid: Grid, f, g):
    return grid.inner(f, g)


def mass(grid: Grid, f) -> float:
    return grid.mass(f)


def kinetic(grid: Grid, f) -> float:
    return grid.kinetic(f)


def _inverse_iteration(S, solve, start, locked, tol, max_iter):
    v = start.copy()
    for q in locked:
        v -= (q @ v) * q
    v /= np.linalg.norm(v)
    lam_old = np.inf
    res = np.inf
    for _ in range(max_iter):
        v = solve(v)
        # deflate twice: one Gram-Schmidt pass loses orthogonality at 1e-8 level
        for _pass in range(2):
            for q in locked:
                v -= (q @ v) * q
        v /= np.linalg.norm(v)
        Sv = S @ v
        lam = float(v @ Sv)
        res = float(np.linalg.norm(Sv - lam * v))
        if abs(lam - lam_old) <= tol * abs(lam) and res <= 1e-9 * abs(lam):
            return lam, v
        lam_old = lam
    raise EigenSolverError(f"inverse iteration did not converge in {max_iter} iterations", res)


def principal_eigenpairs(grid: Grid, k: int = 2, tol: float = 1e-12, max_iter: int = 20000) -> list[EigenPair]:
    """Lowest ``k`` Dirichlet eigenpairs of -Lap on the grid, ascending.

    Inverse iteration (shift 0, sparse LU) with Gram-Schmidt deflation on the
    symmetrized operator W^{1/2} (-Lap) W^{-1/2}. Eigenfunctions are
    L^2-normalized; phi_1 is positive, and phi_2 is oriented so that its
    positive part carries the larger mass (ties: first node positive).
    The radial grid only resolves radially symmetric modes.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    cache = grid._eigen_cache
    key = (tol,)
    if key in cache and len(cache[key]) >= k:
        return cache[key][:k]

    d = np.sqrt(grid.weights)
    S = (sp.diags(d) @ (-grid.laplacian) @ sp.diags(1.0 / d)).tocsc()
    S = ((S + S.T) * 0.5).tocsc()
    lu = spla.splu(S)
    rng = np.random.default_rng(0)
    locked: list[np.ndarray] = []
    pairs: list[EigenPair] = []
    for _ in range(k):
        start = 1.0 + rng.standard_normal(grid.size)
        lam, v = _inverse_iteration(S, lu.solve, start, locked, tol, max_iter)
        locked.append(v)
        phi = v / d
        pairs.append(EigenPair(lam, _orient(grid, phi, len(pairs))))
    cache[key] = pairs
    return pairs


def _orient(grid: Grid, phi: np.ndarray, index: int) -> np.ndarray:
    if index == 0:
        return phi if phi.sum() > 0 else -phi
    plus = grid.mass(np.maximum(phi, 0.0))
    minus = grid.mass(np.minimum(phi, 0.0))
    if abs(plus - minus) <= 1e-10 * (plus + minus):
        first = phi[np.flatnonzero(np.abs(phi) > 1e-12 * np.abs(phi).max())[0]]
        return phi if first > 0 else -phi
    return phi if plus > minus else -phi


def _bessel_zeros(nu: float, count: int) -> np.ndarray:
    """First ``count`` positive zeros of J_nu (nu >= -1/2)."""
    zeros = []
    step = 0.1
    x = 1e-6 if nu >= 0 else 1e-3
    fx = special.jv(nu, x)
    while len(zeros) < count:
        y = x + step
        fy = special.jv(nu, y)
        if fx == 0.0:
            zeros.append(x)
        elif fx * fy < 0:
            zeros.append(optimize.brentq(lambda t: special.jv(nu, t), x, y, xtol=1e-15))
        x, fx = y, fy
    return np.array(zeros[:count])


def analytic_eigenvalues(domain: Domain, k: int = 2) -> np.ndarray:
    """Lowest ``k`` distinct Dirichlet eigenvalues of the continuous domain.

    Used as an oracle for the discrete spectrum and to supply lambda_2 of a
    ball, whose second eigenfunction is not radial.
    """
    if domain.kind == "interval":
        L = domain.extents[0]
        return (np.pi * np.arange(1, k + 1) / L) ** 2
    if domain.kind == "rectangle":
        lx, ly = domain.extents
        m = np.arange(1, k + 2)
        vals = ((np.pi * m[:, None] / lx) ** 2 + (np.pi * m[None, :] / ly) ** 2).ravel()
        return np.unique(np.round(vals, 12))[:k]
    R, N = domain.extents[0], domain.dim
    nu = N / 2 - 1
    orders = range(2) if N == 1 else range(k + 1)
    vals = np.concatenate([_bessel_zeros(nu + l, k) for l in orders]) ** 2 / R**2
    return np.unique(np.round(vals, 12))[:k]
