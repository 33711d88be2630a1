"""Numerical integration primitives.

Gauss-Legendre tensor rules on the unit square (optionally split at
interior breakpoints), quadrature on spheres and balls, grid-cell ball
weights for sampled maps, and the radial moments of the Newtonian kernel
whose weak singularity is absorbed analytically by the polar Jacobian.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import gamma, pi

import numpy as np
from scipy.special import roots_jacobi

from .exceptions import DomainError, UnsupportedDimensionError

__all__ = [
    "BallQuadrature",
    "gauss_legendre_01",
    "composite_gauss_legendre",
    "gauss_legendre_unit_square",
    "unit_ball_volume",
    "fundamental_solution",
    "fundamental_solution_radial",
    "sphere_quadrature",
    "polar_ball_quadrature",
    "grid_ball_quadrature",
    "radial_gamma_moment",
]


@lru_cache(maxsize=64)
def _leggauss01(m):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def gauss_legendre_01(m):
    """Return ``m`` Gauss-Legendre nodes and weights mapped to [0, 1].

    The arrays are fresh copies so callers may modify them.
    """
    if m < 1:
        raise ValueError("need at least one node")
    x, w = _leggauss01(int(m))
    return x.copy(), w.copy()


def composite_gauss_legendre(breaks, m):
    """Composite Gauss-Legendre rule on [breaks[0], breaks[-1]].

    ``m`` nodes are placed in every sub-interval; degenerate sub-intervals
    are skipped.
    """
    breaks = np.asarray(breaks, dtype=float)
    x01, w01 = _leggauss01(int(m))
    nodes, weights = [], []
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= 0.0:
            continue
        nodes.append(a + (b - a) * x01)
        weights.append((b - a) * w01)
    return np.concatenate(nodes), np.concatenate(weights)


def _unit_breaks(extra):
    inner = sorted(float(c) for c in extra if 1e-12 < c < 1.0 - 1e-12)
    return [0.0, *inner, 1.0]


def gauss_legendre_unit_square(f, nodes_1d=32, s_breaks=(), t_breaks=()):
    """Integrate ``f(s, t)`` over [0, 1]^2 with a tensor Gauss-Legendre rule.

    Parameters
    ----------
    f : callable
        Called once with two flat arrays ``s`` and ``t`` of equal length M;
        must return an array whose leading axis has length M. Trailing axes
        (vector or matrix valued integrands) are integrated componentwise.
    nodes_1d : int
        Nodes per axis and per sub-interval. Without breakpoints the rule is
        exact for polynomials of degree ``2 * nodes_1d - 1`` in each variable.
    s_breaks, t_breaks : sequence of float
        Interior points at which each axis is split. Points outside (0, 1)
        are ignored. ``t_breaks`` may also be a callable ``s -> sequence``,
        which splits the inner axis along curves such as a slanted kink line.

    Returns
    -------
    float or ndarray
    """
    s, ws = composite_gauss_legendre(_unit_breaks(s_breaks), nodes_1d)
    if callable(t_breaks):
        rows = [composite_gauss_legendre(_unit_breaks(np.atleast_1d(t_breaks(si))), nodes_1d)
                for si in s]
        S = np.concatenate([np.full(len(t), si) for si, (t, _) in zip(s, rows)])
        T = np.concatenate([t for t, _ in rows])
        W = np.concatenate([wi * w for wi, (_, w) in zip(ws, rows)])
    else:
        t, wt = composite_gauss_legendre(_unit_breaks(t_breaks), nodes_1d)
        S, T = np.meshgrid(s, t, indexing="ij")
        W = np.outer(ws, wt).ravel()
    values = np.asarray(f(S.ravel(), T.ravel()), dtype=float)
    out = np.tensordot(W, values, axes=(0, 0))
    return float(out) if np.ndim(out) == 0 else out


def unit_ball_volume(n):
    """Volume of the unit ball in R^n."""
    return pi ** (n / 2.0) / gamma(n / 2.0 + 1.0)


def fundamental_solution_radial(s, n):
    """Newtonian kernel as a function of the radius ``s = |x|``."""
    if n < 3:
        raise UnsupportedDimensionError(f"fundamental solution needs n >= 3, got {n}")
    s = np.asarray(s, dtype=float)
    return s ** (2.0 - n) / (n * unit_ball_volume(n) * (2.0 - n))


def fundamental_solution(x, n=None):
    """Gamma(x) = |x|^(2-n) / (n w_n (2-n)) for n >= 3.

    ``n`` defaults to ``len(x)``. Raises DomainError at the origin; use
    :func:`radial_gamma_moment` to integrate across the singularity.
    """
    x = np.asarray(x, dtype=float)
    if n is None:
        n = x.shape[-1]
    r = np.linalg.norm(x, axis=-1)
    if np.any(r == 0.0):
        raise DomainError("fundamental solution is singular at x = 0")
    out = fundamental_solution_radial(r, n)
    return float(out) if np.ndim(out) == 0 else out


@lru_cache(maxsize=32)
def _sphere_rule(n, m):
    if n < 2:
        raise UnsupportedDimensionError("sphere quadrature needs n >= 2")
    n_phi = 2 * m
    phi = 2.0 * pi * np.arange(n_phi) / n_phi
    # last two coordinates: the circle
    dirs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    weights = np.full(n_phi, 2.0 * pi / n_phi)
    # add polar angles one at a time; angle with weight sin^k, k = 1..n-2
    for k in range(1, n - 1):
        u, wu = roots_jacobi(m, (k - 1) / 2.0, (k - 1) / 2.0)
        sin_part = np.sqrt(1.0 - u**2)
        new_dirs = np.concatenate(
            [u[:, None, None].repeat(len(dirs), 1), sin_part[:, None, None] * dirs[None]],
            axis=2,
        ).reshape(-1, dirs.shape[1] + 1)
        weights = (wu[:, None] * weights[None, :]).ravel()
        dirs = new_dirs
    return dirs, weights


def sphere_quadrature(n, m=16):
    """Product quadrature on the unit sphere S^(n-1).

    Hyperspherical angles get Gauss-Jacobi rules (which carry the sin^k
    Jacobian factors) and the azimuth a periodic trapezoid rule with 2m
    points. Returns ``(directions, weights)``; weights sum to the surface
    area ``n * w_n``.
    """
    dirs, w = _sphere_rule(int(n), int(m))
    return dirs.copy(), w.copy()


@dataclass
class BallQuadrature:
    """Nodes and nonnegative weights for integration over a ball."""

    center: np.ndarray
    radius: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def volume(self):
        return float(self.weights.sum())

    def integrate(self, values):
        """Weighted sum of per-node values (leading axis = nodes)."""
        return np.tensordot(self.weights, np.asarray(values, dtype=float), axes=(0, 0))

    def average(self, values):
        return self.integrate(values) / self.volume


def polar_ball_quadrature(center, radius, radial_nodes=64, angular_nodes=64):
    """Polar product rule on B_radius(center).

    Radial Gauss-Legendre nodes carry the s^(n-1) Jacobian; the angular
    part is :func:`sphere_quadrature` with ``angular_nodes // 2`` polar
    points (so the azimuth has ``angular_nodes`` points).
    """
    center = np.asarray(center, dtype=float)
    n = center.shape[0]
    s, ws = gauss_legendre_01(radial_nodes)
    s, ws = radius * s, radius * ws * (radius * s) ** (n - 1)
    dirs, wd = sphere_quadrature(n, max(1, angular_nodes // 2))
    nodes = center + (s[:, None, None] * dirs[None, :, :]).reshape(-1, n)
    weights = np.outer(ws, wd).ravel()
    return BallQuadrature(center, float(radius), nodes, weights)


def grid_ball_quadrature(points, cell_volume, center, radius):
    """Cell-membership rule: each grid node within the closed ball counts
    with the full cell volume.

    Returns ``(quadrature, index)`` where ``index`` selects the member
    nodes from ``points``.
    """
    points = np.asarray(points, dtype=float)
    center = np.asarray(center, dtype=float)
    d = np.linalg.norm(points - center, axis=1)
    index = np.flatnonzero(d <= radius * (1.0 + 1e-12))
    weights = np.full(index.size, float(cell_volume))
    return BallQuadrature(center, float(radius), points[index], weights), index


def radial_gamma_moment(rho, n, g=None, nodes=32):
    """Integral of (Gamma(x) - Gamma(rho)) g(|x|) over the ball B_rho(0).

    ``g`` maps an array of radii to the spherical mean of the integrand at
    those radii (``None`` means g = 1). In polar form the integrand is
    n w_n s^(n-1) (Gamma(s) - Gamma(rho)) g(s); the factor s^(n-1) cancels
    the |x|^(2-n) singularity, so a plain Gauss-Legendre rule on [0, rho]
    applies.
    """
    if n < 3:
        raise UnsupportedDimensionError(f"radial Gamma moments need n >= 3, got {n}")
    if rho <= 0.0:
        return 0.0
    x, w = gauss_legendre_01(nodes)
    s = rho * x
    c = 1.0 / (n * unit_ball_volume(n) * (2.0 - n))
    # s^(n-1) * Gamma(s) = c * s, written without the singular factor
    kernel = c * s - s ** (n - 1) * float(fundamental_solution_radial(rho, n))
    gs = np.ones_like(s) if g is None else np.asarray(g(s), dtype=float)
    return float(n * unit_ball_volume(n) * rho * np.sum(w * kernel * gs))
