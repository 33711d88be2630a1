"""Certified h-monotone maps and deliberate non-monotone controls.

Optimal assignments for the cost h(x - y) are 2-cycle optimal, hence
h-monotone on their support; they serve as a source of verified test
maps. Analytic generators (identity, translation, nonnegative scaling)
and negative controls (reflection, a shuffled optimal assignment) are
also provided. Every generated map is verified before it is returned.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import ndtri

from .exceptions import ControlFailureError, GeneratorRejectedError, InputError
from .monotone_core import SampledMap, check_map_monotone, grid_points, monotonicity_slack, \
    pair_defect

__all__ = [
    "Assignment",
    "Density",
    "MAX_POINTS",
    "solve_discrete_ot",
    "density_quantile_points",
    "make_generator_map",
    "make_negative_map",
]

MAX_POINTS = 512


@dataclass(eq=False)
class Assignment:
    """Bijection ``i -> permutation[i]`` from sources to targets."""

    sources: np.ndarray
    targets: np.ndarray
    permutation: np.ndarray
    total_cost: float

    def mapped(self):
        """Targets reordered so that row i is the image of source i."""
        return self.targets[self.permutation]

    def to_record(self):
        return {"pairs": [(int(i), int(j)) for i, j in enumerate(self.permutation)],
                "total_cost": self.total_cost}


def solve_discrete_ot(cost, sources, targets, max_points=MAX_POINTS):
    """Globally optimal assignment for C_ij = h(x_i - y_j).

    Uses the exact shortest-augmenting-path solver of
    :func:`scipy.optimize.linear_sum_assignment`. ``max_points`` caps the
    problem size (the solver is cubic in N).
    """
    X = np.asarray(sources, dtype=float)
    Y = np.asarray(targets, dtype=float)
    if X.ndim != 2 or Y.ndim != 2 or X.shape != Y.shape:
        raise InputError(f"sources and targets must have equal shapes, got {X.shape} and {Y.shape}")
    if X.shape[0] > max_points:
        raise InputError(f"{X.shape[0]} points exceed the cap of {max_points}")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
        raise InputError("points must be finite")
    C = cost.h(X[:, None, :] - Y[None, :, :])
    rows, cols = linear_sum_assignment(C)
    perm = np.empty(X.shape[0], dtype=int)
    perm[rows] = cols
    return Assignment(X, Y, perm, float(C[rows, cols].sum()))


@dataclass
class Density:
    """Named target-density preset with product structure.

    ``kind`` is ``"uniform"`` (on ``box``), ``"gaussian"`` (``center``,
    ``sigma``) or ``"two_bump"`` (two Gaussians at ``center -/+ separation``
    along the first axis, Gaussian across the others).
    """

    kind: str = "gaussian"
    center: tuple = None
    sigma: float = 0.15
    separation: float = 0.2

    def marginal_quantiles(self, levels, axis, box_min, box_max):
        levels = np.asarray(levels, dtype=float)
        lo, hi = box_min[axis], box_max[axis]
        c = 0.5 * (lo + hi) if self.center is None else float(self.center[axis])
        if self.kind == "uniform":
            return lo + (hi - lo) * levels
        if self.kind == "gaussian" or (self.kind == "two_bump" and axis > 0):
            return c + self.sigma * ndtri(levels)
        if self.kind == "two_bump":
            return _mixture_quantile(levels, c - self.separation, c + self.separation, self.sigma)
        raise InputError(f"unknown density preset {self.kind!r}")


def _mixture_quantile(levels, m1, m2, sigma):
    from scipy.stats import norm

    t = np.linspace(min(m1, m2) - 8 * sigma, max(m1, m2) + 8 * sigma, 20001)
    cdf = 0.5 * (norm.cdf(t, m1, sigma) + norm.cdf(t, m2, sigma))
    return np.interp(levels, cdf, t)


def density_quantile_points(density, box_min, box_max, grid_shape, jitter=0.1, seed=0):
    """Target cloud with one point per grid node.

    Cell-centred quantile levels are pushed through the per-axis quantile
    functions of ``density``; seeded Gaussian jitter of ``jitter`` grid
    spacings is added and the cloud is shuffled.
    """
    box_min, box_max = np.asarray(box_min, float), np.asarray(box_max, float)
    levels = grid_points(np.zeros(len(grid_shape)), np.ones(len(grid_shape)), grid_shape)
    shape = np.asarray(grid_shape)
    levels = (levels * (shape - 1) + 0.5) / shape
    pts = np.column_stack([density.marginal_quantiles(levels[:, k], k, box_min, box_max)
                           for k in range(levels.shape[1])])
    rng = np.random.default_rng(seed)
    spacing = (box_max - box_min) / (shape - 1)
    pts = pts + jitter * spacing * rng.normal(size=pts.shape)
    return pts[rng.permutation(pts.shape[0])]


def _grid(grid):
    if isinstance(grid, SampledMap):
        return grid.box_min, grid.box_max, grid.grid_shape
    return grid


def _verify(cost, smap, pair_budget, seed):
    report = check_map_monotone(cost, smap, pair_budget=pair_budget, seed=seed)
    if not report.passed:
        raise GeneratorRejectedError(
            f"generated map has {report.violations} violating pairs "
            f"(worst defect {report.worst_defect:.3e})", report)
    return report


def make_generator_map(kind, cost, grid, *, shift=None, factor=None, density=None,
                       jitter=0.1, seed=0, max_points=MAX_POINTS, pair_budget=2_000_000):
    """Build a map on ``grid`` and verify it is h-monotone.

    Parameters
    ----------
    kind : {"identity", "translation", "scaling", "ot_grid"}
    cost : CostFunction
    grid : SampledMap or (box_min, box_max, grid_shape)
        Only the grid geometry is used.
    shift : translation vector for ``"translation"``.
    factor : s >= 0 for ``"scaling"`` (T x = s x).
    density : :class:`Density` of the target cloud for ``"ot_grid"``; the
        source measure is uniform on the grid nodes.

    Returns
    -------
    SampledMap

    Raises
    ------
    GeneratorRejectedError
        When the constructed map fails :func:`check_map_monotone`.
    """
    box_min, box_max, shape = _grid(grid)
    pts = grid_points(box_min, box_max, shape)
    if kind == "identity":
        values = pts.copy()
    elif kind == "translation":
        values = pts + np.asarray(shift, dtype=float)
    elif kind == "scaling":
        if factor is None or factor < 0:
            raise InputError("scaling needs factor >= 0")
        values = factor * pts
    elif kind == "ot_grid":
        targets = density_quantile_points(density or Density(), box_min, box_max, shape,
                                          jitter=jitter, seed=seed)
        values = solve_discrete_ot(cost, pts, targets, max_points=max_points).mapped()
    else:
        raise InputError(f"unknown generator {kind!r}")
    smap = SampledMap(box_min, box_max, shape, values)
    _verify(cost, smap, pair_budget, seed)
    return smap


def make_negative_map(kind, cost, grid, *, density=None, jitter=0.1, seed=0,
                      max_points=MAX_POINTS, pair_budget=2_000_000):
    """Build a map that must fail the monotonicity check.

    ``"reflection"`` is T x = -x. ``"shuffled_ot"`` takes an optimal
    assignment and swaps the targets of two sources whose swap strictly
    increases the cost, which by 2-cycle optimality yields a violating
    pair. Raises ControlFailureError if the result passes anyway.
    """
    box_min, box_max, shape = _grid(grid)
    pts = grid_points(box_min, box_max, shape)
    rng = np.random.default_rng(seed)
    if kind == "reflection":
        values = -pts
    elif kind == "shuffled_ot":
        targets = density_quantile_points(density or Density(), box_min, box_max, shape,
                                          jitter=jitter, seed=seed)
        values = solve_discrete_ot(cost, pts, targets, max_points=max_points).mapped()
        N = pts.shape[0]
        both = np.vstack([pts, values])
        margin = 10.0 * monotonicity_slack(cost, float(np.linalg.norm(np.ptp(both, axis=0))))
        for _ in range(1000):
            i, j = rng.choice(N, size=2, replace=False)
            if pair_defect(cost, pts[i], pts[j], values[j], values[i]) < -margin:
                values[[i, j]] = values[[j, i]]
                break
    else:
        raise InputError(f"unknown negative control {kind!r}")
    smap = SampledMap(box_min, box_max, shape, values)
    report = check_map_monotone(cost, smap, pair_budget=pair_budget, seed=seed)
    if report.passed:
        raise ControlFailureError("negative control passed the monotonicity check", report)
    return smap
