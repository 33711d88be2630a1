"""h-monotonicity of point pairs and sampled maps.

A map T is h-monotone when every pair of graph points satisfies

    h(x - xi) + h(y - zeta) <= h(x - zeta) + h(y - xi),   xi = Tx, zeta = Ty.

This module evaluates that pair inequality, the averaged-Hessian matrix A
and weight Phi that turn it into a bilinear form, and the double-integral
representations of the auxiliary functions G and P_{A,b}. Every integral
over [0, 1]^2 has an affine argument z(s, t) = z0 + s ds + t dt inside a
kernel that is only Hoelder continuous where z vanishes; the square is
therefore split at the point of closest approach of z to the origin
before the Gauss-Legendre rule is applied.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InconsistencyError, InputError
from .quadrature import gauss_legendre_unit_square

__all__ = [
    "SampledMap",
    "QuadratureSpec",
    "MonotonicityReport",
    "grid_points",
    "pair_defect",
    "monotonicity_slack",
    "a_matrix",
    "phi_weight",
    "defect_bilinear_identity",
    "ellipticity_sandwich_check",
    "g_direct",
    "g_eval",
    "p_ab_direct",
    "p_ab_eval",
    "check_map_monotone",
    "save_sampled_map",
    "load_sampled_map",
]


# -- sampled maps -------------------------------------------------------------


def grid_points(box_min, box_max, grid_shape):
    """Tensor grid nodes of an axis-aligned box, C order (last axis fastest)."""
    axes = [np.linspace(a, b, int(m)) for a, b, m in zip(box_min, box_max, grid_shape)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


@dataclass(eq=False)
class SampledMap:
    """Single-valued samples T(x_i) of a map on the tensor grid of a box.

    ``values`` has shape ``(N, n)`` with rows ordered like
    :func:`grid_points`.
    """

    box_min: np.ndarray
    box_max: np.ndarray
    grid_shape: tuple
    values: np.ndarray
    points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.box_min = np.asarray(self.box_min, dtype=float)
        self.box_max = np.asarray(self.box_max, dtype=float)
        self.grid_shape = tuple(int(m) for m in self.grid_shape)
        n = self.box_min.shape[0]
        if self.box_max.shape != (n,) or len(self.grid_shape) != n:
            raise InputError("box corners and grid shape must share one dimension")
        if np.any(self.box_max <= self.box_min) or min(self.grid_shape) < 2:
            raise InputError("grid spacing must be positive on every axis")
        self.points = grid_points(self.box_min, self.box_max, self.grid_shape)
        self.values = np.asarray(self.values, dtype=float).reshape(self.points.shape)
        if not np.all(np.isfinite(self.values)):
            raise InputError("map values must be finite")

    @classmethod
    def from_function(cls, func, box_min, box_max, grid_shape):
        """Sample ``func`` (acting on an ``(N, n)`` array of points) on the grid."""
        pts = grid_points(box_min, box_max, grid_shape)
        return cls(box_min, box_max, grid_shape, func(pts))

    @property
    def dimension(self):
        return self.points.shape[1]

    @property
    def spacing(self):
        return (self.box_max - self.box_min) / (np.asarray(self.grid_shape) - 1)

    @property
    def cell_volume(self):
        return float(np.prod(self.spacing))

    @property
    def diameter(self):
        return float(np.linalg.norm(self.box_max - self.box_min))

    def with_values(self, values):
        return SampledMap(self.box_min, self.box_max, self.grid_shape, values)

    def contains_ball(self, center, radius):
        center = np.asarray(center, dtype=float)
        return bool(np.all(center - radius >= self.box_min - 1e-12)
                    and np.all(center + radius <= self.box_max + 1e-12))

    def node_index(self, point):
        """Index of the grid node nearest to ``point``."""
        d = np.linalg.norm(self.points - np.asarray(point, dtype=float), axis=1)
        return int(np.argmin(d))


def save_sampled_map(path, smap):
    """Write the plain-text map format.

    The first line is ``# {"n": ..., "grid_shape": [...], "box_min": [...],
    "box_max": [...]}``; every following row is ``x_1 .. x_n T_1 .. T_n``.
    """
    header = json.dumps({
        "n": smap.dimension,
        "grid_shape": list(smap.grid_shape),
        "box_min": smap.box_min.tolist(),
        "box_max": smap.box_max.tolist(),
    })
    np.savetxt(path, np.hstack([smap.points, smap.values]), header=header,
               comments="# ", fmt="%.17g")


def load_sampled_map(path):
    """Read a map from the plain-text format or from a JSON payload.

    A JSON payload carries the header keys plus ``values`` (list of rows).
    Plain-text rows must reproduce the tensor grid of the header box.
    """
    with open(path) as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        payload = json.loads(stripped)
        return _map_from_header(payload, np.asarray(payload["values"], dtype=float))
    first, _, rest = text.partition("\n")
    if not first.startswith("#"):
        raise InputError(f"{path}: missing header line")
    try:
        header = json.loads(first.lstrip("#").strip())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: bad header: {exc}") from None
    rows = np.loadtxt(rest.splitlines(), ndmin=2)
    n = int(header["n"])
    if rows.shape[1] != 2 * n:
        raise InputError(f"{path}: expected {2 * n} columns, got {rows.shape[1]}")
    smap = _map_from_header(header, rows[:, n:])
    if rows.shape[0] != smap.points.shape[0] or not np.allclose(rows[:, :n], smap.points,
                                                                 rtol=0, atol=1e-9):
        raise InputError(f"{path}: node coordinates do not match the header grid")
    return smap


def _map_from_header(header, values):
    n = int(header["n"])
    smap = SampledMap(header["box_min"], header["box_max"], header["grid_shape"], values)
    if smap.dimension != n:
        raise InputError("header dimension disagrees with box corners")
    return smap


# -- pair inequality ----------------------------------------------------------


def pair_defect(cost, x, y, xi, zeta):
    """h(x - zeta) + h(y - xi) - h(x - xi) - h(y - zeta).

    Nonnegative exactly when the pair (x, xi), (y, zeta) satisfies the
    monotonicity inequality. Broadcasts over leading axes.
    """
    x, y, xi, zeta = (np.asarray(v, dtype=float) for v in (x, y, xi, zeta))
    out = cost.h(x - zeta) + cost.h(y - xi) - cost.h(x - xi) - cost.h(y - zeta)
    return float(out) if np.ndim(out) == 0 else out


def monotonicity_slack(cost, scale):
    """Absolute tolerance below which a pair defect counts as a violation."""
    return 1e-9 * (1.0 + scale**cost.exponent)


@dataclass
class QuadratureSpec:
    """Gauss-Legendre settings for [0, 1]^2 integrals.

    ``nodes_1d`` is the starting node count per axis; dual-path checks
    double it until agreement within ``tolerance`` (relative) or until
    ``max_nodes`` is reached.
    """

    nodes_1d: int = 32
    tolerance: float = 1e-10
    max_nodes: int = 256

    def __post_init__(self):
        if self.nodes_1d < 2:
            raise InputError("nodes_1d must be >= 2")
        if self.tolerance <= 0:
            raise InputError("tolerance must be positive")


def _breakpoints(z0, ds, dt):
    """Split points for |z0 + s ds + t dt| on [0,1]^2.

    The outer axis is split at the least-squares closest approach (s*, t*);
    the inner axis along the line through it in the direction where the
    affine map is weakest. When ds and dt are parallel that line is the
    whole kink set of the integrand.
    """
    B = np.stack([ds, dt], axis=1)
    if not np.any(B):
        return (), ()
    st, *_ = np.linalg.lstsq(B, -z0, rcond=None)
    v = np.linalg.svd(B)[2][-1]
    if abs(v[0]) <= 1e-12 * abs(v[1]):
        return (st[0],), (st[1],)
    slope = v[1] / v[0]
    return (st[0],), lambda s: (st[1] + (s - st[0]) * slope,)


def _affine_square_integral(kernel, z0, ds, dt, nodes_1d):
    z0, ds, dt = (np.asarray(v, dtype=float) for v in (z0, ds, dt))
    sb, tb = _breakpoints(z0, ds, dt)

    def f(s, t):
        return kernel(z0 + s[:, None] * ds + t[:, None] * dt)

    return gauss_legendre_unit_square(f, nodes_1d, sb, tb)


def _nodes(quad):
    return (quad or QuadratureSpec()).nodes_1d


def a_matrix(cost, x, y, xi, zeta, quad=None):
    """A(x, y; xi, zeta) = int_0^1 int_0^1 D^2h(y - zeta + s(zeta - xi) + t(x - y)) dt ds."""
    x, y, xi, zeta = (np.asarray(v, dtype=float) for v in (x, y, xi, zeta))
    A = _affine_square_integral(cost.hess, y - zeta, zeta - xi, x - y, _nodes(quad))
    return 0.5 * (A + A.T)


def phi_weight(x, y, xi, zeta, p, quad=None):
    """Phi(x, y; xi, zeta) = int int |y - zeta + s(zeta - xi) + t(x - y)|^(p-2) dt ds."""
    x, y, xi, zeta = (np.asarray(v, dtype=float) for v in (x, y, xi, zeta))

    def kernel(z):
        return np.linalg.norm(z, axis=1) ** (p - 2.0)

    return _affine_square_integral(kernel, y - zeta, zeta - xi, x - y, _nodes(quad))


def _refine(direct, integral_at, quad):
    """Evaluate ``integral_at(nodes)`` with doubling until it matches ``direct``."""
    quad = quad or QuadratureSpec()
    m = quad.nodes_1d
    value = integral_at(m)
    while abs(value - direct) > quad.tolerance * (1.0 + abs(direct)) and 2 * m <= quad.max_nodes:
        m *= 2
        value = integral_at(m)
    return value


def defect_bilinear_identity(cost, x, y, xi, zeta, quad=None):
    """Return (pair_defect, <A (x - y), xi - zeta>); the two agree exactly in
    exact arithmetic."""
    x, y, xi, zeta = (np.asarray(v, dtype=float) for v in (x, y, xi, zeta))
    lhs = pair_defect(cost, x, y, xi, zeta)
    dx, dz = x - y, xi - zeta

    def rhs_at(m):
        A = a_matrix(cost, x, y, xi, zeta, QuadratureSpec(m))
        return float(dx @ A @ dz)

    return lhs, _refine(lhs, rhs_at, quad)


def ellipticity_sandwich_check(cost, x, y, xi, zeta, v, bounds, quad=None, slack=1e-9):
    """Return (lambda Phi |v|^2, <A v, v>, Lambda Phi |v|^2).

    A and Phi use the same nodes, so the sandwich holds node by node; a
    violation beyond ``slack`` (relative to the upper value) raises
    InconsistencyError.
    """
    v = np.asarray(v, dtype=float)
    lam, Lam = bounds
    A = a_matrix(cost, x, y, xi, zeta, quad)
    phi = phi_weight(x, y, xi, zeta, cost.exponent, quad)
    vv = float(v @ v)
    lower, value, upper = lam * phi * vv, float(v @ A @ v), Lam * phi * vv
    tol = slack * (1.0 + abs(upper))
    if value < lower - tol or value > upper + tol:
        raise InconsistencyError(
            f"ellipticity sandwich violated: {lower!r} <= {value!r} <= {upper!r} fails"
        )
    return lower, value, upper


def g_direct(cost, z1, z2, z3):
    """G(z1, z2, z3) = h(z2 - z3) - h(z1 - z3) - h(z2) + h(z1)."""
    z1, z2, z3 = (np.asarray(v, dtype=float) for v in (z1, z2, z3))
    out = cost.h(z2 - z3) - cost.h(z1 - z3) - cost.h(z2) + cost.h(z1)
    return float(out) if np.ndim(out) == 0 else out


def g_eval(cost, z1, z2, z3, quad=None):
    """Return (direct, integral) for G.

    integral = int_0^1 int_0^1 <D^2h(z1 + s(z2 - z1) - t z3) z3, z1 - z2> ds dt.
    """
    z1, z2, z3 = (np.asarray(v, dtype=float) for v in (z1, z2, z3))
    direct = g_direct(cost, z1, z2, z3)
    w = z1 - z2

    def integral_at(m):
        if not np.any(z3) or not np.any(w):
            return 0.0

        def kernel(z):
            return cost.hess(z) @ z3 @ w

        return _affine_square_integral(kernel, z1, z2 - z1, -z3, m)

    return direct, _refine(direct, integral_at, quad)


def p_ab_direct(cost, A, b, x, y):
    """P_{A,b}(x, y) = h(y-Ax-b) - h(y-Ay-b) + h(x-Ay-b) - h(x-Ax-b)."""
    A, b, x, y = (np.asarray(v, dtype=float) for v in (A, b, x, y))
    Ax, Ay = x @ A.T, y @ A.T
    out = cost.h(y - Ax - b) - cost.h(y - Ay - b) + cost.h(x - Ay - b) - cost.h(x - Ax - b)
    return float(out) if np.ndim(out) == 0 else out


def p_ab_eval(cost, A, b, x, y, quad=None):
    """Return (direct, integral) for P_{A,b}(x, y).

    integral = int int <D^2h(x - Ay - b + s(Ay - Ax) + t(y - x)) (y - x), Ay - Ax> ds dt.
    """
    A, b, x, y = (np.asarray(v, dtype=float) for v in (A, b, x, y))
    direct = p_ab_direct(cost, A, b, x, y)
    d, e = y - x, A @ (y - x)

    def integral_at(m):
        if not np.any(d) or not np.any(e):
            return 0.0

        def kernel(z):
            return cost.hess(z) @ d @ e

        return _affine_square_integral(kernel, x - A @ y - b, e, d, m)

    return direct, _refine(direct, integral_at, quad)


# -- map-level check ----------------------------------------------------------


@dataclass
class MonotonicityReport:
    """Outcome of a pair scan.

    ``worst_defect`` is the most negative pair defect seen (``inf`` when no
    pair was tested); ``worst_pair`` holds the four vectors (x, y, xi, zeta)
    attaining it.
    """

    pairs_tested: int = 0
    violations: int = 0
    worst_defect: float = float("inf")
    worst_pair: tuple = None
    slack: float = 0.0

    @property
    def passed(self):
        return self.violations == 0

    def merge(self, other):
        """Combine two partial reports (commutative and associative)."""
        if other.worst_defect < self.worst_defect:
            worst, pair = other.worst_defect, other.worst_pair
        else:
            worst, pair = self.worst_defect, self.worst_pair
        return MonotonicityReport(self.pairs_tested + other.pairs_tested,
                                  self.violations + other.violations,
                                  worst, pair, max(self.slack, other.slack))

    def to_record(self):
        rec = {
            "pairs_tested": self.pairs_tested,
            "violations": self.violations,
            "worst_defect": self.worst_defect,
            "slack": self.slack,
            "passed": self.passed,
        }
        if self.worst_pair is not None:
            for name, vec in zip(("x", "y", "xi", "zeta"), self.worst_pair):
                rec[f"worst_{name}"] = " ".join(repr(float(c)) for c in vec)
        return rec


def _scan_pairs(cost, points, values, i, j, slack):
    d = pair_defect(cost, points[i], points[j], values[i], values[j])
    k = int(np.argmin(d))
    pair = (points[i[k]], points[j[k]], values[i[k]], values[j[k]])
    return MonotonicityReport(int(d.size), int(np.count_nonzero(d < -slack)),
                              float(d[k]), pair, slack)


def _sample_pairs(points, budget, rng):
    """Pairs stratified by distance: a third among nearest neighbours, a
    third among mid-range neighbours, and a third uniformly at random."""
    from scipy.spatial import cKDTree

    N, n = points.shape
    k_near = min(N - 1, 2 * n)
    k_mid = min(N - 1, 16 * n)
    tree = cKDTree(points)
    _, nbr = tree.query(points, k=k_mid + 1)
    nbr = nbr[:, 1:]
    third = budget // 3
    i_near = rng.integers(0, N, third)
    j_near = nbr[i_near, rng.integers(0, k_near, third)]
    i_mid = rng.integers(0, N, third)
    j_mid = nbr[i_mid, rng.integers(k_near, k_mid, third)] if k_mid > k_near else \
        nbr[i_mid, rng.integers(0, k_mid, third)]
    rest = budget - 2 * third
    i_far = rng.integers(0, N, rest)
    j_far = (i_far + rng.integers(1, N, rest)) % N
    return np.concatenate([i_near, i_mid, i_far]), np.concatenate([j_near, j_mid, j_far])


def check_map_monotone(cost, smap, pair_budget=1_000_000, seed=0, slack=None, block=200_000):
    """Scan node pairs of a sampled map for violations of h-monotonicity.

    All N(N-1)/2 pairs are tested when they fit in ``pair_budget``;
    otherwise a seeded sample of ``pair_budget`` pairs stratified by
    inter-node distance. A pair is a violation when its defect lies below
    ``-slack``; the default slack is :func:`monotonicity_slack` at the
    diameter of the bounding box of nodes and values.
    """
    if pair_budget < 1:
        raise InputError("pair_budget must be >= 1")
    points, values = smap.points, smap.values
    if slack is None:
        both = np.vstack([points, values])
        scale = float(np.linalg.norm(both.max(axis=0) - both.min(axis=0)))
        slack = monotonicity_slack(cost, scale)
    N = points.shape[0]
    total = N * (N - 1) // 2
    report = MonotonicityReport(slack=slack)
    if total == 0:
        return report
    if total <= pair_budget:
        rows = max(1, block // N)
        for start in range(0, N - 1, rows):
            ii, jj = [], []
            for a in range(start, min(start + rows, N - 1)):
                jj.append(np.arange(a + 1, N))
                ii.append(np.full(N - a - 1, a))
            i, j = np.concatenate(ii), np.concatenate(jj)
            report = report.merge(_scan_pairs(cost, points, values, i, j, slack))
        return report
    rng = np.random.default_rng(seed)
    i, j = _sample_pairs(points, int(pair_budget), rng)
    for s in range(0, i.size, block):
        report = report.merge(_scan_pairs(cost, points, values, i[s:s + block],
                                          j[s:s + block], slack))
    return report
