"""Local L-infinity estimate for u = T - A x - b and the Green identity on balls.

For an h-monotone T, x0, R and 0 < beta < 1 the estimate reads

    sup_{B_{beta R}} |u| <= (C k1 Delta^((p-1)/(n+p-1)))^(1/(p-1))   if Delta <= Delta0
    sup_{B_{beta R}} |u| <= (C k2 R^-n Delta)^(1/(p-1))              if Delta >= Delta0

with Delta = int_{B_R} |u|^(p-1), Delta0 = ((1-beta) R / 2)^(n+p-1) (p-1)/n and

    k1 = (n/(p-1))^(-n/(n+p-1)) + (n/(p-1))^((p-1)/(n+p-1))
    k2 = (p+n-1)/(p-1) ((1-beta)/2)^(-n).

The exponents, thresholds, k1 and k2 are explicit; the overall constant C
is not, and is exposed as ``C_calibration``. :func:`calibrate_constant`
fits it on a training family of maps.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .cost_kernel import ellipticity_bounds
from .exceptions import DomainError, InputError, ProbeInvalidError, ResolutionError, \
    UnsupportedDimensionError
from .lemma_suite import j_lower_constant
from .monotone_core import g_direct
from .quadrature import gauss_legendre_01, grid_ball_quadrature, radial_gamma_moment, \
    sphere_quadrature, unit_ball_volume

__all__ = [
    "AffineFrame",
    "BallSpec",
    "EstimateReport",
    "ScalingProbe",
    "MIN_BALL_NODES",
    "residual",
    "delta_integral",
    "h_profile",
    "r_star",
    "delta_threshold",
    "branch_constant",
    "k1_factor",
    "k2_factor",
    "linfty_bound",
    "profile_table",
    "required_constant",
    "calibrate_constant",
    "scaling_exponent_probe",
    "g_lower_bound_check",
    "green_identity_residual",
]

MIN_BALL_NODES = 8


@dataclass(eq=False)
class AffineFrame:
    """The affine map x -> A x + b subtracted from T."""

    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).ravel()
        n = self.b.shape[0]
        if self.A.shape != (n, n):
            raise InputError(f"A must be {n}x{n}, got {self.A.shape}")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b))):
            raise InputError("affine frame entries must be finite")

    @classmethod
    def zero(cls, n):
        return cls(np.zeros((n, n)), np.zeros(n))

    @classmethod
    def identity(cls, n):
        return cls(np.eye(n), np.zeros(n))

    @classmethod
    def fit(cls, smap, center, radius):
        """Least-squares affine fit to the map over the nodes of a ball."""
        _, idx = grid_ball_quadrature(smap.points, 1.0, center, radius)
        X = np.hstack([smap.points[idx], np.ones((idx.size, 1))])
        coef, *_ = np.linalg.lstsq(X, smap.values[idx], rcond=None)
        return cls(coef[:-1].T, coef[-1])

    @property
    def op_norm(self):
        return float(np.linalg.norm(self.A, 2))

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.A.T + self.b


def residual(smap, frame):
    """u(x_i) = T(x_i) - A x_i - b at every node."""
    return smap.values - frame(smap.points)


@dataclass
class BallSpec:
    center: np.ndarray
    radius: float
    inner_fraction: float = 0.5

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")
        if not 0.0 < self.inner_fraction < 1.0:
            raise DomainError("inner_fraction must lie in (0, 1)")


@dataclass
class EstimateReport:
    """All quantities of the two-branch estimate for one (map, frame, ball)."""

    n: int
    p: float
    radius: float
    beta: float
    delta: float
    delta0: float
    average: float
    r_star: float
    branch: str
    bound: float
    empirical_sup: float
    calibration_C: float
    K1: float
    K2: float
    threshold_C: float

    @property
    def holds(self):
        return self.empirical_sup <= self.bound * (1.0 + 1e-12)

    def to_record(self):
        rec = asdict(self)
        rec["holds"] = self.holds
        return rec


def _ball_nodes(smap, ball, radius=None):
    radius = ball.radius if radius is None else radius
    return grid_ball_quadrature(smap.points, smap.cell_volume, ball.center, radius)


def delta_integral(smap, frame, ball, p):
    """Riemann sum of |u|^(p-1) over the grid nodes inside B_R(x0)."""
    if not smap.contains_ball(ball.center, ball.radius):
        raise InputError("ball must lie inside the map's domain box")
    bq, idx = _ball_nodes(smap, ball)
    if idx.size < MIN_BALL_NODES:
        raise ResolutionError(f"only {idx.size} grid nodes inside the ball "
                              f"(need {MIN_BALL_NODES})")
    u = residual(smap, frame)[idx]
    return float(bq.integrate(np.linalg.norm(u, axis=1) ** (p - 1.0)))


def h_profile(delta, r, C, n, p):
    """H(r) = C (Delta r^-n + r^(p-1))."""
    if r <= 0:
        raise DomainError("H(r) needs r > 0")
    return C * (delta * r ** (-n) + r ** (p - 1.0))


def r_star(delta, n, p):
    """Minimizer (n Delta / (p-1))^(1/(n+p-1)) of H over (0, inf)."""
    if delta < 0:
        raise DomainError("Delta must be nonnegative")
    return (n * delta / (p - 1.0)) ** (1.0 / (n + p - 1.0))


def delta_threshold(R, beta, n, p):
    """Delta0 = ((1-beta) R / 2)^(n+p-1) (p-1)/n."""
    if R <= 0 or not 0.0 < beta < 1.0:
        raise DomainError("need R > 0 and 0 < beta < 1")
    return (0.5 * (1.0 - beta) * R) ** (n + p - 1.0) * (p - 1.0) / n


def branch_constant(n, p, beta):
    """C(n, p, beta) such that Delta <= Delta0 iff avg^(1/(p-1)) <= C(n, p, beta) R."""
    return ((0.5 * (1.0 - beta)) ** (n + p - 1.0) * (p - 1.0)
            / (n * unit_ball_volume(n))) ** (1.0 / (p - 1.0))


def k1_factor(n, p):
    q = n / (p - 1.0)
    return q ** (-n / (n + p - 1.0)) + q ** ((p - 1.0) / (n + p - 1.0))


def k2_factor(n, p, beta):
    return (p + n - 1.0) / (p - 1.0) * (0.5 * (1.0 - beta)) ** (-n)


def _bound(delta, R, beta, n, p, C):
    if delta <= delta_threshold(R, beta, n, p):
        return "small", (C * k1_factor(n, p) * delta ** ((p - 1.0) / (n + p - 1.0))) ** (1.0 / (p - 1.0))
    return "large", (C * k2_factor(n, p, beta) * R ** (-n) * delta) ** (1.0 / (p - 1.0))


def linfty_bound(smap, frame, ball, p, C_calibration=1.0):
    """Evaluate the two-branch estimate and the empirical sup of |u| on B_{beta R}."""
    if not C_calibration > 0:
        raise DomainError("C_calibration must be positive")
    n = smap.dimension
    R, beta = float(ball.radius), float(ball.inner_fraction)
    delta = delta_integral(smap, frame, ball, p)
    branch, bound = _bound(delta, R, beta, n, p, C_calibration)
    _, inner = _ball_nodes(smap, ball, beta * R)
    u = residual(smap, frame)[inner]
    sup = float(np.linalg.norm(u, axis=1).max()) if inner.size else 0.0
    wn = unit_ball_volume(n)
    C = C_calibration
    return EstimateReport(
        n=n, p=float(p), radius=R, beta=beta, delta=delta,
        delta0=delta_threshold(R, beta, n, p),
        average=delta / (wn * R**n),
        r_star=r_star(delta, n, p),
        branch=branch, bound=float(bound), empirical_sup=sup, calibration_C=C,
        K1=(C * k1_factor(n, p)) ** (1.0 / (p - 1.0)) * wn ** (1.0 / (n + p - 1.0)),
        K2=(C * k2_factor(n, p, beta) * wn) ** (1.0 / (p - 1.0)),
        threshold_C=branch_constant(n, p, beta),
    )


def profile_table(report, count=64, span=100.0):
    """Rows (r, H(r)) on a log grid around r_star, for plotting.

    Falls back to a grid ending at (1-beta) R / 2 when Delta = 0.
    """
    center = report.r_star if report.r_star > 0 else 0.5 * (1.0 - report.beta) * report.radius
    r = center * np.logspace(-np.log10(span) / 2, np.log10(span) / 2, count)
    H = [h_profile(report.delta, ri, report.calibration_C, report.n, report.p) for ri in r]
    return np.column_stack([r, H])


def required_constant(report):
    """Smallest C_calibration for which the report's bound covers its sup."""
    if report.empirical_sup == 0.0:
        return 0.0
    unit = report.bound / report.calibration_C ** (1.0 / (report.p - 1.0))
    if unit == 0.0:
        return float("inf")
    return (report.empirical_sup / unit) ** (report.p - 1.0)


def calibrate_constant(cases, p):
    """Fit the smallest C covering every training case.

    ``cases`` is an iterable of (smap, frame, ball) triples.
    """
    return max(required_constant(linfty_bound(m, f, b, p)) for m, f, b in cases)


@dataclass
class ScalingProbe:
    slope: float
    expected: float
    branch: str
    epsilons: np.ndarray
    averages: np.ndarray
    bounds: np.ndarray


def scaling_exponent_probe(smap, frame, ball, p, epsilons, C_calibration=1.0):
    """Fit the log-log slope of the bound against (avg |u_eps|^(p-1))^(1/(p-1))
    for the family u_eps = eps u.

    The small branch predicts (p-1)/(n+p-1) and the large branch 1.
    Requires at least four epsilons spanning a decade, all in one branch.
    """
    eps = np.sort(np.asarray(epsilons, dtype=float))
    if eps.size < 4 or eps[0] <= 0 or eps[-1] / eps[0] < 10.0 * (1 - 1e-12):
        raise ProbeInvalidError("need >= 4 positive epsilons spanning one decade")
    base = frame(smap.points)
    u = smap.values - base
    reports = [linfty_bound(smap.with_values(base + e * u), frame, ball, p, C_calibration)
               for e in eps]
    branches = {r.branch for r in reports}
    if len(branches) != 1:
        raise ProbeInvalidError("scaled family crosses the branch threshold")
    avg = np.array([r.average for r in reports]) ** (1.0 / (p - 1.0))
    bounds = np.array([r.bound for r in reports])
    if np.any(avg <= 0) or np.any(bounds <= 0):
        raise ProbeInvalidError("probe needs a nonzero residual")
    slope = float(np.polyfit(np.log(avg), np.log(bounds), 1)[0])
    (branch,) = branches
    n = smap.dimension
    expected = (p - 1.0) / (n + p - 1.0) if branch == "small" else 1.0
    return ScalingProbe(slope, expected, branch, eps, avg, bounds)


def g_lower_bound_check(cost, smap, frame, node, delta, bounds=None):
    """Compare G(v1 + r w, v1, u(y)) with delta lambda C_p |u(y)|^2 g(y)^(p-2).

    Here y is grid node ``node``, v1 = y - A y - b, r = delta |u(y)|,
    w = u(y)/|u(y)| and g(y) = max(|v1|, |u(y)|). Returns ``None`` when
    u(y) = 0 (the inequality is vacuous), otherwise ``(lhs, rhs)``.
    """
    p = cost.exponent
    C_p, delta0 = j_lower_constant(p)
    if not 0.0 < delta <= delta0:
        raise DomainError(f"delta must lie in (0, {delta0}]")
    lam = (bounds or ellipticity_bounds(cost)).lam
    y = smap.points[node]
    v1 = y - frame(y)
    u = smap.values[node] - frame(y)
    nu = float(np.linalg.norm(u))
    if nu == 0.0:
        return None
    lhs = g_direct(cost, v1 + delta * u, v1, u)
    g = max(float(np.linalg.norm(v1)), nu)
    rhs = delta * lam * C_p * nu**2 * (1.0 if p == 2.0 else g ** (p - 2.0))
    return lhs, rhs


def _fd_laplacian(v, step):
    def lap(x):
        x = np.asarray(x, dtype=float)
        total = -2.0 * x.shape[1] * v(x)
        for e in np.eye(x.shape[1]):
            total = total + v(x + step * e) + v(x - step * e)
        return total / step**2

    return lap


def green_identity_residual(v, y, r, laplacian=None, nodes=16):
    """|v(y) - avg_{B_r(y)} v - (n / r^n) int_0^r rho^(n-1) int_{B_rho(y)} (Gamma - Gamma(rho)) Lap v|.

    ``v`` and ``laplacian`` act on ``(M, n)`` arrays; without ``laplacian``
    a central difference with step 1e-3 r is used. Radial integrals use
    ``nodes`` Gauss-Legendre points and the sphere a product rule with
    ``nodes`` polar points per angle.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    if n < 3:
        raise UnsupportedDimensionError(f"Green identity is implemented for n >= 3, got {n}")
    if r <= 0:
        raise DomainError("radius must be positive")
    lap = laplacian or _fd_laplacian(v, 1e-3 * r)
    dirs, wd = sphere_quadrature(n, nodes)
    area = n * unit_ball_volume(n)
    x01, w01 = gauss_legendre_01(nodes)

    def spherical_mean(f, radii):
        pts = y + radii[:, None, None] * dirs[None]
        vals = np.asarray(f(pts.reshape(-1, n)), dtype=float).reshape(radii.size, -1)
        return vals @ wd / area

    s = r * x01
    ball_avg = float(np.sum(r * w01 * area * s ** (n - 1) * spherical_mean(v, s))
                     / (unit_ball_volume(n) * r**n))
    moments = np.array([radial_gamma_moment(rho, n, lambda t: spherical_mean(lap, t), nodes)
                        for rho in s])
    correction = n / r**n * float(np.sum(r * w01 * s ** (n - 1) * moments))
    center = float(np.asarray(v(y[None, :]), dtype=float).ravel()[0])
    return abs(center - ball_avg - correction)
